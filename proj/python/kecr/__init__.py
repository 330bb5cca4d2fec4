# SPDX-License-Identifier: Apache-2.0
"""Knowledge-enhanced conversational recommender.

Thin wrapper over the compiled core: structured results are decoded from
JSON into plain Python objects.
"""

from __future__ import annotations

import json
from os import PathLike
from typing import Any, Optional, Sequence, Union

from . import _kecr
from ._kecr import ConfigError, KecrError, NotFoundError, ParseError, bleu, corpus_bleu, distinct_n, recall_at_k

Path = Union[str, PathLike]

__all__ = [
    "ConfigError",
    "KecrError",
    "NotFoundError",
    "ParseError",
    "Recommender",
    "bleu",
    "build_kg",
    "corpus_bleu",
    "default_config",
    "distinct_n",
    "evaluate",
    "gen_data",
    "recall_at_k",
    "train",
]


def default_config() -> dict[str, Any]:
    return json.loads(_kecr.default_config())


def build_kg(triples: Path, out: Path, aliases: Optional[Path] = None) -> dict[str, int]:
    """Expand a triple file into a graph binary; returns entity, relation and triple counts."""
    return json.loads(_kecr.build_kg(str(triples), str(aliases) if aliases else "", str(out)))


def gen_data(kind: str, out: Path, seed: int = 42, conversations: int = 0) -> int:
    """Write a synthetic dataset (toy, mi, policy or reasoner); returns the conversation count."""
    return _kecr.gen_data(kind, str(out), seed, conversations)


def train(kg: Path, corpus: Path, out: Path, config: Optional[dict[str, Any]] = None) -> dict[str, list]:
    """Pretrain and jointly train; writes a checkpoint and returns the per-epoch traces."""
    return json.loads(_kecr.train(str(kg), str(corpus), str(out), json.dumps(config) if config else ""))


def evaluate(kg: Path, corpus: Path, checkpoint: Path, all: bool = False) -> dict[str, float]:
    """Metrics on the test split, or on every conversation with all=True."""
    return json.loads(_kecr.evaluate(str(kg), str(corpus), str(checkpoint), all))


class Recommender:
    """A trained model with live chat sessions."""

    def __init__(self, kg: Path, checkpoint: Path, templates: Optional[Path] = None, generator: str = ""):
        self._core = _kecr.Recommender(str(kg), str(checkpoint), str(templates) if templates else None, generator)

    def create_session(self) -> str:
        return self._core.create_session()

    def utterance(self, session_id: str, text: str) -> dict[str, Any]:
        return json.loads(self._core.utterance(session_id, text))

    def describe(self, session_id: str) -> dict[str, Any]:
        return json.loads(self._core.describe(session_id))

    def close(self, session_id: str) -> bool:
        return self._core.close(session_id)

    def link(self, text: str) -> Sequence[str]:
        return self._core.link(text)

    @property
    def entity_count(self) -> int:
        return self._core.entity_count
