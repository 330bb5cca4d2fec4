# SPDX-License-Identifier: Apache-2.0
import math

import pytest

import kecr

TOY_CONFIG = {"embed_dim": 16, "lr": 0.01, "pretrain_epochs": 5, "joint_epochs": 60, "finetune_encoders": True, "seed": 7}


@pytest.fixture(scope="module")
def toy(tmp_path_factory):
    root = tmp_path_factory.mktemp("toy")
    assert kecr.gen_data("toy", root, seed=42, conversations=30) == 30
    counts = kecr.build_kg(root / "triples.tsv", root / "kg.bin", aliases=root / "aliases.jsonl")
    trace = kecr.train(root / "kg.bin", root / "dialogues.jsonl", root / "model.json", TOY_CONFIG)
    return root, counts, trace


def test_toy_graph_counts(toy):
    _, counts, _ = toy
    assert (counts["entities"], counts["relations"], counts["triples"]) == (10, 12, 16)


def test_training_traces(toy):
    _, _, trace = toy
    assert len(trace["pretrain"]) == 5
    assert 0 < len(trace["joint"]) <= 60
    assert all(math.isfinite(e["train_loss"]) for e in trace["joint"])


def test_training_is_reproducible(toy, tmp_path):
    root, _, _ = toy
    kecr.train(root / "kg.bin", root / "dialogues.jsonl", tmp_path / "again.json", TOY_CONFIG)
    assert (tmp_path / "again.json").read_bytes() == (root / "model.json").read_bytes()


def test_evaluate(toy):
    root, _, _ = toy
    report = kecr.evaluate(root / "kg.bin", root / "dialogues.jsonl", root / "model.json", all=True)
    assert report["rounds"] > 0
    for key in ("recall@1", "recall@10", "policy_accuracy"):
        assert 0.0 <= report[key] <= 1.0


def test_session_round_trip(toy):
    root, _, _ = toy
    rec = kecr.Recommender(root / "kg.bin", root / "model.json")
    assert rec.entity_count == 10
    assert list(rec.link("I love horror movies similar to Annabelle")) == ["Horror Film", "Annabelle"]
    sid = rec.create_session()
    first = rec.utterance(sid, "Hi, I am looking for a movie recommendation.")
    second = rec.utterance(sid, "I love horror movies similar to Annabelle")
    assert first["action"] in ("chat", "query", "recommend")
    assert second["action"] == "recommend"
    assert second["reply"]
    state = rec.describe(sid)
    assert state["session_id"] == sid
    assert [t["speaker"] for t in state["transcript"]] == ["seeker", "wizard", "seeker", "wizard"]
    assert rec.close(sid)
    with pytest.raises(kecr.NotFoundError):
        rec.describe(sid)


def test_missing_checkpoint(toy):
    root, _, _ = toy
    with pytest.raises(FileNotFoundError):
        kecr.Recommender(root / "kg.bin", root / "absent.json")


def test_bad_config_key(toy, tmp_path):
    root, _, _ = toy
    with pytest.raises(ValueError):
        kecr.train(root / "kg.bin", root / "dialogues.jsonl", tmp_path / "x.json", {"bogus": 1})


def test_metrics():
    assert kecr.bleu("the cat sat on the mat", ["the cat sat on the mat"]) == pytest.approx(1.0)
    assert kecr.bleu("the cat sat", ["the cat sat down"]) == pytest.approx(math.exp(1 - 4 / 3), abs=1e-9)
    assert kecr.distinct_n(["a b", "a b"], 1) == pytest.approx(0.5)
    assert kecr.recall_at_k([3, 1, 2], 1, 1) == 0.0
    assert kecr.recall_at_k([3, 1, 2], 1, 2) == 1.0
    assert kecr.default_config()["embed_dim"] > 0
