// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kecr/ids.hpp"

namespace kecr {

/// 1 when gold is among the first k entries. Empty ranking gives 0.
double recall_at_k(const std::vector<EntityId>& ranked, EntityId gold, std::size_t k);

/// Distinct n-grams over all texts divided by the total n-gram count.
/// Whitespace tokens, n-grams never cross text boundaries. 0 without n-grams.
double distinct_n(const std::vector<std::string>& texts, std::size_t n);

inline constexpr double kBleuEpsilon = 1e-9;

/// Corpus BLEU with uniform weights up to order 4, clipped counts, brevity
/// penalty against the closest reference length, and epsilon smoothing of
/// orders that have candidate n-grams but no match. The order is capped at
/// the longest n for which the candidates have any n-gram.
double corpus_bleu(const std::vector<std::string>& candidates,
                   const std::vector<std::vector<std::string>>& references);
/// Single sentence; empty candidate gives 0.
double bleu(const std::string& candidate, const std::vector<std::string>& references);

}  // namespace kecr
