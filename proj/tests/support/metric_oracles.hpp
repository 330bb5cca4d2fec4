// SPDX-License-Identifier: Apache-2.0
// Hand-derived metric cases shared by the unit tests and the acceptance runner.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "kecr/ids.hpp"
#include "kecr/metrics.hpp"
#include "kecr/rng.hpp"

namespace kecr::testing {

struct MetricOracleReport {
  bool recall_monotone = true;
  bool distinct_exact = true;
  bool bleu_identity = true;
  bool bleu_hand = true;
  bool bleu_disjoint = true;
  double bleu_hand_value = 0.0;
  double bleu_hand_partial = 0.0;
  bool ok() const { return recall_monotone && distinct_exact && bleu_identity && bleu_hand && bleu_disjoint; }
};

inline constexpr double kBleuTolerance = 1e-6;

/// "the cat sat" against "the cat sat down": every 1..3-gram matches, no
/// 4-gram exists, brevity penalty exp(1 - 4/3).
inline double hand_bleu_short() { return std::exp(1.0 - 4.0 / 3.0); }

/// "the cat sat on the mat" against "the cat sat on a mat": clipped
/// precisions 5/6, 3/5, 2/4, 1/3 and equal lengths.
inline double hand_bleu_partial() { return std::pow(5.0 / 6.0 * 3.0 / 5.0 * 2.0 / 4.0 * 1.0 / 3.0, 0.25); }

inline MetricOracleReport run_metric_oracles() {
  MetricOracleReport rep;
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.index(30);
    std::vector<EntityId> ranked;
    for (std::size_t i = 0; i < n; ++i) ranked.emplace_back(static_cast<std::uint32_t>(i));
    rng.shuffle(ranked);
    const EntityId gold{static_cast<std::uint32_t>(rng.index(40))};
    double prev = 0.0;
    for (std::size_t k = 1; k <= 35; ++k) {
      const double r = recall_at_k(ranked, gold, k);
      if (r < prev || (r != 0.0 && r != 1.0)) rep.recall_monotone = false;
      prev = r;
    }
  }
  if (recall_at_k({}, EntityId{0}, 5) != 0.0) rep.recall_monotone = false;

  rep.distinct_exact = distinct_n({"a b a b"}, 2) == 2.0 / 3.0 && distinct_n({"x", "x", "x", "x"}, 1) == 1.0 / 4.0 &&
                       distinct_n({"solo"}, 2) == 0.0 && distinct_n({"a b c", "a b d"}, 2) == 3.0 / 4.0;

  rep.bleu_identity = std::abs(bleu("dead silence might be suitable for you", {"dead silence might be suitable for you"}) -
                               1.0) < kBleuTolerance;
  rep.bleu_hand_value = bleu("the cat sat", {"the cat sat down"});
  rep.bleu_hand_partial = bleu("the cat sat on the mat", {"the cat sat on a mat"});
  rep.bleu_hand = std::abs(rep.bleu_hand_value - hand_bleu_short()) < kBleuTolerance &&
                  std::abs(rep.bleu_hand_partial - hand_bleu_partial()) < kBleuTolerance;
  rep.bleu_disjoint = bleu("alpha beta gamma delta", {"one two three four"}) <= kBleuTolerance;
  return rep;
}

}  // namespace kecr::testing
