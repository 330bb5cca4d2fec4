// SPDX-License-Identifier: Apache-2.0
#include "kecr/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>

#include "kecr/errors.hpp"

namespace kecr {

double recall_at_k(const std::vector<EntityId>& ranked, EntityId gold, std::size_t k) {
  if (k == 0) throw ConfigError("recall_at_k needs k >= 1");
  const std::size_t limit = std::min(k, ranked.size());
  for (std::size_t i = 0; i < limit; ++i) {
    if (ranked[i] == gold) return 1.0;
  }
  return 0.0;
}

namespace {

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string tok; in >> tok;) out.push_back(std::move(tok));
  return out;
}

using NGram = std::vector<std::string>;

std::map<NGram, std::size_t> ngram_counts(const std::vector<std::string>& toks, std::size_t n) {
  std::map<NGram, std::size_t> counts;
  if (toks.size() < n) return counts;
  for (std::size_t i = 0; i + n <= toks.size(); ++i) ++counts[NGram(toks.begin() + i, toks.begin() + i + n)];
  return counts;
}

}  // namespace

double distinct_n(const std::vector<std::string>& texts, std::size_t n) {
  if (n == 0) throw ConfigError("distinct_n needs n >= 1");
  std::set<NGram> unique;
  std::size_t total = 0;
  for (const auto& text : texts) {
    const auto toks = split(text);
    if (toks.size() < n) continue;
    for (std::size_t i = 0; i + n <= toks.size(); ++i) {
      unique.emplace(toks.begin() + i, toks.begin() + i + n);
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(unique.size()) / static_cast<double>(total);
}

double corpus_bleu(const std::vector<std::string>& candidates,
                   const std::vector<std::vector<std::string>>& references) {
  if (candidates.size() != references.size()) throw ConfigError("corpus_bleu: candidate/reference count mismatch");
  constexpr std::size_t kMaxOrder = 4;
  std::array<double, kMaxOrder> matched{};
  std::array<double, kMaxOrder> total{};
  double cand_len = 0.0;
  double ref_len = 0.0;
  for (std::size_t s = 0; s < candidates.size(); ++s) {
    const auto cand = split(candidates[s]);
    std::vector<std::vector<std::string>> refs;
    for (const auto& r : references[s]) refs.push_back(split(r));
    cand_len += static_cast<double>(cand.size());
    // Closest reference length, shorter one on ties.
    std::size_t best = 0;
    bool have = false;
    for (const auto& r : refs) {
      const auto diff = [&](std::size_t len) {
        return len > cand.size() ? len - cand.size() : cand.size() - len;
      };
      if (!have || diff(r.size()) < diff(best) || (diff(r.size()) == diff(best) && r.size() < best)) {
        best = r.size();
        have = true;
      }
    }
    ref_len += static_cast<double>(best);
    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
      const auto counts = ngram_counts(cand, n);
      std::map<NGram, std::size_t> max_ref;
      for (const auto& r : refs) {
        for (const auto& [g, c] : ngram_counts(r, n)) max_ref[g] = std::max(max_ref[g], c);
      }
      for (const auto& [g, c] : counts) {
        total[n - 1] += static_cast<double>(c);
        auto it = max_ref.find(g);
        if (it != max_ref.end()) matched[n - 1] += static_cast<double>(std::min(c, it->second));
      }
    }
  }
  std::size_t order = 0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    if (total[n] > 0) order = n + 1;
  }
  if (order == 0) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 0; n < order; ++n) {
    const double m = matched[n] > 0 ? matched[n] : kBleuEpsilon;
    log_sum += std::log(m / total[n]);
  }
  const double bp = cand_len >= ref_len ? 1.0 : std::exp(1.0 - ref_len / cand_len);
  return bp * std::exp(log_sum / static_cast<double>(order));
}

double bleu(const std::string& candidate, const std::vector<std::string>& references) {
  if (split(candidate).empty()) return 0.0;
  return corpus_bleu({candidate}, {references});
}

}  // namespace kecr
