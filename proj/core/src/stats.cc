// core/src/stats.cc

// Copyright 2026  The corpusforge Authors

// See the LICENSE file at the top of the source tree.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "corpusforge/stats.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "corpusforge/error.h"
#include "json.hpp"

namespace corpusforge {

using ojson = nlohmann::ordered_json;
using u128 = unsigned __int128;

namespace {

constexpr std::uint64_t kMaxRedraws = 10000;
constexpr std::size_t kMaxEnumerationSize = 8;

struct Totals {
  std::uint64_t errors_a = 0, words_a = 0;
  std::uint64_t errors_b = 0, words_b = 0;

  bool valid() const { return words_a > 0 && words_b > 0; }
  double diff() const {
    return 100.0 * static_cast<double>(errors_a) / static_cast<double>(words_a) -
           100.0 * static_cast<double>(errors_b) / static_cast<double>(words_b);
  }
  // Sign of WER(a) - WER(b), compared exactly.
  int sign() const {
    const u128 lhs = static_cast<u128>(errors_a) * words_b;
    const u128 rhs = static_cast<u128>(errors_b) * words_a;
    return lhs > rhs ? 1 : (lhs < rhs ? -1 : 0);
  }
};

Totals totals_for(const SystemScores& a, const SystemScores& b,
                  const std::vector<std::size_t>& indices) {
  Totals t;
  for (std::size_t i : indices) {
    t.errors_a += a.per_utterance[i].errors;
    t.words_a += a.per_utterance[i].ref_words;
    t.errors_b += b.per_utterance[i].errors;
    t.words_b += b.per_utterance[i].ref_words;
  }
  return t;
}

void check_pair(const SystemScores& a, const SystemScores& b) {
  if (a.per_utterance.size() != b.per_utterance.size()) {
    throw ValidationError("bootstrap: systems have different utterance counts (" +
                          std::to_string(a.per_utterance.size()) + " vs " +
                          std::to_string(b.per_utterance.size()) + ")");
  }
  if (a.per_utterance.empty()) throw ValidationError("bootstrap: no utterances");
  auto words = [](const SystemScores& s) {
    std::uint64_t n = 0;
    for (const auto& u : s.per_utterance) n += u.ref_words;
    return n;
  };
  if (words(a) == 0 || words(b) == 0) {
    throw ValidationError("bootstrap: no reference words");
  }
}

double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

SystemScores scores_from_report(const std::vector<UtteranceErrors>& errors,
                                std::string label) {
  SystemScores s;
  s.label = std::move(label);
  for (const auto& u : errors) {
    s.per_utterance.push_back({u.word_errors(), u.ref_word_count});
  }
  return s;
}

std::vector<std::size_t> replicate_indices(std::uint64_t seed,
                                           std::uint64_t replicate,
                                           std::size_t n,
                                           std::uint64_t attempt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(replicate),
                    static_cast<std::uint32_t>(replicate >> 32),
                    static_cast<std::uint32_t>(attempt)};
  std::mt19937_64 gen(seq);
  const std::uint64_t bound = n;
  // 2^64 mod n; values below it would bias the modulo.
  const std::uint64_t reject_below = (0 - bound) % bound;
  std::vector<std::size_t> indices(n);
  for (auto& idx : indices) {
    std::uint64_t x = gen();
    while (x < reject_below) x = gen();
    idx = static_cast<std::size_t>(x % bound);
  }
  return indices;
}

BootstrapReport bootstrap_compare(const SystemScores& a, const SystemScores& b,
                                  const BootstrapOptions& options) {
  check_pair(a, b);
  if (!(options.level > 0.0 && options.level < 1.0)) {
    throw ValidationError("bootstrap: level must be in (0, 1)");
  }
  const std::size_t n = a.per_utterance.size();

  BootstrapReport report;
  report.label_a = a.label;
  report.label_b = b.label;
  report.seed = options.seed;
  report.level = options.level;
  report.observed_diff = totals_for(a, b, [&] {
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    return all;
  }()).diff();

  std::vector<double> diffs;
  std::uint64_t greater = 0, equal = 0;
  if (options.enumerate) {
    if (n > kMaxEnumerationSize) {
      throw ValidationError("bootstrap: enumeration needs N <= 8");
    }
    report.generator = "full enumeration of N^N ordered resamples";
    std::vector<std::size_t> indices(n, 0);
    while (true) {
      const Totals t = totals_for(a, b, indices);
      if (t.valid()) {
        diffs.push_back(t.diff());
        const int s = t.sign();
        greater += s > 0;
        equal += s == 0;
      }
      std::size_t pos = 0;
      while (pos < n && ++indices[pos] == n) indices[pos++] = 0;
      if (pos == n) break;
    }
  } else {
    if (options.replicates == 0) throw ValidationError("bootstrap: B must be >= 1");
    report.generator = kBootstrapGenerator;
    const std::uint64_t replicates = options.replicates;
    diffs.assign(replicates, 0.0);
    std::vector<signed char> signs(replicates, 0);
    std::vector<std::uint64_t> redraws(replicates, 0);
    auto work = [&](std::uint64_t begin, std::uint64_t end) {
      for (std::uint64_t r = begin; r < end; ++r) {
        for (std::uint64_t attempt = 0;; ++attempt) {
          if (attempt > kMaxRedraws) {
            throw Error("bootstrap: too many resamples without reference words");
          }
          const Totals t = totals_for(a, b, replicate_indices(options.seed, r, n, attempt));
          if (!t.valid()) {
            ++redraws[r];
            continue;
          }
          diffs[r] = t.diff();
          signs[r] = static_cast<signed char>(t.sign());
          break;
        }
      }
    };
    const unsigned threads = std::max(1u, std::min<unsigned>(
        options.threads, static_cast<unsigned>(std::min<std::uint64_t>(replicates, 64))));
    if (threads == 1) {
      work(0, replicates);
    } else {
      std::vector<std::jthread> pool;
      std::vector<std::exception_ptr> errors(threads);
      const std::uint64_t chunk = (replicates + threads - 1) / threads;
      for (unsigned t = 0; t < threads; ++t) {
        const std::uint64_t begin = std::min(replicates, t * chunk);
        const std::uint64_t end = std::min(replicates, begin + chunk);
        pool.emplace_back([&, t, begin, end] {
          try {
            work(begin, end);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
      }
      pool.clear();
      for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    for (std::uint64_t r = 0; r < replicates; ++r) {
      greater += signs[r] > 0;
      equal += signs[r] == 0;
      report.redrawn += redraws[r];
    }
  }

  report.replicates = diffs.size();
  if (diffs.empty()) throw Error("bootstrap: no valid resamples");
  double sum = 0.0;
  for (double d : diffs) sum += d;
  report.mean_diff = sum / static_cast<double>(diffs.size());
  std::vector<double> sorted = diffs;
  std::sort(sorted.begin(), sorted.end());
  const double tail = (1.0 - options.level) / 2.0;
  report.ci_low = quantile(sorted, tail);
  report.ci_high = quantile(sorted, 1.0 - tail);
  report.poi_twice_numerator = 2 * greater + equal;
  report.poi = static_cast<double>(report.poi_twice_numerator) /
               (2.0 * static_cast<double>(report.replicates));
  return report;
}

namespace {

struct MultisetWalk {
  const SystemScores& a;
  const SystemScores& b;
  std::vector<std::uint64_t> factorial;
  std::uint64_t greater = 0, equal = 0, total = 0;

  // Assigns counts to utterance `index` onward; `left` draws remain.
  void visit(std::size_t index, std::size_t left, std::uint64_t denominator,
             Totals totals) {
    const std::size_t n = a.per_utterance.size();
    if (index + 1 == n) {
      const auto c = static_cast<std::uint64_t>(left);
      totals.errors_a += c * a.per_utterance[index].errors;
      totals.words_a += c * a.per_utterance[index].ref_words;
      totals.errors_b += c * b.per_utterance[index].errors;
      totals.words_b += c * b.per_utterance[index].ref_words;
      if (!totals.valid()) return;
      const std::uint64_t weight = factorial[n] / (denominator * factorial[left]);
      total += weight;
      const int s = totals.sign();
      if (s > 0) greater += weight;
      if (s == 0) equal += weight;
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      Totals next = totals;
      next.errors_a += c * a.per_utterance[index].errors;
      next.words_a += c * a.per_utterance[index].ref_words;
      next.errors_b += c * b.per_utterance[index].errors;
      next.words_b += c * b.per_utterance[index].ref_words;
      visit(index + 1, left - c, denominator * factorial[c], next);
    }
  }
};

}  // namespace

ExactPoi exhaustive_poi(const SystemScores& a, const SystemScores& b) {
  check_pair(a, b);
  const std::size_t n = a.per_utterance.size();
  if (n > kMaxEnumerationSize) {
    throw ValidationError("exhaustive_poi: N = " + std::to_string(n) +
                          " is too large (max 8)");
  }
  MultisetWalk walk{a, b, std::vector<std::uint64_t>(n + 1, 1)};
  for (std::size_t i = 1; i <= n; ++i) walk.factorial[i] = walk.factorial[i - 1] * i;
  walk.visit(0, n, 1, Totals{});
  if (walk.total == 0) throw Error("exhaustive_poi: no valid resamples");
  ExactPoi exact;
  exact.total_weight = walk.total;
  exact.twice_numerator = 2 * walk.greater + walk.equal;
  exact.poi = static_cast<double>(exact.twice_numerator) /
              (2.0 * static_cast<double>(exact.total_weight));
  return exact;
}

bool is_significant(double poi, double threshold) { return poi >= threshold; }

SignificanceBand significance_band(double poi, double threshold) {
  if (poi >= threshold) return SignificanceBand::kSignificant;
  if (poi >= 0.8) return SignificanceBand::kAcceptable;
  return SignificanceBand::kNotSignificant;
}

std::string describe_significance(double poi, double threshold) {
  char buf[160];
  switch (significance_band(poi, threshold)) {
    case SignificanceBand::kSignificant:
      std::snprintf(buf, sizeof(buf), "significant: POI %.4f >= %.2f", poi, threshold);
      break;
    case SignificanceBand::kAcceptable:
      std::snprintf(buf, sizeof(buf),
                    "not significant at %.2f, but POI %.4f is in the acceptable "
                    "band [0.80, %.2f)",
                    threshold, poi, threshold);
      break;
    case SignificanceBand::kNotSignificant:
      std::snprintf(buf, sizeof(buf), "not significant: POI %.4f < 0.80", poi);
      break;
  }
  return buf;
}

std::string format_bootstrap_report(const BootstrapReport& report,
                                    double threshold) {
  static const char* const kBands[] = {"significant", "acceptable",
                                       "not_significant"};
  ojson doc;
  doc["system_a"] = report.label_a;
  doc["system_b"] = report.label_b;
  doc["replicates"] = report.replicates;
  doc["seed"] = report.seed;
  doc["generator"] = report.generator;
  doc["level"] = report.level;
  doc["observed_diff"] = report.observed_diff;
  doc["mean_diff"] = report.mean_diff;
  doc["ci_low"] = report.ci_low;
  doc["ci_high"] = report.ci_high;
  doc["poi"] = report.poi;
  doc["redrawn"] = report.redrawn;
  doc["significant"] = is_significant(report.poi, threshold);
  doc["band"] = kBands[static_cast<int>(significance_band(report.poi, threshold))];
  doc["note"] = describe_significance(report.poi, threshold);
  return doc.dump(2, ' ', false, ojson::error_handler_t::strict) + "\n";
}

}  // namespace corpusforge
