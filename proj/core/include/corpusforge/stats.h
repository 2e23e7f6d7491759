// core/include/corpusforge/stats.h

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

#ifndef CORPUSFORGE_STATS_H_
#define CORPUSFORGE_STATS_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "corpusforge/metrics.h"

namespace corpusforge {

struct UtteranceScore {
  std::uint64_t errors = 0;
  std::uint64_t ref_words = 0;
};

struct SystemScores {
  std::string label;
  std::vector<UtteranceScore> per_utterance;
};

SystemScores scores_from_report(const std::vector<UtteranceErrors>& errors,
                                std::string label);

struct BootstrapOptions {
  std::uint64_t replicates = 10000;
  double level = 0.95;
  std::uint64_t seed = 0;
  // Replace random resampling by all N^N ordered index draws (N <= 8).
  bool enumerate = false;
  unsigned threads = 1;
};

/// Paired bootstrap comparison. diff = WER(a) - WER(b) per replicate, so a
/// positive difference means b is better; poi is the share of replicates
/// where b improves on a, ties counting half.
struct BootstrapReport {
  std::string label_a;
  std::string label_b;
  std::uint64_t replicates = 0;
  std::uint64_t seed = 0;
  std::string generator;
  double level = 0.95;
  double observed_diff = 0.0;
  double mean_diff = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double poi = 0.0;
  // poi == poi_twice_numerator / (2 * replicates), kept exact.
  std::uint64_t poi_twice_numerator = 0;
  std::uint64_t redrawn = 0;
};

inline constexpr const char* kBootstrapGenerator =
    "mt19937_64 seeded by seed_seq{seed_lo, seed_hi, rep_lo, rep_hi, attempt}; "
    "bounded draws by rejection";

/// Index stream for one replicate; a pure function of (seed, replicate).
std::vector<std::size_t> replicate_indices(std::uint64_t seed,
                                           std::uint64_t replicate,
                                           std::size_t n,
                                           std::uint64_t attempt = 0);

BootstrapReport bootstrap_compare(const SystemScores& a, const SystemScores& b,
                                  const BootstrapOptions& options = {});

struct ExactPoi {
  double poi = 0.0;
  // poi == twice_numerator / (2 * total_weight)
  std::uint64_t twice_numerator = 0;
  std::uint64_t total_weight = 0;
};

/// Exact POI over all N^N equally likely resamples, computed by enumerating
/// index multisets with multinomial weights. Resamples with no reference
/// words are excluded. Throws ValidationError for N > 8.
ExactPoi exhaustive_poi(const SystemScores& a, const SystemScores& b);

bool is_significant(double poi, double threshold = 0.95);

enum class SignificanceBand { kSignificant, kAcceptable, kNotSignificant };

// [threshold, 1] significant; [0.8, threshold) acceptable; below that not.
SignificanceBand significance_band(double poi, double threshold = 0.95);
std::string describe_significance(double poi, double threshold = 0.95);

std::string format_bootstrap_report(const BootstrapReport& report,
                                    double threshold = 0.95);

}  // namespace corpusforge

#endif  // CORPUSFORGE_STATS_H_
