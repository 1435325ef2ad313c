/* Copyright 2026 The Response Timing Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Rejection approximate Bayesian computation for the accumulator
// parameters (k, lambda, noise_sigma) given observed response onsets.

#ifndef RESPONSE_TIMING_ABC_FIT_H_
#define RESPONSE_TIMING_ABC_FIT_H_

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "response_timing/accumulator.h"
#include "response_timing/belief.h"

namespace response_timing {

struct UniformRange {
  double lo = 0.0;
  double hi = 1.0;

  double Mid() const { return 0.5 * (lo + hi); }
  double Width() const { return hi - lo; }
  double Sd() const { return Width() / std::sqrt(12.0); }
};

enum class DistanceKind { kRmseOfMeans, kQuantileRmse };

std::string_view DistanceKindName(DistanceKind kind);
absl::StatusOr<DistanceKind> ParseDistanceKind(std::string_view name);

struct AbcConfig {
  UniformRange k{0.0, 3.0};
  UniformRange lambda{-5.0, 0.0};
  UniformRange sigma{0.0, 0.5};
  double epsilon = 0.1;
  // When set, epsilon is replaced by this quantile of all proposal
  // distances.
  std::optional<double> accept_quantile;
  int n_proposals = 10000;
  DistanceKind distance_kind = DistanceKind::kRmseOfMeans;
  int mc_runs_per_proposal = 10;
  uint64_t seed = 0;
  int threads = 1;
  // Threshold, a0, dt and clamp used for every simulation; k, lambda and
  // noise_sigma are overwritten by each proposal.
  AccumulatorParams base;
};

absl::Status ValidateAbcConfig(const AbcConfig& config);

struct AbcSample {
  double k = 0.0;
  double lambda = 0.0;
  double sigma = 0.0;
  double distance = 0.0;
};

struct ParamSummary {
  double mean = 0.0;
  double sd = 0.0;
};

struct AbcPosterior {
  std::vector<AbcSample> accepted;  // in proposal order
  std::vector<AbcSample> proposals;  // every proposal with its distance
  double epsilon = 0.0;  // tolerance actually applied
  double acceptance_rate = 0.0;
  ParamSummary k, lambda, sigma;
};

// Onsets of one event's simulations; absent onsets are passed as nullopt.
struct SimulatedEvent {
  std::vector<std::optional<double>> onsets;
  double horizon = 0.0;  // substituted for absent onsets
};

// Errors: LengthMismatch.
absl::StatusOr<double> OnsetDistance(
    const std::vector<SimulatedEvent>& simulated,
    const std::vector<double>& observed, DistanceKind kind);

// Proposal i draws its parameters and simulation seeds from
// DeriveSeed(config.seed, i), so the result is independent of threading.
// Zero acceptances are reported through acceptance_rate, not as an error.
absl::StatusOr<AbcPosterior> RejectionAbc(
    const AbcConfig& config, const std::vector<SurpriseSeries>& surprise_sets,
    const std::vector<double>& observed_onsets,
    const std::vector<double>& baselines);

// Re-applies a tolerance to already evaluated proposals.
AbcPosterior AcceptWithin(std::vector<AbcSample> proposals, double epsilon);

absl::StatusOr<AbcConfig> ParseAbcConfigJson(const nlohmann::json& j);
nlohmann::json AbcConfigJson(const AbcConfig& config);
std::string FormatPosteriorCsv(const AbcPosterior& posterior);
nlohmann::json AbcSummaryJson(const AbcPosterior& posterior,
                              const AbcConfig& config);

}  // namespace response_timing

#endif  // RESPONSE_TIMING_ABC_FIT_H_
