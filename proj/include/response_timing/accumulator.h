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

// Stochastic leaky evidence accumulator driven by a surprise series,
//   dA/dt = k * max(s - baseline, 0) + lambda * A + v(t),
// integrated by Euler-Maruyama. The response fires when A first reaches
// the threshold.

#ifndef RESPONSE_TIMING_ACCUMULATOR_H_
#define RESPONSE_TIMING_ACCUMULATOR_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "response_timing/belief.h"

namespace response_timing {

struct AccumulatorParams {
  double k = 1.0;       // gain, 1/(nats s)
  double lambda = 0.0;  // leak, 1/s; negative for leaky dynamics
  double noise_sigma = 0.0;
  double threshold = 1.0;
  double a0 = 0.0;
  double dt = 0.001;
  bool clamp_nonnegative = true;
};

absl::Status ValidateParams(const AccumulatorParams& params);

struct ActivationTrajectory {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> a;
};

struct OnsetResult {
  std::optional<double> onset_t;
  std::optional<ActivationTrajectory> trajectory;
  uint64_t seed = 0;
};

// Median of the samples in the first `window` seconds of the series.
double DefaultBaseline(const SurpriseSeries& s, double window = 1.0);

// Integrates from the first to the last sample of `s`, which is linearly
// interpolated onto the params.dt grid. Errors: EmptySeries.
absl::StatusOr<OnsetResult> Integrate(const AccumulatorParams& params,
                                      const SurpriseSeries& s, uint64_t seed,
                                      double baseline,
                                      bool keep_trajectory = false);

struct OnsetSummary {
  int n = 0;
  int n_responded = 0;
  std::optional<double> mean;
  std::optional<double> sd;
  std::optional<double> q10;
  std::optional<double> q50;
  std::optional<double> q90;
  double p_no_response = 0.0;
};

struct MonteCarloResult {
  std::vector<std::optional<double>> onsets;  // in run order
  OnsetSummary summary;
};

// Run i uses DeriveSeed(seed, i), so the result does not depend on the
// thread count.
absl::StatusOr<MonteCarloResult> MonteCarloOnsets(
    const AccumulatorParams& params, const SurpriseSeries& s, double baseline,
    int n, uint64_t seed, int threads = 1);

OnsetSummary Summarize(const std::vector<std::optional<double>>& onsets);

absl::StatusOr<AccumulatorParams> ParseAccumulatorParamsJson(
    const nlohmann::json& j);
nlohmann::json AccumulatorParamsJson(const AccumulatorParams& params);
nlohmann::json OnsetJson(const OnsetResult& result, double baseline);
nlohmann::json OnsetSummaryJson(const OnsetSummary& summary);
std::string FormatTrajectoryCsv(const ActivationTrajectory& trajectory);

}  // namespace response_timing

#endif  // RESPONSE_TIMING_ACCUMULATOR_H_
