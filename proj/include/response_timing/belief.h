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

// Prior beliefs over a future observable and the surprise of what is then
// observed. A prior is a one-dimensional Gaussian mixture predicted a
// horizon ahead from the state of the traffic scene; surprise is the
// surprisal -ln p(o_t) of the observation under that prediction, or the
// Kullback-Leibler divergence from prior to posterior.

#ifndef RESPONSE_TIMING_BELIEF_H_
#define RESPONSE_TIMING_BELIEF_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "absl/status/statusor.h"
#include "nlohmann/json.hpp"
#include "response_timing/trace.h"

namespace response_timing {

inline constexpr double kDensityFloor = 1e-300;

struct MixtureComponent {
  double weight = 1.0;
  double mean = 0.0;
  double std = 1.0;
};

class GaussianMixture {
 public:
  // Weights must be positive and sum to 1 within 1e-9; stds positive.
  static absl::StatusOr<GaussianMixture> Create(
      std::vector<MixtureComponent> components);
  static GaussianMixture Single(double mean, double std);

  const std::vector<MixtureComponent>& components() const {
    return components_;
  }
  bool is_single() const { return components_.size() == 1; }

  double Pdf(double x) const;
  // Computed in log space, finite far into the tails.
  double LogPdf(double x) const;

 private:
  explicit GaussianMixture(std::vector<MixtureComponent> components)
      : components_(std::move(components)) {}

  std::vector<MixtureComponent> components_;
};

double MixturePdf(const GaussianMixture& gm, double x);

// -ln(max(pdf(x), floor)), in nats.
double Surprisal(const GaussianMixture& gm, double x,
                 double floor = kDensityFloor);

struct KlEstimate {
  double value = 0.0;
  double standard_error = 0.0;  // 0 for the closed form
  bool closed_form = false;
};

// KL(posterior || prior) in nats. Closed form for two single Gaussians,
// otherwise a Monte Carlo estimate over n_samples posterior draws.
absl::StatusOr<KlEstimate> KlSurprise(const GaussianMixture& prior,
                                      const GaussianMixture& posterior,
                                      int n_samples = 10000,
                                      uint64_t seed = 0);

enum class PriorKind {
  kConstantVelocityLateral,
  kConstantLoomingRearEnd,
  kCustom,
};

enum class Observable { kLateralY, kThetaDot };

std::string_view PriorKindName(PriorKind kind);
std::string_view ObservableName(Observable observable);
absl::StatusOr<Observable> ParseObservable(std::string_view name);

struct TimedMixture {
  double t = 0.0;
  GaussianMixture mixture = GaussianMixture::Single(0.0, 1.0);
};

struct BeliefPrior {
  double horizon = 1.0;  // s
  PriorKind kind = PriorKind::kConstantVelocityLateral;
  // Predictive std = sigma0 + sigma1 * horizon.
  double sigma0 = 0.1;
  double sigma1 = 0.02;
  // kCustom: externally computed per-timestep predictions, by target time.
  std::vector<TimedMixture> custom;

  double PredictiveStd() const { return sigma0 + sigma1 * horizon; }

  static BeliefPrior Lateral();
  static BeliefPrior Looming();
};

absl::StatusOr<BeliefPrior> ParseBeliefPriorJson(const nlohmann::json& j);
nlohmann::json BeliefPriorJson(const BeliefPrior& prior);

struct SurpriseSeries {
  double dt = kDefaultTraceDt;
  double t0 = 0.0;
  std::vector<double> s;  // nats

  size_t size() const { return s.size(); }
  double TimeAt(size_t i) const { return t0 + static_cast<double>(i) * dt; }
  double EndTime() const { return size() == 0 ? t0 : TimeAt(size() - 1); }
};

// Prediction for time t made at t - horizon. Lateral: mean = y + vy *
// horizon (lane-relative); looming: mean = theta_dot at t - horizon.
// Errors: OutOfSpan.
absl::StatusOr<GaussianMixture> PredictPrior(const BeliefPrior& prior,
                                             const KinematicTrace& trace,
                                             double t);

// Surprisal of the observable at every sample at least one horizon into
// the trace. Errors: ObservableUnavailable.
absl::StatusOr<SurpriseSeries> ComputeSurpriseSeries(
    const BeliefPrior& prior, const KinematicTrace& trace,
    Observable observable);

std::string FormatSurpriseCsv(const SurpriseSeries& series);
absl::StatusOr<SurpriseSeries> ParseSurpriseCsv(std::string_view text);

// Columns t, weight_1, mean_1, std_1, weight_2, ...; rows may leave
// trailing groups empty.
absl::StatusOr<std::vector<TimedMixture>> ParseMixtureSequenceCsv(
    std::string_view text);
std::string FormatMixtureSequenceCsv(const std::vector<TimedMixture>& seq);

}  // namespace response_timing

#endif  // RESPONSE_TIMING_BELIEF_H_
