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

#include "response_timing/accumulator.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "absl/strings/str_cat.h"
#include "response_timing/csv.h"
#include "response_timing/looming.h"
#include "response_timing/rng.h"

namespace response_timing {
namespace {

double Quantile(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

nlohmann::json OptionalJson(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

absl::Status ValidateParams(const AccumulatorParams& params) {
  if (!(params.dt > 0.0)) {
    return absl::InvalidArgumentError("accumulator dt must be positive");
  }
  if (params.noise_sigma < 0.0) {
    return absl::InvalidArgumentError("noise_sigma must be non-negative");
  }
  if (params.clamp_nonnegative && !(params.threshold > params.a0)) {
    return absl::InvalidArgumentError("threshold must exceed a0");
  }
  if (!std::isfinite(params.k) || !std::isfinite(params.lambda)) {
    return absl::InvalidArgumentError("k and lambda must be finite");
  }
  return absl::OkStatus();
}

double DefaultBaseline(const SurpriseSeries& s, double window) {
  std::vector<double> head;
  for (size_t i = 0; i < s.size(); ++i) {
    if (s.TimeAt(i) > s.t0 + window + 1e-9 && !head.empty()) break;
    head.push_back(s.s[i]);
  }
  if (head.empty()) return 0.0;
  std::sort(head.begin(), head.end());
  const size_t mid = head.size() / 2;
  return head.size() % 2 == 1 ? head[mid] : 0.5 * (head[mid - 1] + head[mid]);
}

absl::StatusOr<OnsetResult> Integrate(const AccumulatorParams& params,
                                      const SurpriseSeries& s, uint64_t seed,
                                      double baseline, bool keep_trajectory) {
  if (s.size() == 0) return absl::InvalidArgumentError("EmptySeries");
  if (absl::Status st = ValidateParams(params); !st.ok()) return st;

  OnsetResult result;
  result.seed = seed;
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double span = s.EndTime() - s.t0;
  const size_t steps =
      static_cast<size_t>(std::floor(span / params.dt + 1e-9));
  const double sqrt_dt = std::sqrt(params.dt);

  ActivationTrajectory traj{s.t0, params.dt, {}};
  double a = params.a0;
  if (keep_trajectory) {
    traj.a.reserve(steps + 1);
    traj.a.push_back(a);
  }
  if (a >= params.threshold) result.onset_t = s.t0;

  for (size_t i = 0; i < steps; ++i) {
    const double t = s.t0 + static_cast<double>(i) * params.dt;
    const double drive =
        std::max(SampleAt(s.s, s.t0, s.dt, t) - baseline, 0.0);
    double next = a + (params.k * drive + params.lambda * a) * params.dt;
    if (params.noise_sigma > 0.0) {
      next += params.noise_sigma * sqrt_dt * normal(rng);
    }
    if (params.clamp_nonnegative) next = std::max(next, 0.0);
    if (!result.onset_t && next >= params.threshold) {
      const double frac = (params.threshold - a) / (next - a);
      result.onset_t = t + std::clamp(frac, 0.0, 1.0) * params.dt;
      if (!keep_trajectory) return result;
    }
    a = next;
    if (keep_trajectory) traj.a.push_back(a);
  }
  if (keep_trajectory) result.trajectory = std::move(traj);
  return result;
}

OnsetSummary Summarize(const std::vector<std::optional<double>>& onsets) {
  OnsetSummary summary;
  summary.n = static_cast<int>(onsets.size());
  std::vector<double> hit;
  for (const auto& o : onsets) {
    if (o) hit.push_back(*o);
  }
  summary.n_responded = static_cast<int>(hit.size());
  summary.p_no_response =
      onsets.empty() ? 0.0
                     : 1.0 - static_cast<double>(hit.size()) /
                                 static_cast<double>(onsets.size());
  if (hit.empty()) return summary;
  double mean = 0.0;
  for (double v : hit) mean += v;
  mean /= static_cast<double>(hit.size());
  double ss = 0.0;
  for (double v : hit) ss += (v - mean) * (v - mean);
  summary.mean = mean;
  summary.sd = hit.size() > 1
                   ? std::sqrt(ss / static_cast<double>(hit.size() - 1))
                   : 0.0;
  std::sort(hit.begin(), hit.end());
  summary.q10 = Quantile(hit, 0.1);
  summary.q50 = Quantile(hit, 0.5);
  summary.q90 = Quantile(hit, 0.9);
  return summary;
}

absl::StatusOr<MonteCarloResult> MonteCarloOnsets(
    const AccumulatorParams& params, const SurpriseSeries& s, double baseline,
    int n, uint64_t seed, int threads) {
  if (n < 1) return absl::InvalidArgumentError("n must be at least 1");
  if (s.size() == 0) return absl::InvalidArgumentError("EmptySeries");
  if (absl::Status st = ValidateParams(params); !st.ok()) return st;

  MonteCarloResult out;
  out.onsets.resize(static_cast<size_t>(n));
  const int workers = std::clamp(threads, 1, n);
  auto run = [&](int worker) {
    for (int i = worker; i < n; i += workers) {
      absl::StatusOr<OnsetResult> r =
          Integrate(params, s, DeriveSeed(seed, static_cast<uint64_t>(i)),
                    baseline);
      out.onsets[static_cast<size_t>(i)] = r->onset_t;
    }
  };
  if (workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& th : pool) th.join();
  }
  out.summary = Summarize(out.onsets);
  return out;
}

absl::StatusOr<AccumulatorParams> ParseAccumulatorParamsJson(
    const nlohmann::json& j) {
  AccumulatorParams p;
  try {
    p.k = j.value("k", p.k);
    p.lambda = j.value("lambda", p.lambda);
    p.noise_sigma = j.value("noise_sigma", p.noise_sigma);
    p.threshold = j.value("threshold", p.threshold);
    p.a0 = j.value("a0", p.a0);
    p.dt = j.value("dt", p.dt);
    p.clamp_nonnegative = j.value("clamp_nonnegative", p.clamp_nonnegative);
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed accumulator params: ", e.what()));
  }
  if (absl::Status st = ValidateParams(p); !st.ok()) return st;
  return p;
}

nlohmann::json AccumulatorParamsJson(const AccumulatorParams& params) {
  return {{"k", params.k},
          {"lambda", params.lambda},
          {"noise_sigma", params.noise_sigma},
          {"threshold", params.threshold},
          {"a0", params.a0},
          {"dt", params.dt},
          {"clamp_nonnegative", params.clamp_nonnegative}};
}

nlohmann::json OnsetJson(const OnsetResult& result, double baseline) {
  return {{"onset_t", OptionalJson(result.onset_t)},
          {"seed", result.seed},
          {"baseline", baseline}};
}

nlohmann::json OnsetSummaryJson(const OnsetSummary& summary) {
  return {{"n", summary.n},
          {"n_responded", summary.n_responded},
          {"mean", OptionalJson(summary.mean)},
          {"sd", OptionalJson(summary.sd)},
          {"q10", OptionalJson(summary.q10)},
          {"q50", OptionalJson(summary.q50)},
          {"q90", OptionalJson(summary.q90)},
          {"p_no_response", summary.p_no_response}};
}

std::string FormatTrajectoryCsv(const ActivationTrajectory& trajectory) {
  std::string out = "t,A\n";
  for (size_t i = 0; i < trajectory.a.size(); ++i) {
    absl::StrAppend(
        &out,
        FormatDouble(trajectory.t0 + static_cast<double>(i) * trajectory.dt),
        ",", FormatDouble(trajectory.a[i]), "\n");
  }
  return out;
}

}  // namespace response_timing
