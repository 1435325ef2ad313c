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

#include "response_timing/abc_fit.h"

#include <algorithm>
#include <random>
#include <thread>

#include "absl/strings/str_cat.h"
#include "response_timing/csv.h"
#include "response_timing/rng.h"

namespace response_timing {
namespace {

double Quantile(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double pos = p * static_cast<double>(v.size() - 1);
  const size_t lo = static_cast<size_t>(std::floor(pos));
  const size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

ParamSummary SummarizeParam(const std::vector<AbcSample>& samples,
                            double AbcSample::*field) {
  ParamSummary out;
  if (samples.empty()) return out;
  for (const auto& s : samples) out.mean += s.*field;
  out.mean /= static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double ss = 0.0;
    for (const auto& s : samples) {
      ss += (s.*field - out.mean) * (s.*field - out.mean);
    }
    out.sd = std::sqrt(ss / static_cast<double>(samples.size() - 1));
  }
  return out;
}

absl::Status CheckRange(const UniformRange& r, std::string_view name) {
  if (!(r.lo < r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
    return absl::InvalidArgumentError(
        absl::StrCat("prior range for ", std::string(name), " needs lo < hi"));
  }
  return absl::OkStatus();
}

absl::StatusOr<UniformRange> ParseRange(const nlohmann::json& j,
                                        std::string_view key,
                                        UniformRange fallback) {
  if (!j.contains(key)) return fallback;
  const nlohmann::json& r = j.at(std::string(key));
  if (!r.is_array() || r.size() != 2) {
    return absl::InvalidArgumentError(
        absl::StrCat("prior '", std::string(key), "' must be [lo, hi]"));
  }
  return UniformRange{r[0].get<double>(), r[1].get<double>()};
}

}  // namespace

std::string_view DistanceKindName(DistanceKind kind) {
  return kind == DistanceKind::kRmseOfMeans ? "rmse_of_means"
                                            : "quantile_rmse";
}

absl::StatusOr<DistanceKind> ParseDistanceKind(std::string_view name) {
  if (name == "rmse_of_means") return DistanceKind::kRmseOfMeans;
  if (name == "quantile_rmse") return DistanceKind::kQuantileRmse;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown distance kind '", std::string(name), "'"));
}

absl::Status ValidateAbcConfig(const AbcConfig& config) {
  for (auto [range, name] : {std::pair{config.k, "k"},
                             std::pair{config.lambda, "lambda"},
                             std::pair{config.sigma, "sigma"}}) {
    if (absl::Status s = CheckRange(range, name); !s.ok()) return s;
  }
  if (config.sigma.lo < 0.0) {
    return absl::InvalidArgumentError("sigma prior must be non-negative");
  }
  if (!(config.epsilon > 0.0)) {
    return absl::InvalidArgumentError("epsilon must be positive");
  }
  if (config.accept_quantile &&
      !(*config.accept_quantile > 0.0 && *config.accept_quantile <= 1.0)) {
    return absl::InvalidArgumentError("accept_quantile must lie in (0, 1]");
  }
  if (config.n_proposals < 1 || config.mc_runs_per_proposal < 1) {
    return absl::InvalidArgumentError(
        "n_proposals and mc_runs_per_proposal must be at least 1");
  }
  return ValidateParams(config.base);
}

absl::StatusOr<double> OnsetDistance(
    const std::vector<SimulatedEvent>& simulated,
    const std::vector<double>& observed, DistanceKind kind) {
  if (simulated.size() != observed.size() || observed.empty()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "LengthMismatch: ", simulated.size(), " simulated events vs ",
        observed.size(), " observed onsets"));
  }
  if (kind == DistanceKind::kRmseOfMeans) {
    double ss = 0.0;
    for (size_t e = 0; e < observed.size(); ++e) {
      const SimulatedEvent& ev = simulated[e];
      if (ev.onsets.empty()) {
        return absl::InvalidArgumentError(
            absl::StrCat("LengthMismatch: event ", e, " has no simulations"));
      }
      double mean = 0.0;
      for (const auto& o : ev.onsets) mean += o.value_or(ev.horizon);
      mean /= static_cast<double>(ev.onsets.size());
      ss += (mean - observed[e]) * (mean - observed[e]);
    }
    return std::sqrt(ss / static_cast<double>(observed.size()));
  }
  std::vector<double> pooled;
  for (const SimulatedEvent& ev : simulated) {
    for (const auto& o : ev.onsets) pooled.push_back(o.value_or(ev.horizon));
  }
  if (pooled.empty()) {
    return absl::InvalidArgumentError("LengthMismatch: no simulations");
  }
  double ss = 0.0;
  for (double p : {0.1, 0.5, 0.9}) {
    const double d = Quantile(pooled, p) - Quantile(observed, p);
    ss += d * d;
  }
  return std::sqrt(ss / 3.0);
}

AbcPosterior AcceptWithin(std::vector<AbcSample> proposals, double epsilon) {
  AbcPosterior out;
  out.epsilon = epsilon;
  for (const AbcSample& s : proposals) {
    if (s.distance <= epsilon) out.accepted.push_back(s);
  }
  out.acceptance_rate =
      proposals.empty() ? 0.0
                        : static_cast<double>(out.accepted.size()) /
                              static_cast<double>(proposals.size());
  out.k = SummarizeParam(out.accepted, &AbcSample::k);
  out.lambda = SummarizeParam(out.accepted, &AbcSample::lambda);
  out.sigma = SummarizeParam(out.accepted, &AbcSample::sigma);
  out.proposals = std::move(proposals);
  return out;
}

absl::StatusOr<AbcPosterior> RejectionAbc(
    const AbcConfig& config, const std::vector<SurpriseSeries>& surprise_sets,
    const std::vector<double>& observed_onsets,
    const std::vector<double>& baselines) {
  if (absl::Status s = ValidateAbcConfig(config); !s.ok()) return s;
  if (surprise_sets.empty() || surprise_sets.size() != observed_onsets.size() ||
      baselines.size() != surprise_sets.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        "LengthMismatch: ", surprise_sets.size(), " surprise series, ",
        observed_onsets.size(), " onsets, ", baselines.size(), " baselines"));
  }
  for (const SurpriseSeries& s : surprise_sets) {
    if (s.size() == 0) return absl::InvalidArgumentError("EmptySeries");
  }

  const size_t n = static_cast<size_t>(config.n_proposals);
  const size_t events = surprise_sets.size();
  const size_t runs = static_cast<size_t>(config.mc_runs_per_proposal);
  std::vector<AbcSample> proposals(n);

  auto evaluate = [&](size_t i) {
    const uint64_t proposal_seed = DeriveSeed(config.seed, i);
    Rng rng(proposal_seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    AbcSample& sample = proposals[i];
    sample.k = config.k.lo + config.k.Width() * u(rng);
    sample.lambda = config.lambda.lo + config.lambda.Width() * u(rng);
    sample.sigma = config.sigma.lo + config.sigma.Width() * u(rng);

    AccumulatorParams params = config.base;
    params.k = sample.k;
    params.lambda = sample.lambda;
    params.noise_sigma = sample.sigma;
    std::vector<SimulatedEvent> simulated(events);
    for (size_t e = 0; e < events; ++e) {
      simulated[e].horizon = surprise_sets[e].EndTime();
      for (size_t r = 0; r < runs; ++r) {
        absl::StatusOr<OnsetResult> res =
            Integrate(params, surprise_sets[e],
                      DeriveSeed(proposal_seed, e * runs + r), baselines[e]);
        simulated[e].onsets.push_back(res->onset_t);
      }
    }
    sample.distance =
        *OnsetDistance(simulated, observed_onsets, config.distance_kind);
  };

  const size_t workers =
      std::clamp<size_t>(static_cast<size_t>(std::max(config.threads, 1)), 1,
                         n);
  if (workers == 1) {
    for (size_t i = 0; i < n; ++i) evaluate(i);
  } else {
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (size_t i = w; i < n; i += workers) evaluate(i);
      });
    }
    for (auto& th : pool) th.join();
  }

  double epsilon = config.epsilon;
  if (config.accept_quantile) {
    std::vector<double> d;
    d.reserve(n);
    for (const AbcSample& s : proposals) d.push_back(s.distance);
    epsilon = Quantile(std::move(d), *config.accept_quantile);
  }
  return AcceptWithin(std::move(proposals), epsilon);
}

absl::StatusOr<AbcConfig> ParseAbcConfigJson(const nlohmann::json& j) {
  AbcConfig c;
  try {
    absl::StatusOr<UniformRange> k = ParseRange(j, "k", c.k);
    absl::StatusOr<UniformRange> lambda = ParseRange(j, "lambda", c.lambda);
    absl::StatusOr<UniformRange> sigma = ParseRange(j, "sigma", c.sigma);
    if (!k.ok()) return k.status();
    if (!lambda.ok()) return lambda.status();
    if (!sigma.ok()) return sigma.status();
    c.k = *k;
    c.lambda = *lambda;
    c.sigma = *sigma;
    c.epsilon = j.value("epsilon", c.epsilon);
    if (j.contains("accept_quantile") && !j.at("accept_quantile").is_null()) {
      c.accept_quantile = j.at("accept_quantile").get<double>();
    }
    c.n_proposals = j.value("n_proposals", c.n_proposals);
    c.mc_runs_per_proposal =
        j.value("mc_runs_per_proposal", c.mc_runs_per_proposal);
    c.seed = j.value("seed", c.seed);
    c.threads = j.value("threads", c.threads);
    if (j.contains("distance_kind")) {
      absl::StatusOr<DistanceKind> kind =
          ParseDistanceKind(j.at("distance_kind").get<std::string>());
      if (!kind.ok()) return kind.status();
      c.distance_kind = *kind;
    }
    if (j.contains("accumulator")) {
      absl::StatusOr<AccumulatorParams> base =
          ParseAccumulatorParamsJson(j.at("accumulator"));
      if (!base.ok()) return base.status();
      c.base = *base;
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed ABC config: ", e.what()));
  }
  if (absl::Status s = ValidateAbcConfig(c); !s.ok()) return s;
  return c;
}

nlohmann::json AbcConfigJson(const AbcConfig& config) {
  nlohmann::json j = {
      {"k", {config.k.lo, config.k.hi}},
      {"lambda", {config.lambda.lo, config.lambda.hi}},
      {"sigma", {config.sigma.lo, config.sigma.hi}},
      {"epsilon", config.epsilon},
      {"n_proposals", config.n_proposals},
      {"distance_kind", std::string(DistanceKindName(config.distance_kind))},
      {"mc_runs_per_proposal", config.mc_runs_per_proposal},
      {"seed", config.seed},
      {"accumulator", AccumulatorParamsJson(config.base)}};
  j["accept_quantile"] = config.accept_quantile
                             ? nlohmann::json(*config.accept_quantile)
                             : nlohmann::json(nullptr);
  return j;
}

std::string FormatPosteriorCsv(const AbcPosterior& posterior) {
  std::string out = "k,lambda,sigma,distance\n";
  for (const AbcSample& s : posterior.accepted) {
    absl::StrAppend(&out, FormatDouble(s.k), ",", FormatDouble(s.lambda), ",",
                    FormatDouble(s.sigma), ",", FormatDouble(s.distance),
                    "\n");
  }
  return out;
}

nlohmann::json AbcSummaryJson(const AbcPosterior& posterior,
                              const AbcConfig& config) {
  auto param = [](const ParamSummary& p, const UniformRange& prior) {
    return nlohmann::json{{"mean", p.mean},
                          {"sd", p.sd},
                          {"prior_mean", prior.Mid()},
                          {"prior_sd", prior.Sd()}};
  };
  nlohmann::json j = {
      {"n_proposals", posterior.proposals.size()},
      {"n_accepted", posterior.accepted.size()},
      {"acceptance_rate", posterior.acceptance_rate},
      {"epsilon", posterior.epsilon},
      {"k", param(posterior.k, config.k)},
      {"lambda", param(posterior.lambda, config.lambda)},
      {"sigma", param(posterior.sigma, config.sigma)}};
  if (posterior.accepted.empty()) {
    j["status"] = "NoAcceptances";
  } else {
    j["status"] = "ok";
  }
  return j;
}

}  // namespace response_timing
