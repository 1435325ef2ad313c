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

#include "response_timing/belief.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "absl/strings/str_cat.h"
#include "response_timing/csv.h"
#include "response_timing/looming.h"
#include "response_timing/rng.h"

namespace response_timing {
namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double NormalLogPdf(double x, double mean, double std) {
  const double z = (x - mean) / std;
  return -0.5 * z * z - std::log(std) - kLogSqrt2Pi;
}

// Uniformly sampled observable with its rate of change.
struct ObservableTrack {
  double t0 = 0.0;
  double dt = 0.0;
  std::vector<double> value;
  std::vector<double> rate;

  double EndTime() const {
    return t0 + static_cast<double>(value.size() - 1) * dt;
  }
};

std::vector<double> CentralDifference(const std::vector<double>& v,
                                      double dt) {
  const size_t n = v.size();
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  out[0] = (v[1] - v[0]) / dt;
  out[n - 1] = (v[n - 1] - v[n - 2]) / dt;
  for (size_t i = 1; i + 1 < n; ++i) out[i] = (v[i + 1] - v[i - 1]) / (2 * dt);
  return out;
}

absl::StatusOr<ObservableTrack> BuildTrack(const KinematicTrace& trace,
                                           Observable observable) {
  ObservableTrack track;
  track.t0 = trace.t0;
  track.dt = trace.dt;
  if (observable == Observable::kLateralY) {
    if (trace.size() < 2) {
      return absl::InvalidArgumentError(
          "ObservableUnavailable: trace too short");
    }
    track.value = PovLaneLateral(trace);
  } else {
    absl::StatusOr<LoomingSignal> looming = ComputeLooming(trace);
    if (!looming.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "ObservableUnavailable: theta_dot: ", looming.status().message()));
    }
    track.value = looming->theta_dot;
  }
  track.rate = CentralDifference(track.value, track.dt);
  return track;
}

absl::StatusOr<GaussianMixture> PredictFromTrack(const BeliefPrior& prior,
                                                 const ObservableTrack& track,
                                                 double t) {
  const double eps = 1e-9 * track.dt;
  const double from = t - prior.horizon;
  if (from < track.t0 - eps || t > track.EndTime() + eps) {
    return absl::OutOfRangeError(absl::StrCat(
        "OutOfSpan: prediction for t = ", t, " needs state at ", from,
        " within [", track.t0, ", ", track.EndTime(), "]"));
  }
  const double std = prior.PredictiveStd();
  switch (prior.kind) {
    case PriorKind::kConstantVelocityLateral: {
      const double y = SampleAt(track.value, track.t0, track.dt, from);
      const double vy = SampleAt(track.rate, track.t0, track.dt, from);
      return GaussianMixture::Single(y + vy * prior.horizon, std);
    }
    case PriorKind::kConstantLoomingRearEnd:
      return GaussianMixture::Single(
          SampleAt(track.value, track.t0, track.dt, from), std);
    case PriorKind::kCustom: {
      const TimedMixture* best = nullptr;
      for (const TimedMixture& m : prior.custom) {
        if (!best || std::abs(m.t - t) < std::abs(best->t - t)) best = &m;
      }
      if (!best || std::abs(best->t - t) > 0.5 * track.dt + eps) {
        return absl::OutOfRangeError(
            absl::StrCat("OutOfSpan: no custom prediction for t = ", t));
      }
      return best->mixture;
    }
  }
  return absl::InternalError("unhandled prior kind");
}

constexpr std::pair<PriorKind, std::string_view> kPriorNames[] = {
    {PriorKind::kConstantVelocityLateral, "constant_velocity_lateral"},
    {PriorKind::kConstantLoomingRearEnd, "constant_looming_rear_end"},
    {PriorKind::kCustom, "custom"}};

constexpr std::pair<Observable, std::string_view> kObservableNames[] = {
    {Observable::kLateralY, "lateral_y"},
    {Observable::kThetaDot, "theta_dot"}};

}  // namespace

absl::StatusOr<GaussianMixture> GaussianMixture::Create(
    std::vector<MixtureComponent> components) {
  if (components.empty()) {
    return absl::InvalidArgumentError("mixture needs at least one component");
  }
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0) || !(c.std > 0.0) || !std::isfinite(c.mean)) {
      return absl::InvalidArgumentError(
          "mixture weights and stds must be positive, means finite");
    }
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    return absl::InvalidArgumentError(
        absl::StrCat("mixture weights sum to ", total, ", not 1"));
  }
  return GaussianMixture(std::move(components));
}

GaussianMixture GaussianMixture::Single(double mean, double std) {
  return GaussianMixture({{1.0, mean, std}});
}

double GaussianMixture::Pdf(double x) const {
  double p = 0.0;
  for (const auto& c : components_) {
    p += c.weight * std::exp(NormalLogPdf(x, c.mean, c.std));
  }
  return p;
}

double GaussianMixture::LogPdf(double x) const {
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(components_.size());
  for (const auto& c : components_) {
    terms.push_back(std::log(c.weight) + NormalLogPdf(x, c.mean, c.std));
    max_term = std::max(max_term, terms.back());
  }
  double sum = 0.0;
  for (double t : terms) sum += std::exp(t - max_term);
  return max_term + std::log(sum);
}

double MixturePdf(const GaussianMixture& gm, double x) { return gm.Pdf(x); }

double Surprisal(const GaussianMixture& gm, double x, double floor) {
  return -std::log(std::max(gm.Pdf(x), floor));
}

absl::StatusOr<KlEstimate> KlSurprise(const GaussianMixture& prior,
                                      const GaussianMixture& posterior,
                                      int n_samples, uint64_t seed) {
  if (prior.is_single() && posterior.is_single()) {
    const MixtureComponent& q = prior.components().front();
    const MixtureComponent& p = posterior.components().front();
    const double dm = p.mean - q.mean;
    KlEstimate out;
    out.value = std::log(q.std / p.std) +
                (p.std * p.std + dm * dm) / (2.0 * q.std * q.std) - 0.5;
    out.closed_form = true;
    return out;
  }
  if (n_samples < 1000) {
    return absl::InvalidArgumentError("KL Monte Carlo needs >= 1000 samples");
  }
  Rng rng(DeriveSeed(seed, 0));
  std::vector<double> cumulative;
  double acc = 0.0;
  for (const auto& c : posterior.components()) {
    acc += c.weight;
    cumulative.push_back(acc);
  }
  std::uniform_real_distribution<double> pick(0.0, acc);
  std::normal_distribution<double> normal(0.0, 1.0);
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    const double u = pick(rng);
    const size_t k = std::min<size_t>(
        std::lower_bound(cumulative.begin(), cumulative.end(), u) -
            cumulative.begin(),
        cumulative.size() - 1);
    const MixtureComponent& c = posterior.components()[k];
    const double x = c.mean + c.std * normal(rng);
    const double d = posterior.LogPdf(x) - prior.LogPdf(x);
    sum += d;
    sum_sq += d * d;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sum_sq / n - mean * mean) * n / (n - 1));
  return KlEstimate{mean, std::sqrt(var / n), false};
}

std::string_view PriorKindName(PriorKind kind) {
  for (const auto& [k, name] : kPriorNames) {
    if (k == kind) return name;
  }
  return "";
}

std::string_view ObservableName(Observable observable) {
  for (const auto& [o, name] : kObservableNames) {
    if (o == observable) return name;
  }
  return "";
}

absl::StatusOr<Observable> ParseObservable(std::string_view name) {
  for (const auto& [o, n] : kObservableNames) {
    if (n == name) return o;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown observable '", std::string(name), "'"));
}

BeliefPrior BeliefPrior::Lateral() {
  BeliefPrior p;
  p.kind = PriorKind::kConstantVelocityLateral;
  p.sigma0 = 0.1;
  p.sigma1 = 0.2 * p.sigma0;
  return p;
}

BeliefPrior BeliefPrior::Looming() {
  BeliefPrior p;
  p.kind = PriorKind::kConstantLoomingRearEnd;
  p.sigma0 = 0.005;
  p.sigma1 = 0.2 * p.sigma0;
  return p;
}

absl::StatusOr<BeliefPrior> ParseBeliefPriorJson(const nlohmann::json& j) {
  BeliefPrior prior;
  try {
    const std::string kind =
        j.value("kind", std::string("constant_velocity_lateral"));
    bool found = false;
    for (const auto& [k, name] : kPriorNames) {
      if (name == kind) {
        prior = k == PriorKind::kConstantLoomingRearEnd
                    ? BeliefPrior::Looming()
                    : BeliefPrior::Lateral();
        prior.kind = k;
        found = true;
      }
    }
    if (!found) {
      return absl::InvalidArgumentError(
          absl::StrCat("unknown prior kind '", kind, "'"));
    }
    prior.horizon = j.value("horizon", prior.horizon);
    prior.sigma0 = j.value("sigma0", prior.sigma0);
    prior.sigma1 = j.value("sigma1", prior.sigma1);
    if (j.contains("mixture_file")) {
      absl::StatusOr<std::string> text =
          ReadFile(j.at("mixture_file").get<std::string>());
      if (!text.ok()) return text.status();
      absl::StatusOr<std::vector<TimedMixture>> seq =
          ParseMixtureSequenceCsv(*text);
      if (!seq.ok()) return seq.status();
      prior.custom = *std::move(seq);
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed prior JSON: ", e.what()));
  }
  if (!(prior.horizon > 0.0) || prior.sigma0 < 0.0 || prior.sigma1 < 0.0 ||
      !(prior.PredictiveStd() > 0.0)) {
    return absl::InvalidArgumentError(
        "prior needs horizon > 0, sigma0, sigma1 >= 0 and a positive std");
  }
  return prior;
}

nlohmann::json BeliefPriorJson(const BeliefPrior& prior) {
  return {{"kind", std::string(PriorKindName(prior.kind))},
          {"horizon", prior.horizon},
          {"sigma0", prior.sigma0},
          {"sigma1", prior.sigma1}};
}

absl::StatusOr<GaussianMixture> PredictPrior(const BeliefPrior& prior,
                                             const KinematicTrace& trace,
                                             double t) {
  const Observable observable = prior.kind == PriorKind::kConstantLoomingRearEnd
                                    ? Observable::kThetaDot
                                    : Observable::kLateralY;
  absl::StatusOr<ObservableTrack> track = BuildTrack(trace, observable);
  if (!track.ok()) return track.status();
  return PredictFromTrack(prior, *track, t);
}

absl::StatusOr<SurpriseSeries> ComputeSurpriseSeries(
    const BeliefPrior& prior, const KinematicTrace& trace,
    Observable observable) {
  if ((prior.kind == PriorKind::kConstantVelocityLateral &&
       observable != Observable::kLateralY) ||
      (prior.kind == PriorKind::kConstantLoomingRearEnd &&
       observable != Observable::kThetaDot)) {
    return absl::InvalidArgumentError(absl::StrCat(
        "ObservableUnavailable: prior ", std::string(PriorKindName(prior.kind)),
        " does not predict ", std::string(ObservableName(observable))));
  }
  absl::StatusOr<ObservableTrack> track = BuildTrack(trace, observable);
  if (!track.ok()) return track.status();
  const size_t first =
      static_cast<size_t>(std::ceil(prior.horizon / track->dt - 1e-9));
  if (first >= track->value.size()) {
    return absl::InvalidArgumentError(
        "ObservableUnavailable: trace span does not exceed the horizon");
  }
  SurpriseSeries out;
  out.dt = track->dt;
  out.t0 = track->t0 + static_cast<double>(first) * track->dt;
  for (size_t i = first; i < track->value.size(); ++i) {
    const double t = track->t0 + static_cast<double>(i) * track->dt;
    absl::StatusOr<GaussianMixture> gm = PredictFromTrack(prior, *track, t);
    if (!gm.ok()) return gm.status();
    out.s.push_back(Surprisal(*gm, track->value[i]));
  }
  return out;
}

std::string FormatSurpriseCsv(const SurpriseSeries& series) {
  std::string out = "t,s\n";
  for (size_t i = 0; i < series.size(); ++i) {
    absl::StrAppend(&out, FormatDouble(series.TimeAt(i)), ",",
                    FormatDouble(series.s[i]), "\n");
  }
  return out;
}

absl::StatusOr<SurpriseSeries> ParseSurpriseCsv(std::string_view text) {
  absl::StatusOr<CsvTable> table = ParseCsv(text);
  if (!table.ok()) return table.status();
  const auto t_col = table->Column("t");
  const auto s_col = table->Column("s");
  if (!t_col || !s_col) {
    return absl::InvalidArgumentError("MissingColumn: surprise CSV needs t, s");
  }
  std::vector<double> times;
  SurpriseSeries out;
  for (size_t r = 0; r < table->rows.size(); ++r) {
    const auto& row = table->rows[r];
    auto t = *t_col < row.size() ? ParseDouble(row[*t_col]) : std::nullopt;
    auto s = *s_col < row.size() ? ParseDouble(row[*s_col]) : std::nullopt;
    if (!t || !s || !std::isfinite(*s)) {
      return absl::InvalidArgumentError(
          absl::StrCat("NaNValue: surprise row ", r));
    }
    if (!times.empty() && !(*t > times.back())) {
      return absl::InvalidArgumentError(
          absl::StrCat("NonMonotonicTime: surprise row ", r));
    }
    times.push_back(*t);
    out.s.push_back(*s);
  }
  if (times.empty()) return absl::InvalidArgumentError("empty surprise CSV");
  out.t0 = times.front();
  out.dt = times.size() > 1 ? (times.back() - times.front()) /
                                  static_cast<double>(times.size() - 1)
                            : kDefaultTraceDt;
  return out;
}

absl::StatusOr<std::vector<TimedMixture>> ParseMixtureSequenceCsv(
    std::string_view text) {
  absl::StatusOr<CsvTable> table = ParseCsv(text);
  if (!table.ok()) return table.status();
  if (table->header.empty() || table->header.front() != "t" ||
      (table->header.size() - 1) % 3 != 0) {
    return absl::InvalidArgumentError(
        "mixture CSV header must be t followed by weight,mean,std groups");
  }
  std::vector<TimedMixture> out;
  for (size_t r = 0; r < table->rows.size(); ++r) {
    const auto& row = table->rows[r];
    std::optional<double> t = row.empty() ? std::nullopt : ParseDouble(row[0]);
    if (!t) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad time in mixture row ", r));
    }
    std::vector<MixtureComponent> comps;
    for (size_t c = 1; c + 2 < row.size() + 2 && c < row.size(); c += 3) {
      if (row[c].empty()) break;
      auto w = ParseDouble(row[c]);
      auto m = c + 1 < row.size() ? ParseDouble(row[c + 1]) : std::nullopt;
      auto s = c + 2 < row.size() ? ParseDouble(row[c + 2]) : std::nullopt;
      if (!w || !m || !s) {
        return absl::InvalidArgumentError(
            absl::StrCat("incomplete component in mixture row ", r));
      }
      comps.push_back({*w, *m, *s});
    }
    absl::StatusOr<GaussianMixture> gm = GaussianMixture::Create(comps);
    if (!gm.ok()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "mixture row ", r, ": ", gm.status().message()));
    }
    out.push_back({*t, *std::move(gm)});
  }
  return out;
}

std::string FormatMixtureSequenceCsv(const std::vector<TimedMixture>& seq) {
  size_t groups = 0;
  for (const auto& m : seq) {
    groups = std::max(groups, m.mixture.components().size());
  }
  std::string out = "t";
  for (size_t g = 1; g <= groups; ++g) {
    absl::StrAppend(&out, ",weight_", g, ",mean_", g, ",std_", g);
  }
  out += "\n";
  for (const auto& m : seq) {
    out += FormatDouble(m.t);
    const auto& comps = m.mixture.components();
    for (size_t g = 0; g < groups; ++g) {
      if (g < comps.size()) {
        absl::StrAppend(&out, ",", FormatDouble(comps[g].weight), ",",
                        FormatDouble(comps[g].mean), ",",
                        FormatDouble(comps[g].std));
      } else {
        out += ",,,";
      }
    }
    out += "\n";
  }
  return out;
}

}  // namespace response_timing
