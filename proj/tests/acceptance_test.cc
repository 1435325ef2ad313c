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

// Acceptance gate: prints one PASS/FAIL line per criterion and exits
// non-zero if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "absl/strings/str_format.h"
#include "response_timing/abc_fit.h"
#include "response_timing/accumulator.h"
#include "response_timing/annotator.h"
#include "response_timing/belief.h"
#include "response_timing/csv.h"
#include "response_timing/looming.h"
#include "response_timing/pipeline.h"
#include "response_timing/response_model.h"
#include "response_timing/rng.h"
#include "response_timing/scenario_sim.h"
#include "response_timing/table1.h"

namespace response_timing {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       since)
      .count();
}

Outcome Table1Ruts() {
  const auto start = std::chrono::steady_clock::now();
  const double published[] = {2.6, 3.6, 2.9, 0.7};
  bool ok = true;
  std::string detail = "RUT";
  size_t i = 0;
  for (const Table1Study& study : Table1Studies()) {
    absl::StatusOr<double> rut = RecomputeStudyRut(study, 0.001);
    if (!rut.ok()) return {false, rut.status().ToString()};
    ok &= std::abs(*rut - published[i]) <= 0.3;
    detail += absl::StrFormat(" %.3f", *rut);
    ++i;
  }
  const double elapsed = Seconds(start);
  ok &= elapsed < 5.0;
  return {ok, absl::StrFormat("%s (tol 0.3), %.2f s", detail, elapsed)};
}

Outcome PublishedPredictions() {
  bool ok = true;
  std::string detail = "pred";
  for (const Table1Study& study : Table1Studies()) {
    const double p = *Predict(LinearRspModel::Published(), study.rut);
    ok &= std::abs(p - study.predicted_mean_rsp_t) <= 0.05;
    detail += absl::StrFormat(" %.3f/%.2f", p, study.predicted_mean_rsp_t);
  }
  return {ok, detail};
}

Outcome PrintedColumnsRSquared() {
  std::vector<double> observed, predicted;
  for (const Table1Study& s : Table1Studies()) {
    observed.push_back(s.observed_mean_rsp_t);
    predicted.push_back(s.predicted_mean_rsp_t);
  }
  const double r2 = *RSquared(observed, predicted);
  absl::StatusOr<Table1Report> report = ComputeTable1Report(0.001);
  if (!report.ok()) return {false, report.status().ToString()};
  const bool documented =
      FormatTable1Report(*report).find("stated 0.62") != std::string::npos;
  return {std::abs(r2 - 0.661) <= 0.005 && documented,
          absl::StrFormat("R^2 = %.4f, stated %.2f documented: %s", r2,
                          report->r_squared_stated,
                          documented ? "yes" : "no")};
}

Outcome OlsRecovery() {
  double worst_k = 0.0, worst_m = 0.0;
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng(DeriveSeed(4, seed));
    std::uniform_real_distribution<double> rut(0.0, 5.0);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<RutRspPoint> pts;
    for (int i = 0; i < 200; ++i) {
      const double x = rut(rng);
      pts.push_back({x, 0.63 + 0.47 * x + noise(rng)});
    }
    absl::StatusOr<LinearRspModel> m = FitOls(pts);
    if (!m.ok()) return {false, m.status().ToString()};
    worst_k = std::max(worst_k, std::abs(m->k - 0.47));
    worst_m = std::max(worst_m, std::abs(m->m - 0.63));
  }
  return {worst_k <= 0.02 && worst_m <= 0.03,
          absl::StrFormat("max |dk| = %.4f, max |dm| = %.4f over 20 seeds",
                          worst_k, worst_m)};
}

SurpriseSeries ConstantSeries(double value, double span) {
  SurpriseSeries s;
  s.dt = 0.01;
  s.s.assign(static_cast<size_t>(std::round(span / s.dt)) + 1, value);
  return s;
}

Outcome AccumulatorFirstPassage() {
  AccumulatorParams p;
  p.dt = 0.001;
  double worst = 0.0;
  bool ok = true;
  for (double k : {0.5, 1.0, 2.0}) {
    for (double level : {0.5, 1.0}) {
      p.k = k;
      p.lambda = 0.0;
      std::optional<double> t =
          Integrate(p, ConstantSeries(level, 10.0), 0, 0.0)->onset_t;
      if (!t) return {false, "perfect integrator never fired"};
      worst = std::max(worst, std::abs(*t - p.threshold / (k * level)));
    }
  }
  ok &= worst <= p.dt;
  p.k = 1.0;
  p.lambda = -1.0;
  const std::optional<double> leaky =
      Integrate(p, ConstantSeries(2.0, 3.0), 0, 0.0)->onset_t;
  const double leaky_err = leaky ? std::abs(*leaky - std::log(2.0)) : 1.0;
  ok &= leaky_err <= p.dt;
  AccumulatorParams coarse = p;
  coarse.dt = 0.002;
  const double halving =
      std::abs(*Integrate(coarse, ConstantSeries(2.0, 3.0), 0, 0.0)->onset_t -
               leaky.value_or(0.0));
  ok &= halving < p.dt;
  return {ok, absl::StrFormat("T/(k s) err %.2e, ln 2 err %.2e, halving %.2e",
                              worst, leaky_err, halving)};
}

Outcome SurprisalAnalytics() {
  const GaussianMixture n01 = GaussianMixture::Single(0, 1);
  const double mode = Surprisal(n01, 0.0);
  const double kl1 =
      KlSurprise(n01, GaussianMixture::Single(1, 1))->value;
  const double kl2 =
      KlSurprise(n01, GaussianMixture::Single(0, 2))->value;
  const GaussianMixture mix =
      *GaussianMixture::Create({{0.3, -2, 0.5}, {0.5, 1, 1}, {0.2, 4, 2}});
  const double lo = -2 - 10 * 0.5, hi = 4 + 10 * 2;
  const int n = 40000;
  const double h = (hi - lo) / n;
  double integral = mix.Pdf(lo) + mix.Pdf(hi);
  for (int i = 1; i < n; ++i) {
    integral += (i % 2 ? 4.0 : 2.0) * mix.Pdf(lo + i * h);
  }
  integral *= h / 3.0;
  const bool ok = std::abs(mode - 0.91894) <= 1e-5 &&
                  std::abs(kl1 - 0.5) <= 1e-6 &&
                  std::abs(kl2 - (std::log(0.5) + 4.0 / 2.0 - 0.5)) <= 1e-6 &&
                  std::abs(kl2 - 0.80685) <= 5e-6 &&
                  std::abs(integral - 1.0) <= 1e-6;
  return {ok, absl::StrFormat("mode %.6f, KL %.7f / %.7f, integral %.9f",
                              mode, kl1, kl2, integral)};
}

Outcome SurpriseDrivenResponse() {
  CutInSpec spec;
  spec.lateral_speed = 2.0;
  spec.dt = 0.01;
  absl::StatusOr<KinematicTrace> trace = GenerateCutIn(spec);
  if (!trace.ok()) return {false, trace.status().ToString()};
  absl::StatusOr<Annotation> ann = Annotate(*trace, LoomingSignal{});
  if (!ann.ok()) return {false, ann.status().ToString()};
  absl::StatusOr<SurpriseSeries> s = ComputeSurpriseSeries(
      BeliefPrior::Lateral(), *trace, Observable::kLateralY);
  if (!s.ok()) return {false, s.status().ToString()};

  std::vector<double> pre;
  double peak = -1e300;
  bool monotone = true;
  for (size_t i = 0; i < s->size(); ++i) {
    const double t = s->TimeAt(i);
    if (t < spec.lateral_onset_t) {
      pre.push_back(s->s[i]);
    } else {
      peak = std::max(peak, s->s[i]);
      if (i > 0 && s->TimeAt(i - 1) >= spec.lateral_onset_t - 1e-9 &&
          t <= ann->t2 + 1e-9) {
        monotone &= s->s[i] > s->s[i - 1];
      }
    }
  }
  double mean = 0.0;
  for (double v : pre) mean += v;
  mean /= static_cast<double>(pre.size());
  double var = 0.0;
  for (double v : pre) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / static_cast<double>(pre.size()));
  const bool flat = sd < 0.05 * (peak - mean);

  const double baseline = DefaultBaseline(*s);
  std::optional<std::string> fired;
  for (double k : {0.01, 0.05, 0.1, 0.5, 1.0}) {
    for (double lambda : {0.0, -0.5, -1.0}) {
      AccumulatorParams p;
      p.k = k;
      p.lambda = lambda;
      p.dt = 0.001;
      std::optional<double> onset = Integrate(p, *s, 0, baseline)->onset_t;
      if (onset && *onset >= ann->t1 && *onset <= ann->t2 + 3.0 && !fired) {
        fired = absl::StrFormat("k=%.2f lambda=%.1f onset %.3f", k, lambda,
                                *onset);
      }
    }
  }
  return {flat && monotone && fired.has_value(),
          absl::StrFormat("pre sd %.2e vs peak rise %.2f, monotone to T2=%.3f: "
                          "%s, %s",
                          sd, peak - mean, ann->t2, monotone ? "yes" : "no",
                          fired.value_or("no parameter set fired"))};
}

Outcome AbcRecovery() {
  const double truth_k = 1.2, truth_lambda = -0.3, truth_sigma = 0.1;
  constexpr int kEvents = 20;
  std::vector<SurpriseSeries> series;
  std::vector<double> baselines(kEvents, 0.0);
  for (int e = 0; e < kEvents; ++e) {
    const double level = 0.35 + 2.0 * e / (kEvents - 1);
    SurpriseSeries s;
    s.dt = 0.01;
    for (int i = 0; i <= 600; ++i) s.s.push_back(i < 100 ? 0.0 : level);
    series.push_back(std::move(s));
  }

  AbcConfig config;
  config.n_proposals = 10000;
  config.mc_runs_per_proposal = 10;
  config.accept_quantile = 0.01;
  config.seed = 2024;
  config.threads =
      static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  config.base.dt = 0.01;

  AccumulatorParams truth = config.base;
  truth.k = truth_k;
  truth.lambda = truth_lambda;
  truth.noise_sigma = truth_sigma;
  std::vector<double> observed;
  for (int e = 0; e < kEvents; ++e) {
    absl::StatusOr<MonteCarloResult> mc = MonteCarloOnsets(
        truth, series[e], 0.0, 200, DeriveSeed(99, e), config.threads);
    if (!mc.ok()) return {false, mc.status().ToString()};
    double sum = 0.0;
    for (const auto& o : mc->onsets) sum += o.value_or(series[e].EndTime());
    observed.push_back(sum / static_cast<double>(mc->onsets.size()));
  }

  const auto start = std::chrono::steady_clock::now();
  absl::StatusOr<AbcPosterior> post =
      RejectionAbc(config, series, observed, baselines);
  const double elapsed = Seconds(start);
  if (!post.ok()) return {false, post.status().ToString()};

  auto near = [](const ParamSummary& p, const UniformRange& prior,
                 double truth_value) {
    return std::abs(p.mean - truth_value) <= 0.5 * prior.Width() &&
           p.sd < prior.Sd();
  };
  const bool ok = !post->accepted.empty() &&
                  near(post->k, config.k, truth_k) &&
                  near(post->lambda, config.lambda, truth_lambda) &&
                  near(post->sigma, config.sigma, truth_sigma) &&
                  elapsed < 120.0;
  return {ok,
          absl::StrFormat(
              "%zu accepted; k %.3f (sd %.3f/%.3f), lambda %.3f (sd "
              "%.3f/%.3f), sigma %.3f (sd %.3f/%.3f); %.1f s",
              post->accepted.size(), post->k.mean, post->k.sd, config.k.Sd(),
              post->lambda.mean, post->lambda.sd, config.lambda.Sd(),
              post->sigma.mean, post->sigma.sd, config.sigma.Sd(), elapsed)};
}

Outcome AnnotatorInvariants() {
  int scenarios = 0, ordered = 0;
  auto check = [&](const KinematicTrace& trace) {
    absl::StatusOr<LoomingSignal> loom = ComputeLooming(trace);
    absl::StatusOr<Annotation> a =
        Annotate(trace, loom.ok() ? *loom : LoomingSignal{});
    if (!a.ok()) return;
    ++scenarios;
    if (a->t1 <= a->t2) ++ordered;
  };
  for (auto v : {RearEndVariant::kS1, RearEndVariant::kS2,
                 RearEndVariant::kS3}) {
    check(*GenerateRearEnd(RearEndSpec{}, v));
  }
  for (double k : {0.0, 0.002}) {
    CutInSpec spec;
    spec.road_curvature = k;
    check(*GenerateCutIn(spec));
  }
  for (auto profile : {CrossingProfile::kNone, CrossingProfile::kStopThenGo}) {
    CrossingSpec spec;
    spec.pov_decel_profile = profile;
    spec.duration = 15.0;
    check(*GenerateCrossing(spec));
  }

  Rng rng(DeriveSeed(9, 0));
  std::uniform_real_distribution<double> speed(10.0, 30.0), gap(1.0, 3.0),
      decel(3.0, 8.0);
  int monotone_violations = 0, compared = 0;
  for (int trial = 0; trial < 100; ++trial) {
    RearEndSpec lo;
    lo.sv_speed = speed(rng);
    lo.lv_speed = std::min(lo.sv_speed, speed(rng));
    lo.initial_time_gap = gap(rng);
    lo.lv_decel = decel(rng);
    lo.dt = 0.01;
    RearEndSpec hi = lo;
    hi.lv_decel = lo.lv_decel + 0.5 + decel(rng) / 4.0;
    KinematicTrace tl = *GenerateRearEnd(lo, RearEndVariant::kS1);
    KinematicTrace th = *GenerateRearEnd(hi, RearEndVariant::kS1);
    check(tl);
    check(th);
    LoomingSignal ll = *ComputeLooming(tl);
    LoomingSignal lh = *ComputeLooming(th);
    absl::StatusOr<Annotation> al = Annotate(tl, ll);
    absl::StatusOr<Annotation> ah = Annotate(th, lh);
    if (!al.ok() || !ah.ok()) {
      ++monotone_violations;
      continue;
    }
    if (*std::max_element(ll.theta_dot.begin(), ll.theta_dot.end()) < 0.05) {
      continue;
    }
    ++compared;
    if (ah->rut > al->rut + lo.dt) ++monotone_violations;
  }

  std::vector<double> theta, rate;
  for (double t = 0.0; t <= 20.0 + 1e-9; t += 0.01) {
    const double u = t - 5.0;
    rate.push_back(0.01 + 0.002 * u + 0.003 * u * u);
    theta.push_back(0.0);
  }
  absl::StatusOr<std::optional<double>> t2 =
      ExtrapolateT2(LoomingFromTheta(theta, 0.0, 0.01, rate), 5.0, 6.0);
  const double err = t2.ok() && t2->has_value()
                         ? std::abs(**t2 - (5.0 + 0.02 / 0.006))
                         : 1.0;

  return {ordered == scenarios && monotone_violations == 0 && err <= 1e-6 &&
              compared >= 50,
          absl::StrFormat("t1<=t2 %d/%d, decel property %d violations over "
                          "%d compared pairs, extrapolation err %.2e",
                          ordered, scenarios, monotone_violations, compared,
                          err)};
}

std::map<std::string, std::string> Snapshot(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (entry.is_regular_file()) {
      out[fs::relative(entry.path(), root).string()] = *ReadFile(entry.path());
    }
  }
  return out;
}

Outcome PipelineDeterminism() {
  const fs::path base = fs::temp_directory_path() / "rt_acceptance";
  fs::remove_all(base);
  size_t files = 0;
  for (const char* dir : {"data/specs/table1", "data/specs/examples"}) {
    PipelineConfig config;
    config.accumulator.noise_sigma = 0.1;
    const fs::path a = base / "a", b = base / "b";
    fs::remove_all(a);
    fs::remove_all(b);
    absl::StatusOr<RunManifest> ra = RunPipeline(dir, a, 31, config);
    absl::StatusOr<RunManifest> rb = RunPipeline(dir, b, 31, config);
    if (!ra.ok()) return {false, ra.status().ToString()};
    if (!rb.ok()) return {false, rb.status().ToString()};
    const auto sa = Snapshot(a);
    if (sa != Snapshot(b)) return {false, std::string(dir) + " differs"};
    files += sa.size();
  }
  return {true, absl::StrFormat("%zu files byte-identical", files)};
}

}  // namespace
}  // namespace response_timing

int main() {
  using response_timing::Outcome;
  const std::vector<std::pair<const char*, std::function<Outcome()>>>
      criteria = {
          {"Table 1 RUT reproduction", response_timing::Table1Ruts},
          {"Linear model predictions", response_timing::PublishedPredictions},
          {"R^2 on printed columns", response_timing::PrintedColumnsRSquared},
          {"OLS recovery", response_timing::OlsRecovery},
          {"Accumulator first passage",
           response_timing::AccumulatorFirstPassage},
          {"Surprisal analytics", response_timing::SurprisalAnalytics},
          {"Surprise-driven response", response_timing::SurpriseDrivenResponse},
          {"ABC recovery", response_timing::AbcRecovery},
          {"Annotator invariants", response_timing::AnnotatorInvariants},
          {"Pipeline determinism", response_timing::PipelineDeterminism},
      };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const Outcome o = criteria[i].second();
    std::printf("Criterion %zu %s: %s (%s)\n", i + 1, criteria[i].first,
                o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
