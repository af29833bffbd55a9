// Copyright 2026 The mrtf Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dense_oracle.h"
#include "mrtf/cli.h"
#include "mrtf/evaluation.h"
#include "mrtf/objective.h"
#include "mrtf/optimizer.h"
#include "mrtf/synthgen.h"

namespace mrtf {
namespace {

using Clock = std::chrono::steady_clock;
using testing::Instance;
using testing::MaxRelativeError;
using testing::RandomInstance;

double Since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

int failures = 0;

void Report(int id, bool pass, const std::string& what,
            const std::string& detail) {
  std::printf("%s criterion %d: %s [%s]\n", pass ? "PASS" : "FAIL", id,
              what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

std::string Fmt(const char* fmt, double a, double b = 0, double c = 0,
                double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c, d);
  return buf;
}

constexpr LossKind kLosses[] = {LossKind::kQuadratic, LossKind::kSmoothHinge,
                                LossKind::kLogistic};
constexpr FactorMode kModes[] = {FactorMode::kJoint, FactorMode::kPerSlice};

bool NearKink(const Instance& inst, double gap) {
  for (const Entry& e : inst.data.Entries()) {
    if (inst.losses.loss(e.slice) != LossKind::kSmoothHinge) continue;
    const double z = e.value * PredictScore(inst.model, e.row, e.col, e.slice);
    if (std::abs(z) < gap || std::abs(z - 1.0) < gap) return true;
  }
  return false;
}

void GradientSuite() {
  const auto start = Clock::now();
  const double h = 1e-5;
  const int per_combo = 50;
  double worst = 0.0;
  int instances = 0, skipped = 0;
  for (LossKind loss : kLosses) {
    for (FactorMode mode : kModes) {
      int done = 0;
      for (std::uint64_t seed = 1; done < per_combo; ++seed) {
        Instance inst = RandomInstance(8, 1, 1, 3, mode, loss, seed * 7919);
        if (NearKink(inst, 1e-3)) {
          ++skipped;
          continue;
        }
        ++done;
        const Eigen::VectorXd theta = FlattenParameters(inst.model);
        const Eigen::VectorXd grad = FlattenGradient(
            EvaluateObjective(inst.model, inst.data, inst.losses, inst.lambda));
        Eigen::VectorXd fd(theta.size());
        FactorModel probe = inst.model;
        for (Eigen::Index c = 0; c < theta.size(); ++c) {
          Eigen::VectorXd t = theta;
          t[c] += h;
          UnflattenParameters(t, &probe);
          const double up =
              EvaluateObjective(probe, inst.data, inst.losses, inst.lambda)
                  .value;
          t[c] = theta[c] - h;
          UnflattenParameters(t, &probe);
          const double down =
              EvaluateObjective(probe, inst.data, inst.losses, inst.lambda)
                  .value;
          fd[c] = (up - down) / (2 * h);
        }
        worst = std::max(worst, MaxRelativeError(grad, fd));
        ++instances;
      }
    }
  }
  const double secs = Since(start);
  Report(1, worst < 1e-6 && secs < 30,
         "analytic gradients match central differences",
         Fmt("%.0f instances, %.0f skipped near hinge kinks, max rel err "
             "%.2e, %.1fs",
             instances, skipped, worst, secs));
}

void OracleSuite() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const LossKind loss = kLosses[seed % 3];
    const FactorMode mode = kModes[(seed / 3) % 2];
    const int n = 2 + static_cast<int>(seed % 19);
    const Instance inst =
        RandomInstance(n, 2, 1, 1 + seed % 5, mode, loss, seed * 104729,
                       0.2 + 0.15 * (seed % 5));
    const ObjectiveState got =
        EvaluateObjective(inst.model, inst.data, inst.losses, inst.lambda);
    const ObjectiveState want = testing::DenseOracleEvaluate(
        inst.model, inst.data, inst.losses, inst.lambda);
    Eigen::VectorXd a(1 + NumParameters(inst.model)), b(a.size());
    a << got.value, FlattenGradient(got);
    b << want.value, FlattenGradient(want);
    worst = std::max(worst, MaxRelativeError(a, b));
  }
  const double secs = Since(start);
  Report(2, worst < 1e-12 && secs < 30, "sparse objective equals dense oracle",
         Fmt("100 instances, max rel err %.2e, %.2fs", worst, secs));
}

// Grid search on train/validation, refit on their union, score on test.
EvalReport TuneAndTest(const SplitResult& parts, const LossAssignment& losses,
                       const FitConfig& config, double* best_lambda) {
  const GridSearchResult grid =
      GridSearch(parts.train, parts.validation, losses, config);
  FitConfig final_config = config;
  final_config.lambda = grid.best_lambda;
  if (best_lambda) *best_lambda = grid.best_lambda;
  const FitResult fit =
      Fit(Merge(parts.train, parts.validation), losses, final_config);
  return EvaluateModel(fit.model, parts.test);
}

SplitResult SynthSplit(const SynthConfig& synth, double train_fraction,
                       std::uint64_t seed) {
  SplitSpec spec;
  spec.train_fraction = train_fraction;
  spec.seed = seed;
  return Split(GenerateSynthetic(synth).full, spec);
}

double MeanAuprc(const EvalReport& r) { return SelectionScore(r); }

void WeightingLift() {
  const auto start = Clock::now();
  double sum_hinge = 0, sum_quad = 0, sum_unw = 0;
  int hinge_beats_quad = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig synth;
    synth.num_objects = 200;
    synth.num_binary_slices = 3;
    synth.rank = 10;
    synth.seed = seed;
    const SplitResult parts = SynthSplit(synth, 0.2, seed);
    const auto& types = parts.train.slice_types();
    FitConfig config;
    config.rank = 10;
    config.seed = seed;

    const double hinge = MeanAuprc(TuneAndTest(
        parts, LossAssignment::ForSlices(types, LossKind::kSmoothHinge),
        config, nullptr));
    const double quad = MeanAuprc(TuneAndTest(
        parts, LossAssignment::ForSlices(types, LossKind::kQuadratic), config,
        nullptr));
    FitConfig unweighted = config;
    unweighted.weighted = false;
    const double unw = MeanAuprc(TuneAndTest(
        parts, LossAssignment::ForSlices(types, LossKind::kQuadratic),
        unweighted, nullptr));
    sum_hinge += hinge;
    sum_quad += quad;
    sum_unw += unw;
    hinge_beats_quad += hinge > quad;
    per_seed += Fmt(" s%.0f:%.3f/%.3f/%.3f", seed, hinge, quad, unw);
  }
  const double lift = (sum_hinge - sum_unw) / 5;
  const double secs = Since(start);
  Report(3, lift >= 0.15 && hinge_beats_quad >= 4 && secs < 600,
         "weighted hinge beats unweighted baseline and weighted quadratic",
         Fmt("mean AUPRC hinge %.3f, quadratic %.3f, unweighted %.3f, lift "
             "%.3f",
             sum_hinge / 5, sum_quad / 5, sum_unw / 5, lift) +
             Fmt(", hinge>quadratic in %.0f/5, %.0fs;", hinge_beats_quad,
                 secs) +
             per_seed);
}

void MixedRecovery() {
  const auto start = Clock::now();
  int good = 0;
  std::string per_seed;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    SynthConfig synth;
    synth.num_objects = 200;
    synth.num_binary_slices = 1;
    synth.num_real_slices = 1;
    synth.rank = 10;
    synth.noise_std = 0.1;
    synth.seed = seed;
    const SplitResult parts = SynthSplit(synth, 0.25, seed);
    FitConfig config;
    config.rank = 10;
    config.seed = seed;
    const EvalReport r = TuneAndTest(
        parts,
        LossAssignment::ForSlices(parts.train.slice_types(),
                                  LossKind::kSmoothHinge),
        config, nullptr);
    const double mse = r.slices[1].value.value_or(INFINITY);
    good += mse <= 0.2;
    per_seed += Fmt(" %.4f", mse);
  }
  const double secs = Since(start);
  Report(4, good >= 4 && secs < 600, "real-slice test MSE <= 0.2 on mixed data",
         Fmt("%.0f/5 seeds within bound, %.0fs; MSE:", good, secs) + per_seed);
}

void SparseSpeedup() {
  const auto start = Clock::now();
  SynthConfig synth;
  synth.num_objects = 2000;
  synth.num_binary_slices = 3;
  synth.rank = 10;
  ObservedTensor train;
  {
    SplitSpec spec;
    spec.train_fraction = 0.1;
    spec.validation_fraction_of_train = 0.0;
    train = Split(GenerateSynthetic(synth).full, spec).train;
  }
  const ObservedTensor dense = MakeUnweightedBaseline(train);
  const FactorModel model = RandomInit(train, 10, FactorMode::kJoint, 42);
  const double weighted = TimeObjectiveEvaluation(
      model, train,
      LossAssignment::ForSlices(train.slice_types(), LossKind::kSmoothHinge),
      1.0, 10);
  const double unweighted = TimeObjectiveEvaluation(
      model, dense,
      LossAssignment::ForSlices(dense.slice_types(), LossKind::kQuadratic),
      1.0, 10);
  const double speedup = unweighted / weighted;
  const double secs = Since(start);
  Report(5, speedup >= 3.0 && secs < 300,
         "weighted objective+gradient >= 3x faster than unweighted at n=2000",
         Fmt("weighted %.4fs, unweighted %.4fs per evaluation, speedup "
             "%.2fx, %.0fs",
             weighted, unweighted, speedup, secs));
}

void RankStability() {
  const auto start = Clock::now();
  SynthConfig synth;
  synth.num_objects = 200;
  synth.num_binary_slices = 3;
  synth.rank = 10;
  synth.seed = 11;
  const SplitResult parts = SynthSplit(synth, 0.2, 11);
  const LossAssignment losses = LossAssignment::ForSlices(
      parts.train.slice_types(), LossKind::kSmoothHinge);
  std::vector<double> scores;
  std::string detail;
  for (int rank : {10, 20, 40}) {
    FitConfig config;
    config.rank = rank;
    double lambda = 0;
    scores.push_back(MeanAuprc(TuneAndTest(parts, losses, config, &lambda)));
    detail += Fmt(" r=%.0f:%.4f(lambda %g)", rank, scores.back(), lambda);
  }
  double mean = 0;
  for (double s : scores) mean += s;
  mean /= scores.size();
  double ss = 0;
  for (double s : scores) ss += (s - mean) * (s - mean);
  const double sd = std::sqrt(ss / (scores.size() - 1));
  Report(6, sd < 0.03, "test AUPRC stable across ranks 10, 20, 40",
         Fmt("sample std %.4f, %.0fs;", sd, Since(start)) + detail);
}

double BruteForceAuprc(const std::vector<double>& s,
                       const std::vector<double>& y) {
  std::set<double, std::greater<>> thresholds(s.begin(), s.end());
  double total = 0.0;
  for (double v : y) total += v == 1.0;
  double area = 0.0, prev = 0.0;
  for (double t : thresholds) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) (y[i] == 1.0 ? tp : fp)++;
    }
    const double recall = static_cast<double>(tp) / total;
    area += (recall - prev) * (static_cast<double>(tp) / (tp + fp));
    prev = recall;
  }
  return area;
}

void MetricOracles() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> len(1, 200), levels(1, 40);
  std::uniform_real_distribution<double> unif;
  int mismatches = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = len(rng);
    const int l = levels(rng);
    const bool continuous = trial % 2 == 0;
    std::vector<double> s(n), y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = continuous ? unif(rng) : std::floor(unif(rng) * l);
      y[i] = unif(rng) < 0.25 ? 1.0 : -1.0;
    }
    y[n - 1] = 1.0;
    mismatches += Auprc(s, y) != BruteForceAuprc(s, y);
  }
  const double hand = Auprc(std::vector<double>{.9, .8, .7, .6},
                            std::vector<double>{1, -1, 1, -1});
  const bool hand_ok = std::abs(hand - 5.0 / 6.0) <= 1e-15;
  Report(7, mismatches == 0 && hand_ok,
         "AUPRC equals brute-force oracle; hand example 0.8333...",
         Fmt("%.0f/1000 mismatches, hand example %.17g", mismatches, hand));
}

std::string Slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void Determinism() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       ("mrtf_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  auto run = [&](const std::string& tag) {
    const std::string d = (dir / (tag + "d.mrt")).string();
    const std::string m = (dir / (tag + "m.mrm")).string();
    const std::string r = (dir / (tag + "r.csv")).string();
    std::ostringstream out, err;
    int code = RunCli({"synth", "--objects", "200", "--binary-slices", "3",
                       "--rank", "10", "--seed", "1", "--out", d},
                      out, err);
    code |= RunCli({"fit", "--data", d, "--rank", "10", "--loss", "hinge",
                    "--reg", "1", "--out", m},
                   out, err);
    code |= RunCli({"eval", "--model", m, "--data", d, "--out", r}, out, err);
    return std::make_tuple(code, Slurp(m), Slurp(r));
  };
  const auto [c1, m1, r1] = run("a_");
  const auto [c2, m2, r2] = run("b_");
  fs::remove_all(dir);
  Report(8, c1 == 0 && c2 == 0 && !m1.empty() && m1 == m2 && r1 == r2,
         "synth -> fit -> eval is byte-identical across runs",
         Fmt("exit codes %.0f/%.0f, model %.0f bytes, report %.0f bytes", c1,
             c2, m1.size(), r1.size()));
}

void EigenInitQuality() {
  std::vector<int> eig_iters, rnd_iters;
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    SynthConfig synth;
    synth.num_objects = 50;
    synth.num_binary_slices = 0;
    synth.num_real_slices = 1;
    synth.rank = 5;
    synth.noise_std = 0.0;
    synth.seed = seed;
    const ObservedTensor data = GenerateSynthetic(synth).full;
    const FactorModel init = EigenInit(data, 5, FactorMode::kJoint);
    for (int k = 0; k < data.num_slices(); ++k) {
      Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(50, 50);
      for (const Entry& e : data.Entries()) {
        if (e.slice == k) dense(e.row, e.col) = e.value;
      }
      const Eigen::MatrixXd& a = init.factors_for(k);
      const double rel =
          (a * init.interactions[k] * a.transpose() - dense).norm() /
          dense.norm();
      worst = std::max(worst, rel);
    }
    const LossAssignment losses =
        LossAssignment::ForSlices(data.slice_types(), LossKind::kQuadratic);
    FitConfig config;
    config.rank = 5;
    config.lambda = 1e-6;
    config.seed = seed;
    eig_iters.push_back(Fit(data, losses, config).trace.num_iterations());
    config.init = InitMethod::kRandom;
    rnd_iters.push_back(Fit(data, losses, config).trace.num_iterations());
  }
  auto median = [](std::vector<int> v) {
    std::sort(v.begin(), v.end());
    return 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
  };
  const double me = median(eig_iters), mr = median(rnd_iters);
  Report(9, worst < 0.5 && me <= 0.5 * mr,
         "eigen init reconstructs planted slices and halves iterations",
         Fmt("max rel reconstruction err %.2e, median iterations eigen %.1f vs "
             "random %.1f (ratio %.2f)",
             worst, me, mr, me / mr));
}

}  // namespace
}  // namespace mrtf

int main() {
  using namespace mrtf;
  const std::vector<std::function<void()>> criteria = {
      GradientSuite, OracleSuite,  WeightingLift,  MixedRecovery,
      SparseSpeedup, RankStability, MetricOracles, Determinism,
      EigenInitQuality};
  int id = 1;
  for (const auto& run : criteria) {
    try {
      run();
    } catch (const std::exception& e) {
      Report(id, false, "threw", e.what());
    }
    ++id;
  }
  std::printf("%d of %zu criteria failed\n", failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
