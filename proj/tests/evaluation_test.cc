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

#include "mrtf/evaluation.h"

#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "mrtf/errors.h"
#include "mrtf/synthgen.h"

namespace mrtf {
namespace {

// Enumerates each distinct score as a threshold (predict positive iff
// score >= t), highest first, and counts hits by a full scan.
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

TEST(AuprcTest, HandExample) {
  EXPECT_DOUBLE_EQ(Auprc(std::vector<double>{.9, .8, .7, .6},
                         std::vector<double>{1, -1, 1, -1}),
                   0.5 * 1.0 + 0.5 * (2.0 / 3.0));
}

TEST(AuprcTest, PerfectAndTied) {
  EXPECT_EQ(Auprc(std::vector<double>{3, 2, 1, 0},
                  std::vector<double>{1, 1, -1, -1}),
            1.0);
  EXPECT_DOUBLE_EQ(Auprc(std::vector<double>(7, 0.4),
                         std::vector<double>{1, -1, -1, 1, -1, 1, -1}),
                   3.0 / 7.0);
}

TEST(AuprcTest, MatchesBruteForceOracle) {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(1, 60), levels(1, 12);
  std::uniform_real_distribution<double> unif;
  for (int trial = 0; trial < 300; ++trial) {
    const int n = len(rng);
    const int l = levels(rng);  // few levels force ties
    std::vector<double> s(n), y(n);
    for (int i = 0; i < n; ++i) {
      s[i] = std::floor(unif(rng) * l) / l;
      y[i] = unif(rng) < 0.3 ? 1.0 : -1.0;
    }
    y[0] = 1.0;
    EXPECT_EQ(Auprc(s, y), BruteForceAuprc(s, y)) << trial;
  }
}

TEST(AuprcTest, Errors) {
  EXPECT_THROW(Auprc(std::vector<double>{1, 2}, std::vector<double>{-1, -1}),
               DataError);
  EXPECT_THROW(Auprc(std::vector<double>{1}, std::vector<double>{1, -1}),
               DataError);
}

TEST(MseTest, Examples) {
  EXPECT_EQ(MeanSquaredError(std::vector<double>{1, 2},
                             std::vector<double>{1, 2}),
            0.0);
  EXPECT_EQ(MeanSquaredError(std::vector<double>{0, 0},
                             std::vector<double>{1, -1}),
            1.0);
  EXPECT_DOUBLE_EQ(MeanSquaredError(std::vector<double>{1, 2, 3},
                                    std::vector<double>{1, 1, 1}),
                   5.0 / 3.0);
  EXPECT_THROW(MeanSquaredError(std::vector<double>{}, std::vector<double>{}),
               DataError);
}

TEST(EvaluateModelTest, PlantedModelIsPerfectOnNoiselessData) {
  SynthConfig c;
  c.num_objects = 60;
  c.noise_std = 0.0;
  c.num_binary_slices = 2;
  const SynthResult r = GenerateSynthetic(c);
  const EvalReport report = EvaluateModel(r.planted, r.full);
  ASSERT_EQ(report.slices.size(), 2u);
  for (const SliceMetric& s : report.slices) {
    EXPECT_EQ(s.metric_name(), "auprc");
    EXPECT_EQ(s.num_pairs, 60u * 61u / 2u);
    EXPECT_NEAR(*s.value, 1.0, 1e-3);
  }
}

TEST(EvaluateModelTest, BiasOnlyModelGivesVariance) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(1.0, 2.0);
  std::vector<Entry> entries;
  std::vector<double> values;
  for (int i = 0; i < 10; ++i) {
    for (int j = i; j < 10; j += 2) {
      values.push_back(normal(rng));
      entries.push_back({0, i, j, values.back(), 1.0});
    }
  }
  const ObservedTensor test =
      ObservedTensor::FromEntries(10, {SliceType::kReal}, entries);
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= values.size();
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  var /= values.size();

  FactorModel model = FactorModel::Zeros(10, 1, 2, FactorMode::kJoint);
  model.bias[0] = mean;
  const EvalReport report = EvaluateModel(model, test);
  EXPECT_EQ(report.slices[0].metric_name(), "mse");
  EXPECT_NEAR(*report.slices[0].value, var, 1e-12);
}

TEST(EvaluateModelTest, EmptyOrPositiveFreeSliceIsMissing) {
  const ObservedTensor test = ObservedTensor::FromEntries(
      4, {SliceType::kBinary, SliceType::kBinary, SliceType::kReal},
      {{1, 0, 1, -1.0, 1.0}, {2, 0, 0, 0.5, 1.0}});
  const EvalReport report =
      EvaluateModel(FactorModel::Zeros(4, 3, 1, FactorMode::kJoint), test);
  EXPECT_FALSE(report.slices[0].value.has_value());
  EXPECT_EQ(report.slices[0].num_pairs, 0u);
  EXPECT_FALSE(report.slices[1].value.has_value());
  EXPECT_EQ(report.slices[1].num_pairs, 1u);
  EXPECT_DOUBLE_EQ(*report.slices[2].value, 0.25);
  std::ostringstream csv;
  WriteEvalCsv(csv, report);
  EXPECT_EQ(csv.str(),
            "slice,type,metric,value,n_pairs\n"
            "0,binary,auprc,,0\n"
            "1,binary,auprc,,1\n"
            "2,real,mse,0.25,1\n");
}

EvalReport Report(std::vector<std::pair<SliceType, double>> parts) {
  EvalReport r;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    r.slices.push_back({static_cast<int>(k), parts[k].first, parts[k].second, 1});
  }
  return r;
}

TEST(SelectionScoreTest, Examples) {
  constexpr auto B = SliceType::kBinary;
  constexpr auto R = SliceType::kReal;
  EXPECT_DOUBLE_EQ(SelectionScore(Report({{B, 0.5}, {B, 0.7}, {B, 0.9}})),
                   0.7);
  EXPECT_DOUBLE_EQ(SelectionScore(Report({{B, 0.8}, {R, 0.2}})), 0.8);
  EXPECT_EQ(SelectionScore(Report({{B, 0.9}, {R, 1.5}})), 0.0);
  EXPECT_DOUBLE_EQ(SelectionScore(Report({{B, 0.5}, {R, 0.0}})),
                   2.0 / (1.0 / 0.5 + 1.0));
  EvalReport missing = Report({{B, 0.6}, {B, 0.0}});
  missing.slices[1].value.reset();
  EXPECT_DOUBLE_EQ(SelectionScore(missing), 0.6);
  EXPECT_EQ(SelectionScore(EvalReport{}), 0.0);
}

TEST(LambdaGridTest, Decades) {
  const std::vector<double> expected = {1e-3, 1e-2, 1e-1, 1, 1e1, 1e2, 1e3};
  EXPECT_EQ(LambdaGrid(1e-3, 1e3, 7), expected);
  EXPECT_THROW(LambdaGrid(1, 1, 3), DataError);
  EXPECT_THROW(LambdaGrid(0, 1, 3), DataError);
}

SplitResult SmallSplit(double train_fraction, std::uint64_t seed,
                       int num_objects = 80) {
  SynthConfig c;
  c.num_objects = num_objects;
  c.num_binary_slices = 2;
  c.noise_std = 0.05;
  c.rank = 5;
  c.seed = seed;
  SplitSpec spec;
  spec.train_fraction = train_fraction;
  spec.seed = seed;
  return Split(GenerateSynthetic(c).full, spec);
}

TEST(GridSearchTest, TieGoesToSmallerLambda) {
  SplitResult parts = SmallSplit(0.5, 1);
  // Keep only negatives in validation: every score is then 0.
  std::vector<Entry> negatives;
  for (const Entry& e : parts.validation.UnorderedPairs()) {
    if (e.value == -1.0) negatives.push_back(e);
  }
  const ObservedTensor val = ObservedTensor::FromEntries(
      80, parts.validation.slice_types(), negatives);
  FitConfig config;
  config.rank = 3;
  config.lbfgs.max_iterations = 20;
  GridSearchOptions opts;
  opts.lambda_min = 0.1;
  opts.lambda_max = 10;
  opts.steps = 3;
  const GridSearchResult r = GridSearch(
      parts.train, val,
      LossAssignment::ForSlices(val.slice_types(), LossKind::kSmoothHinge),
      config, opts);
  EXPECT_EQ(r.best_lambda, 0.1);
  EXPECT_EQ(r.best_score, 0.0);
  ASSERT_EQ(r.table.size(), 3u);
}

TEST(GridSearchTest, SelectedLambdaIsNearBestOnTest) {
  // Big enough that validation noise cannot flip the choice.
  const SplitResult parts = SmallSplit(0.6, 7, 120);
  const LossAssignment losses = LossAssignment::ForSlices(
      parts.train.slice_types(), LossKind::kSmoothHinge);
  FitConfig config;
  config.rank = 5;
  const GridSearchOptions opts;
  const GridSearchResult r =
      GridSearch(parts.train, parts.validation, losses, config, opts);
  double best_test = 0.0, chosen_test = -1.0;
  for (const GridRow& row : r.table) {
    ASSERT_FALSE(row.failed) << row.error;
    EXPECT_GE(r.best_score, row.score);
    config.lambda = row.lambda;
    const double test = SelectionScore(
        EvaluateModel(Fit(parts.train, losses, config).model, parts.test));
    best_test = std::max(best_test, test);
    if (row.lambda == r.best_lambda) chosen_test = test;
  }
  EXPECT_GE(chosen_test, best_test - 0.05);

  // Concurrent evaluation gives the same table.
  GridSearchOptions threaded = opts;
  threaded.threads = 3;
  const GridSearchResult again =
      GridSearch(parts.train, parts.validation, losses, config, threaded);
  EXPECT_EQ(again.best_lambda, r.best_lambda);
  for (std::size_t i = 0; i < r.table.size(); ++i) {
    EXPECT_EQ(again.table[i].score, r.table[i].score);
  }
}

TEST(BenchmarkTest, RowsAndSummary) {
  BenchmarkOptions opts;
  opts.sizes = {500};
  opts.runs = 2;
  opts.config.rank = 5;
  opts.config.lbfgs.max_iterations = 3;
  const std::vector<BenchmarkRow> rows = RunBenchmark(opts);
  ASSERT_EQ(rows.size(), 4u);
  const auto summary = SummarizeBenchmark(rows);
  ASSERT_EQ(summary.size(), 2u);
  EXPECT_EQ(summary[0].mode, "weighted");
  EXPECT_EQ(summary[1].mode, "unweighted");
  for (const auto& s : summary) {
    EXPECT_EQ(s.num_objects, 500);
    EXPECT_EQ(s.completed_runs, 2);
    EXPECT_GT(s.mean_seconds, 0.0);
  }
  const double a = rows[0].seconds, b = rows[1].seconds;
  const double mean = (a + b) / 2;
  EXPECT_NEAR(summary[0].std_seconds,
              std::sqrt((a - mean) * (a - mean) + (b - mean) * (b - mean)),
              1e-12);
  std::ostringstream csv;
  WriteBenchmarkCsv(csv, rows);
  const std::string text = csv.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "n,mode,run,seconds");
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 5);
}

TEST(BenchmarkTest, WriteGridCsv) {
  GridSearchResult r;
  r.table = {{0.1, 0.5, true, false, ""}, {1.0, 0.0, false, true, "x"}};
  std::ostringstream csv;
  WriteGridCsv(csv, r);
  EXPECT_EQ(csv.str(), "lambda,score,converged\n0.10000000000000001,0.5,true\n1,,false\n");
}

}  // namespace
}  // namespace mrtf
