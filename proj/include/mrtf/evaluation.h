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

#ifndef MRTF_EVALUATION_H_
#define MRTF_EVALUATION_H_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrtf/losses.h"
#include "mrtf/model.h"
#include "mrtf/optimizer.h"
#include "mrtf/tensor_data.h"

namespace mrtf {

// Area under the precision-recall curve by step integration: scores are
// visited in descending order, tied scores form one threshold, and each
// threshold adds (recall - previous recall) * precision. Labels are +1/-1.
// Throws DataError if there is no positive label or the lengths differ.
double Auprc(std::span<const double> scores, std::span<const double> labels);

// Throws DataError on empty or mismatched input.
double MeanSquaredError(std::span<const double> predicted,
                        std::span<const double> truth);

struct SliceMetric {
  int slice = 0;
  SliceType type = SliceType::kBinary;
  // AUPRC for binary slices, MSE for real slices; empty when undefined
  // (no pairs, or no positives).
  std::optional<double> value;
  std::size_t num_pairs = 0;

  std::string metric_name() const {
    return type == SliceType::kBinary ? "auprc" : "mse";
  }
};

struct EvalReport {
  std::vector<SliceMetric> slices;
  double seconds = 0.0;
};

// Scores every unordered test pair once with the raw model score.
EvalReport EvaluateModel(const FactorModel& model, const ObservedTensor& test);

// All-binary data: mean AUPRC over slices. Otherwise the harmonic mean of
// per-slice components, AUPRC for binary slices and max(0, 1 - MSE) for real
// ones, which is 0 as soon as any component is 0. Missing metrics are
// skipped; with nothing left the score is 0.
double SelectionScore(const EvalReport& report);

// `steps` values evenly spaced in log10 between the bounds, inclusive.
std::vector<double> LambdaGrid(double lambda_min, double lambda_max,
                               int steps);

struct GridSearchOptions {
  double lambda_min = 1e-3;
  double lambda_max = 1e3;
  int steps = 7;
  // Fits for different lambdas are independent and may run concurrently.
  int threads = 1;
};

struct GridRow {
  double lambda = 0.0;
  double score = 0.0;
  bool converged = false;
  // Set when the fit threw; score is then meaningless.
  bool failed = false;
  std::string error;
};

struct GridSearchResult {
  double best_lambda = 0.0;
  double best_score = 0.0;
  std::vector<GridRow> table;
};

// Fits on `train` at every grid lambda and scores on `validation`. The best
// score wins; ties go to the smaller lambda. Throws NumericalError only if
// every fit fails.
GridSearchResult GridSearch(const ObservedTensor& train,
                            const ObservedTensor& validation,
                            const LossAssignment& losses,
                            const FitConfig& base,
                            const GridSearchOptions& options = {});

// Mean wall time of one objective + gradient evaluation over `evaluations`
// calls.
double TimeObjectiveEvaluation(const FactorModel& model,
                               const ObservedTensor& data,
                               const LossAssignment& losses, double lambda,
                               int evaluations);

struct BenchmarkOptions {
  std::vector<int> sizes;
  double train_fraction = 0.1;
  int runs = 10;
  int num_binary_slices = 3;
  int synth_rank = 10;
  std::uint64_t seed = 42;
  // Rank, lambda, optimizer settings; `weighted` is overridden per mode.
  FitConfig config;
};

struct BenchmarkRow {
  int num_objects = 0;
  std::string mode;  // "weighted" or "unweighted"
  int run = 0;
  double seconds = 0.0;
  bool failed = false;
};

struct BenchmarkSummary {
  int num_objects = 0;
  std::string mode;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;  // sample standard deviation, 0 for one run
  int completed_runs = 0;
};

// For each size: one synthetic binary tensor, one training split, then
// `runs` timed fits per mode (weighted smooth hinge, unweighted quadratic).
// A size that runs out of memory is marked failed and later sizes still run.
std::vector<BenchmarkRow> RunBenchmark(const BenchmarkOptions& options);
std::vector<BenchmarkSummary> SummarizeBenchmark(
    const std::vector<BenchmarkRow>& rows);

// CSV writers.
void WriteEvalCsv(std::ostream& out, const EvalReport& report);
void WriteGridCsv(std::ostream& out, const GridSearchResult& result);
void WriteBenchmarkCsv(std::ostream& out, const std::vector<BenchmarkRow>& rows);

}  // namespace mrtf

#endif  // MRTF_EVALUATION_H_
