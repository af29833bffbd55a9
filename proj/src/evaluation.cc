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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <future>
#include <map>
#include <new>
#include <numeric>
#include <ostream>

#include "mrtf/errors.h"
#include "mrtf/objective.h"
#include "mrtf/synthgen.h"

namespace mrtf {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string Num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

GridRow FitAndScore(const ObservedTensor& train,
                    const ObservedTensor& validation,
                    const LossAssignment& losses, FitConfig config,
                    double lambda) {
  GridRow row;
  row.lambda = lambda;
  config.lambda = lambda;
  try {
    const FitResult fit = Fit(train, losses, config);
    row.converged =
        fit.trace.reason == Termination::kGradientTolerance ||
        fit.trace.reason == Termination::kObjectiveTolerance;
    row.score = SelectionScore(EvaluateModel(fit.model, validation));
  } catch (const std::exception& e) {
    row.failed = true;
    row.error = e.what();
  }
  return row;
}

}  // namespace

double Auprc(std::span<const double> scores, std::span<const double> labels) {
  if (scores.size() != labels.size()) {
    throw DataError("scores and labels differ in length");
  }
  std::size_t positives = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 1.0 && labels[i] != -1.0) {
      throw DataError("labels must be ±1");
    }
    if (std::isnan(scores[i])) throw DataError("NaN score");
    if (labels[i] == 1.0) ++positives;
  }
  if (positives == 0) throw DataError("AUPRC undefined without positives");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return scores[a] > scores[b];
  });

  const double total_pos = static_cast<double>(positives);
  double area = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, fp = 0;
  for (std::size_t p = 0; p < order.size();) {
    const double threshold = scores[order[p]];
    for (; p < order.size() && scores[order[p]] == threshold; ++p) {
      if (labels[order[p]] == 1.0) {
        ++tp;
      } else {
        ++fp;
      }
    }
    const double recall = static_cast<double>(tp) / total_pos;
    const double precision =
        static_cast<double>(tp) / static_cast<double>(tp + fp);
    area += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return area;
}

double MeanSquaredError(std::span<const double> predicted,
                        std::span<const double> truth) {
  if (predicted.size() != truth.size()) {
    throw DataError("prediction and truth differ in length");
  }
  if (predicted.empty()) throw DataError("MSE of an empty sequence");
  double sum = 0.0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const double d = predicted[i] - truth[i];
    sum += d * d;
  }
  return sum / static_cast<double>(predicted.size());
}

EvalReport EvaluateModel(const FactorModel& model, const ObservedTensor& test) {
  const auto start = Clock::now();
  if (model.num_objects() != test.num_objects() ||
      model.num_slices() != test.num_slices()) {
    throw DataError("model dimensions do not match the evaluation data");
  }
  EvalReport report;
  const std::vector<Entry> pairs = test.UnorderedPairs();
  auto begin = pairs.begin();
  for (int k = 0; k < test.num_slices(); ++k) {
    const auto end = std::find_if(begin, pairs.end(),
                                  [k](const Entry& e) { return e.slice != k; });
    std::vector<std::pair<int, int>> index;
    std::vector<double> truth;
    for (auto it = begin; it != end; ++it) {
      index.emplace_back(it->row, it->col);
      truth.push_back(it->value);
    }
    begin = end;

    SliceMetric metric;
    metric.slice = k;
    metric.type = test.slice_type(k);
    metric.num_pairs = truth.size();
    if (!truth.empty()) {
      const std::vector<double> scores = PredictScores(model, k, index);
      if (metric.type == SliceType::kBinary) {
        if (std::find(truth.begin(), truth.end(), 1.0) != truth.end()) {
          metric.value = Auprc(scores, truth);
        }
      } else {
        metric.value = MeanSquaredError(scores, truth);
      }
    }
    report.slices.push_back(metric);
  }
  report.seconds = SecondsSince(start);
  return report;
}

double SelectionScore(const EvalReport& report) {
  const bool all_binary = std::all_of(
      report.slices.begin(), report.slices.end(),
      [](const SliceMetric& s) { return s.type == SliceType::kBinary; });
  std::vector<double> components;
  for (const SliceMetric& s : report.slices) {
    if (!s.value) continue;
    components.push_back(s.type == SliceType::kBinary
                             ? *s.value
                             : std::max(0.0, 1.0 - *s.value));
  }
  if (components.empty()) return 0.0;
  if (all_binary) {
    double sum = 0.0;
    for (double c : components) sum += c;
    return sum / static_cast<double>(components.size());
  }
  double inv = 0.0;
  for (double c : components) {
    if (c <= 0.0) return 0.0;
    inv += 1.0 / c;
  }
  return static_cast<double>(components.size()) / inv;
}

std::vector<double> LambdaGrid(double lambda_min, double lambda_max,
                               int steps) {
  if (steps < 2) throw DataError("grid needs at least two steps");
  if (!(lambda_min > 0.0) || !(lambda_max > lambda_min)) {
    throw DataError("grid bounds must satisfy 0 < min < max");
  }
  const double lo = std::log10(lambda_min);
  const double hi = std::log10(lambda_max);
  std::vector<double> grid;
  for (int i = 0; i < steps; ++i) {
    grid.push_back(std::pow(10.0, lo + (hi - lo) * i / (steps - 1)));
  }
  return grid;
}

GridSearchResult GridSearch(const ObservedTensor& train,
                            const ObservedTensor& validation,
                            const LossAssignment& losses,
                            const FitConfig& base,
                            const GridSearchOptions& options) {
  const std::vector<double> grid =
      LambdaGrid(options.lambda_min, options.lambda_max, options.steps);
  GridSearchResult result;
  result.table.resize(grid.size());

  const std::size_t threads =
      static_cast<std::size_t>(std::max(1, options.threads));
  for (std::size_t first = 0; first < grid.size(); first += threads) {
    const std::size_t last = std::min(grid.size(), first + threads);
    if (threads == 1) {
      result.table[first] =
          FitAndScore(train, validation, losses, base, grid[first]);
      continue;
    }
    std::vector<std::future<GridRow>> jobs;
    for (std::size_t i = first; i < last; ++i) {
      jobs.push_back(std::async(std::launch::async, FitAndScore,
                                std::cref(train), std::cref(validation),
                                std::cref(losses), base, grid[i]));
    }
    for (std::size_t i = first; i < last; ++i) {
      result.table[i] = jobs[i - first].get();
    }
  }

  bool any = false;
  for (const GridRow& row : result.table) {
    if (row.failed) continue;
    if (!any || row.score > result.best_score) {
      result.best_lambda = row.lambda;
      result.best_score = row.score;
      any = true;
    }
  }
  if (!any) {
    throw NumericalError("every fit in the grid search failed: " +
                         result.table.front().error);
  }
  return result;
}

double TimeObjectiveEvaluation(const FactorModel& model,
                               const ObservedTensor& data,
                               const LossAssignment& losses, double lambda,
                               int evaluations) {
  if (evaluations <= 0) throw DataError("need at least one evaluation");
  const auto start = Clock::now();
  double sink = 0.0;
  for (int e = 0; e < evaluations; ++e) {
    sink += EvaluateObjective(model, data, losses, lambda).value;
  }
  const double seconds = SecondsSince(start);
  if (!std::isfinite(sink)) throw NumericalError("non-finite objective");
  return seconds / evaluations;
}

std::vector<BenchmarkRow> RunBenchmark(const BenchmarkOptions& options) {
  if (!std::is_sorted(options.sizes.begin(), options.sizes.end())) {
    throw DataError("benchmark sizes must be ascending");
  }
  if (options.runs <= 0) throw DataError("benchmark needs at least one run");
  std::vector<BenchmarkRow> rows;
  const char* modes[] = {"weighted", "unweighted"};
  for (int n : options.sizes) {
    try {
      SynthConfig synth;
      synth.num_objects = n;
      synth.num_binary_slices = options.num_binary_slices;
      synth.num_real_slices = 0;
      synth.rank = std::min(options.synth_rank, n);
      synth.seed = options.seed;
      SplitSpec spec;
      spec.train_fraction = options.train_fraction;
      spec.validation_fraction_of_train = 0.0;
      spec.seed = options.seed;
      const ObservedTensor train =
          Split(GenerateSynthetic(synth).full, spec).train;

      for (const char* mode : modes) {
        FitConfig config = options.config;
        config.weighted = std::string(mode) == "weighted";
        const LossAssignment losses = LossAssignment::ForSlices(
            train.slice_types(),
            config.weighted ? LossKind::kSmoothHinge : LossKind::kQuadratic);
        for (int run = 0; run < options.runs; ++run) {
          BenchmarkRow row{n, mode, run, 0.0, false};
          const auto start = Clock::now();
          try {
            Fit(train, losses, config);
            row.seconds = SecondsSince(start);
          } catch (const std::bad_alloc&) {
            row.failed = true;
          }
          rows.push_back(row);
        }
      }
    } catch (const std::bad_alloc&) {
      for (const char* mode : modes) {
        for (int run = 0; run < options.runs; ++run) {
          rows.push_back({n, mode, run, 0.0, true});
        }
      }
    }
  }
  return rows;
}

std::vector<BenchmarkSummary> SummarizeBenchmark(
    const std::vector<BenchmarkRow>& rows) {
  std::map<std::pair<int, std::string>, std::vector<double>> groups;
  std::vector<std::pair<int, std::string>> order;
  for (const BenchmarkRow& row : rows) {
    const auto key = std::make_pair(row.num_objects, row.mode);
    if (!groups.contains(key)) order.push_back(key);
    auto& times = groups[key];
    if (!row.failed) times.push_back(row.seconds);
  }
  std::vector<BenchmarkSummary> out;
  for (const auto& key : order) {
    const auto& times = groups[key];
    BenchmarkSummary s;
    s.num_objects = key.first;
    s.mode = key.second;
    s.completed_runs = static_cast<int>(times.size());
    if (!times.empty()) {
      s.mean_seconds =
          std::accumulate(times.begin(), times.end(), 0.0) / times.size();
      if (times.size() > 1) {
        double ss = 0.0;
        for (double t : times) ss += (t - s.mean_seconds) * (t - s.mean_seconds);
        s.std_seconds = std::sqrt(ss / (times.size() - 1));
      }
    }
    out.push_back(s);
  }
  return out;
}

void WriteEvalCsv(std::ostream& out, const EvalReport& report) {
  out << "slice,type,metric,value,n_pairs\n";
  for (const SliceMetric& s : report.slices) {
    out << s.slice << "," << SliceTypeName(s.type) << "," << s.metric_name()
        << "," << (s.value ? Num(*s.value) : "") << "," << s.num_pairs
        << "\n";
  }
}

void WriteGridCsv(std::ostream& out, const GridSearchResult& result) {
  out << "lambda,score,converged\n";
  for (const GridRow& row : result.table) {
    out << Num(row.lambda) << "," << (row.failed ? "" : Num(row.score)) << ","
        << (row.converged ? "true" : "false") << "\n";
  }
}

void WriteBenchmarkCsv(std::ostream& out,
                       const std::vector<BenchmarkRow>& rows) {
  out << "n,mode,run,seconds\n";
  for (const BenchmarkRow& row : rows) {
    out << row.num_objects << "," << row.mode << "," << row.run << ","
        << (row.failed ? "failed" : Num(row.seconds)) << "\n";
  }
}

}  // namespace mrtf
