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

#include "mrtf/cli.h"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <new>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "mrtf/errors.h"
#include "mrtf/evaluation.h"
#include "mrtf/losses.h"
#include "mrtf/model.h"
#include "mrtf/optimizer.h"
#include "mrtf/synthgen.h"
#include "mrtf/tensor_data.h"

namespace mrtf {
namespace {

using Json = nlohmann::ordered_json;

// Thrown for flag combinations CLI11 cannot check on its own.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string ReadBytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string Hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string HashFiles(const std::vector<std::string>& paths) {
  std::uint64_t h = Fnv1a("");
  for (const std::string& p : paths) h = Fnv1a(ReadBytes(p), h);
  return Hex(h);
}

std::ofstream OpenOutput(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

void CloseOutput(std::ofstream& out, const std::string& path) {
  out.close();
  if (!out) throw DataError("write failed for " + path);
}

struct FitFlags {
  int rank = 10;
  double reg = 1.0;
  std::string loss = "auto";
  bool unweighted = false;
  bool per_slice = false;
  double pos_weight = 1.0;
  std::string init = "eigen";
  std::string eig_order = "magnitude";
  int mem = 10;
  double tol = 1e-5;
  int max_iters = 500;

  FitConfig Config(std::uint64_t seed) const {
    FitConfig c;
    c.rank = rank;
    c.lambda = reg;
    c.lbfgs.memory = mem;
    c.lbfgs.gradient_tolerance = tol;
    c.lbfgs.max_iterations = max_iters;
    c.init = ParseInitMethod(init);
    c.eigen_order = ParseEigenOrder(eig_order);
    c.seed = seed;
    c.mode = per_slice ? FactorMode::kPerSlice : FactorMode::kJoint;
    c.weighted = !unweighted;
    c.positive_weight = pos_weight;
    return c;
  }

  LossKind BinaryLoss() const {
    return loss == "auto" ? LossKind::kSmoothHinge : ParseLossName(loss);
  }
};

void AddFitFlags(CLI::App* cmd, FitFlags* f, bool with_mode_flags) {
  cmd->add_option("--rank", f->rank, "latent rank")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--reg", f->reg, "regularization weight lambda")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--init", f->init, "eigen|random")
      ->check(CLI::IsMember({"eigen", "random"}));
  cmd->add_option("--eig-order", f->eig_order, "magnitude|algebraic")
      ->check(CLI::IsMember({"magnitude", "algebraic"}));
  cmd->add_option("--mem", f->mem, "L-BFGS memory")->check(CLI::PositiveNumber);
  cmd->add_option("--tol", f->tol, "gradient inf-norm tolerance")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--max-iters", f->max_iters, "iteration cap")
      ->check(CLI::NonNegativeNumber);
  if (!with_mode_flags) return;
  cmd->add_option("--loss", f->loss, "auto|quadratic|hinge|logistic")
      ->check(CLI::IsMember({"auto", "quadratic", "hinge", "smooth_hinge",
                             "logistic"}));
  cmd->add_flag("--unweighted", f->unweighted,
                "fill unobserved cells with 0, quadratic loss");
  cmd->add_flag("--per-slice", f->per_slice, "one factor matrix per slice");
  cmd->add_option("--pos-weight", f->pos_weight,
                  "weight multiplier for positive binary entries")
      ->check(CLI::PositiveNumber);
}

Json FitSummary(const FitResult& fit) {
  Json j;
  j["objective"] = fit.trace.iterations.back().objective;
  j["iterations"] = fit.trace.num_iterations();
  j["termination"] = std::string(TerminationName(fit.trace.reason));
  j["init_fallback"] = fit.trace.init_fallback;
  return j;
}

Json ReportJson(const EvalReport& report) {
  Json rows = Json::array();
  for (const SliceMetric& s : report.slices) {
    Json r;
    r["slice"] = s.slice;
    r["type"] = std::string(SliceTypeName(s.type));
    r["metric"] = s.metric_name();
    r["value"] = s.value ? Json(*s.value) : Json(nullptr);
    r["n_pairs"] = s.num_pairs;
    rows.push_back(r);
  }
  return rows;
}

void WriteEvalFile(const std::string& path, const EvalReport& report) {
  auto out = OpenOutput(path);
  WriteEvalCsv(out, report);
  CloseOutput(out, path);
}

// Pairs file: one "k i j" per line; blank lines and '#' comments skipped.
std::vector<Entry> ReadPairs(const std::string& path, const FactorModel& model) {
  std::istringstream in(ReadBytes(path));
  std::vector<Entry> pairs;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    std::istringstream fields(line);
    long long k, i, j;
    std::string extra;
    if (!(fields >> k >> i >> j) || (fields >> extra)) {
      throw ParseError(line_no, "expected 'k i j'");
    }
    if (k < 0 || k >= model.num_slices() || i < 0 ||
        i >= model.num_objects() || j < 0 || j >= model.num_objects()) {
      throw ParseError(line_no, "index out of range");
    }
    pairs.push_back({static_cast<int>(k), static_cast<int>(i),
                     static_cast<int>(j), 0.0, 1.0});
  }
  return pairs;
}

std::vector<int> ParseSizes(const std::string& text) {
  std::vector<int> sizes;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || v < 2) {
      throw UsageError("--sizes: bad size '" + item + "'");
    }
    sizes.push_back(v);
  }
  if (sizes.empty()) throw UsageError("--sizes: empty list");
  if (!std::is_sorted(sizes.begin(), sizes.end())) {
    throw UsageError("--sizes must be ascending");
  }
  return sizes;
}

void Emit(std::ostream& out, const Json& summary) {
  out << summary.dump() << "\n";
}

}  // namespace

std::uint64_t Fnv1a(std::string_view bytes, std::uint64_t hash) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Weighted low-rank factorization of multi-relational tensors",
               "mrtf"};
  app.require_subcommand(1);

  std::uint64_t seed = kDefaultSeed;
  std::string out_path, data_path, model_path, pairs_path;
  FitFlags fit_flags;
  SplitSpec split_spec;
  split_spec.train_fraction = 0.2;  // the library default of 1 leaves no test set

  // synth
  SynthConfig synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic tensor");
  synth_cmd->add_option("--objects", synth.num_objects, "number of objects")
      ->check(CLI::Range(2, 1 << 20));
  synth_cmd->add_option("--binary-slices", synth.num_binary_slices)
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--real-slices", synth.num_real_slices)
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--rank", synth.rank, "planted rank")
      ->check(CLI::PositiveNumber);
  synth_cmd->add_option("--noise", synth.noise_std, "noise standard deviation")
      ->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--percentile", synth.positive_percentile,
                        "binary threshold percentile")
      ->check(CLI::Range(0.0, 100.0));
  synth_cmd->add_option("--seed", seed);
  synth_cmd->add_option("--out", out_path, "output tensor")->required();

  // split
  auto* split_cmd = app.add_subcommand("split", "train/validation/test split");
  split_cmd->add_option("--data", data_path)->required();
  split_cmd->add_option("--train-frac", split_spec.train_fraction);
  split_cmd->add_option("--val-frac", split_spec.validation_fraction_of_train);
  split_cmd->add_flag("--include-diagonal", split_spec.include_diagonal,
                      "also sample (i, i) cells");
  split_cmd->add_option("--seed", seed);
  split_cmd->add_option("--out", out_path, "output prefix")->required();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "fit a model");
  fit_cmd->add_option("--data", data_path)->required();
  AddFitFlags(fit_cmd, &fit_flags, true);
  fit_cmd->add_option("--seed", seed, "random init seed");
  fit_cmd->add_option("--out", out_path, "output model")->required();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "score pairs");
  predict_cmd->add_option("--model", model_path)->required();
  predict_cmd->add_option("--pairs", pairs_path, "lines of 'k i j'")
      ->required();
  predict_cmd->add_option("--out", out_path, "output CSV")->required();

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model");
  eval_cmd->add_option("--model", model_path)->required();
  eval_cmd->add_option("--data", data_path)->required();
  eval_cmd->add_option("--out", out_path, "output CSV")->required();

  // gridsearch
  GridSearchOptions grid;
  auto* grid_cmd = app.add_subcommand(
      "gridsearch", "split, tune lambda, refit on train+validation, test");
  grid_cmd->add_option("--data", data_path)->required();
  AddFitFlags(grid_cmd, &fit_flags, true);
  grid_cmd->add_option("--train-frac", split_spec.train_fraction);
  grid_cmd->add_option("--val-frac", split_spec.validation_fraction_of_train);
  grid_cmd->add_flag("--include-diagonal", split_spec.include_diagonal,
                     "also sample (i, i) cells");
  grid_cmd->add_option("--lambda-min", grid.lambda_min)
      ->check(CLI::PositiveNumber);
  grid_cmd->add_option("--lambda-max", grid.lambda_max)
      ->check(CLI::PositiveNumber);
  grid_cmd->add_option("--steps", grid.steps)->check(CLI::Range(2, 1000));
  grid_cmd->add_option("--threads", grid.threads)->check(CLI::Range(1, 256));
  grid_cmd->add_option("--seed", seed);
  grid_cmd->add_option("--out", out_path, "output prefix")->required();

  // bench
  BenchmarkOptions bench;
  std::string sizes_text;
  auto* bench_cmd =
      app.add_subcommand("bench", "time weighted vs unweighted fits");
  bench_cmd->add_option("--sizes", sizes_text, "comma-separated n values")
      ->required();
  bench_cmd->add_option("--runs", bench.runs)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--train-frac", bench.train_fraction);
  bench_cmd->add_option("--binary-slices", bench.num_binary_slices)
      ->check(CLI::PositiveNumber);
  bench_cmd->add_option("--synth-rank", bench.synth_rank)
      ->check(CLI::PositiveNumber);
  AddFitFlags(bench_cmd, &fit_flags, false);
  bench_cmd->add_option("--seed", seed);
  bench_cmd->add_option("--out", out_path, "output CSV")->required();

  auto usage = [&](const std::string& message, const CLI::App* cmd) {
    err << "error: " << message << "\n\n"
        << (cmd ? cmd->help() : app.help());
    return kExitUsage;
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    const auto subs = app.get_subcommands();
    return usage(e.what(), subs.empty() ? nullptr : subs.front());
  }
  CLI::App* cmd = app.get_subcommands().front();

  // Remaining flag validation, before touching any file.
  FitConfig config;
  try {
    if (cmd == synth_cmd) synth.seed = seed, synth.Validate();
    if (cmd == split_cmd || cmd == grid_cmd) {
      split_spec.seed = seed;
      split_spec.Validate();
    }
    if (cmd == fit_cmd || cmd == grid_cmd || cmd == bench_cmd) {
      config = fit_flags.Config(seed);
      config.Validate();
      config.lbfgs.Validate();
    }
    if (cmd == grid_cmd) LambdaGrid(grid.lambda_min, grid.lambda_max, grid.steps);
    if (cmd == bench_cmd) {
      bench.sizes = ParseSizes(sizes_text);
      bench.seed = seed;
      bench.config = config;
      if (!(bench.train_fraction > 0.0 && bench.train_fraction <= 1.0)) {
        throw UsageError("--train-frac must lie in (0, 1]");
      }
    }
  } catch (const std::exception& e) {
    return usage(e.what(), cmd);
  }

  try {
    Json summary;
    summary["command"] = cmd->get_name();

    if (cmd == synth_cmd) {
      std::ostringstream key;
      key << "synth " << synth.num_objects << " " << synth.num_binary_slices
          << " " << synth.num_real_slices << " " << synth.rank << " "
          << synth.noise_std << " " << synth.positive_percentile;
      summary["inputs_fnv1a"] = Hex(Fnv1a(key.str()));
      summary["seed"] = seed;
      const SynthResult result = GenerateSynthetic(synth);
      WriteTensorFile(out_path, result.full);
      summary["num_objects"] = result.full.num_objects();
      summary["num_slices"] = result.full.num_slices();
      summary["num_entries"] = result.full.num_entries();

    } else if (cmd == split_cmd) {
      summary["inputs_fnv1a"] = HashFiles({data_path});
      summary["seed"] = seed;
      const SplitResult parts = Split(ReadTensorFile(data_path), split_spec);
      WriteTensorFile(out_path + ".train.mrt", parts.train);
      WriteTensorFile(out_path + ".val.mrt", parts.validation);
      WriteTensorFile(out_path + ".test.mrt", parts.test);
      summary["train_entries"] = parts.train.num_entries();
      summary["validation_entries"] = parts.validation.num_entries();
      summary["test_entries"] = parts.test.num_entries();

    } else if (cmd == fit_cmd) {
      summary["inputs_fnv1a"] = HashFiles({data_path});
      summary["seed"] = seed;
      const ObservedTensor data = ReadTensorFile(data_path);
      const LossAssignment losses =
          LossAssignment::ForSlices(data.slice_types(), fit_flags.BinaryLoss());
      const FitResult fit = Fit(data, losses, config);
      WriteModelFile(out_path, fit.model, fit.losses);
      summary.update(FitSummary(fit));

    } else if (cmd == predict_cmd) {
      summary["inputs_fnv1a"] = HashFiles({model_path, pairs_path});
      const ModelFile mf = ReadModelFile(model_path);
      const std::vector<Entry> pairs = ReadPairs(pairs_path, mf.model);
      auto csv = OpenOutput(out_path);
      csv << "slice,row,col,score,label\n";
      char buf[64];
      for (const Entry& p : pairs) {
        const SliceType type = mf.losses.mapping(p.slice) == Mapping::kSign
                                   ? SliceType::kBinary
                                   : SliceType::kReal;
        const double score = PredictScore(mf.model, p.row, p.col, p.slice);
        const double label =
            PredictLabel(mf.model, p.row, p.col, p.slice, type);
        csv << p.slice << "," << p.row << "," << p.col << ",";
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", score, label);
        csv << buf;
      }
      CloseOutput(csv, out_path);
      summary["num_pairs"] = pairs.size();

    } else if (cmd == eval_cmd) {
      summary["inputs_fnv1a"] = HashFiles({model_path, data_path});
      const ModelFile mf = ReadModelFile(model_path);
      const ObservedTensor data = ReadTensorFile(data_path);
      const EvalReport report = EvaluateModel(mf.model, data);
      WriteEvalFile(out_path, report);
      summary["selection_score"] = SelectionScore(report);
      summary["slices"] = ReportJson(report);

    } else if (cmd == grid_cmd) {
      summary["inputs_fnv1a"] = HashFiles({data_path});
      summary["seed"] = seed;
      const SplitResult parts = Split(ReadTensorFile(data_path), split_spec);
      if (parts.validation.num_entries() == 0) {
        throw DataError("validation split is empty; raise --val-frac");
      }
      const LossAssignment losses = LossAssignment::ForSlices(
          parts.train.slice_types(), fit_flags.BinaryLoss());
      const GridSearchResult result =
          GridSearch(parts.train, parts.validation, losses, config, grid);
      {
        const std::string path = out_path + ".grid.csv";
        auto csv = OpenOutput(path);
        WriteGridCsv(csv, result);
        CloseOutput(csv, path);
      }
      FitConfig final_config = config;
      final_config.lambda = result.best_lambda;
      const FitResult fit =
          Fit(Merge(parts.train, parts.validation), losses, final_config);
      WriteModelFile(out_path + ".mrm", fit.model, fit.losses);
      const EvalReport report = EvaluateModel(fit.model, parts.test);
      WriteEvalFile(out_path + ".eval.csv", report);
      summary["best_lambda"] = result.best_lambda;
      summary["validation_score"] = result.best_score;
      summary["refit"] = FitSummary(fit);
      summary["test_score"] = SelectionScore(report);
      summary["slices"] = ReportJson(report);

    } else if (cmd == bench_cmd) {
      summary["inputs_fnv1a"] = Hex(Fnv1a("bench " + sizes_text));
      summary["seed"] = seed;
      const std::vector<BenchmarkRow> rows = RunBenchmark(bench);
      {
        auto csv = OpenOutput(out_path);
        WriteBenchmarkCsv(csv, rows);
        CloseOutput(csv, out_path);
      }
      Json table = Json::array();
      for (const BenchmarkSummary& s : SummarizeBenchmark(rows)) {
        table.push_back({{"n", s.num_objects},
                         {"mode", s.mode},
                         {"mean_seconds", s.mean_seconds},
                         {"std_seconds", s.std_seconds},
                         {"completed_runs", s.completed_runs}});
      }
      summary["summary"] = table;
    }

    summary["out"] = out_path;
    Emit(out, summary);
    return kExitOk;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::bad_alloc&) {
    err << "numerical error: out of memory\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "data error: " << e.what() << "\n";
    return kExitData;
  }
}

int RunCli(int argc, char** argv) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return RunCli(args, std::cout, std::cerr);
}

}  // namespace mrtf
