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

#include "mrtf/optimizer.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "mrtf/errors.h"
#include "mrtf/objective.h"

namespace mrtf {
namespace {

double SliceMean(const SliceMatrix& slice) {
  if (slice.nnz() == 0) return 0.0;
  double sum = 0.0;
  for (double v : slice.values) sum += v;
  return sum / static_cast<double>(slice.nnz());
}

Eigen::MatrixXd Densify(const SliceMatrix& slice, int n) {
  Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (std::size_t p = slice.row_ptr[i]; p < slice.row_ptr[i + 1]; ++p) {
      dense(i, slice.cols[p]) = slice.values[p];
    }
  }
  return dense;
}

void CanonicalizeSign(Eigen::Ref<Eigen::VectorXd> v) {
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  if (v[arg] < 0.0) v = -v;
}

struct TopEigenpairs {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

TopEigenpairs SelectEigenpairs(const Eigen::MatrixXd& dense, int rank,
                               EigenOrder order) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("symmetric eigendecomposition failed");
  }
  const Eigen::VectorXd& all_values = solver.eigenvalues();
  std::vector<Eigen::Index> idx(all_values.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (order == EigenOrder::kMagnitude) {
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
      return std::abs(all_values[a]) > std::abs(all_values[b]);
    });
  } else {
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) {
      return all_values[a] > all_values[b];
    });
  }
  TopEigenpairs out;
  out.values.resize(rank);
  out.vectors.resize(dense.rows(), rank);
  for (int c = 0; c < rank; ++c) {
    out.values[c] = all_values[idx[c]];
    out.vectors.col(c) = solver.eigenvectors().col(idx[c]);
    CanonicalizeSign(out.vectors.col(c));
  }
  return out;
}

void SetBiases(const ObservedTensor& data, FactorModel* model) {
  for (int k = 0; k < data.num_slices(); ++k) {
    model->bias[k] = SliceMean(data.slice(k));
  }
}

void CheckRank(const ObservedTensor& data, int rank) {
  if (rank <= 0) throw DataError("rank must be positive");
  if (rank > data.num_objects()) {
    throw DataError("rank " + std::to_string(rank) +
                    " exceeds the number of objects");
  }
}

}  // namespace

std::string_view InitMethodName(InitMethod method) {
  return method == InitMethod::kEigen ? "eigen" : "random";
}

InitMethod ParseInitMethod(std::string_view name) {
  if (name == "eigen") return InitMethod::kEigen;
  if (name == "random") return InitMethod::kRandom;
  throw DataError("unknown init method '" + std::string(name) + "'");
}

std::string_view EigenOrderName(EigenOrder order) {
  return order == EigenOrder::kMagnitude ? "magnitude" : "algebraic";
}

EigenOrder ParseEigenOrder(std::string_view name) {
  if (name == "magnitude") return EigenOrder::kMagnitude;
  if (name == "algebraic") return EigenOrder::kAlgebraic;
  throw DataError("unknown eigenvalue order '" + std::string(name) + "'");
}

void FitConfig::Validate() const {
  if (rank <= 0) throw DataError("rank must be positive");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DataError("regularization must be finite and non-negative");
  }
  if (!(positive_weight > 0.0) || !std::isfinite(positive_weight)) {
    throw DataError("positive weight must be positive");
  }
  lbfgs.Validate();
}

FactorModel EigenInit(const ObservedTensor& data, int rank, FactorMode mode,
                      EigenOrder order) {
  CheckRank(data, rank);
  const int n = data.num_objects();
  const int m = data.num_slices();
  FactorModel model = FactorModel::Zeros(n, m, rank, mode);
  for (int k = 0; k < m; ++k) {
    TopEigenpairs top =
        SelectEigenpairs(Densify(data.slice(k), n), rank, order);
    model.interactions[k] = top.values.asDiagonal();
    if (mode == FactorMode::kJoint) {
      model.factors[0] += top.vectors;
    } else {
      model.factors[k] = std::move(top.vectors);
    }
  }
  if (mode == FactorMode::kJoint) model.factors[0] /= static_cast<double>(m);
  SetBiases(data, &model);
  return model;
}

FactorModel RandomInit(const ObservedTensor& data, int rank, FactorMode mode,
                       std::uint64_t seed) {
  CheckRank(data, rank);
  FactorModel model =
      FactorModel::Zeros(data.num_objects(), data.num_slices(), rank, mode);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 0.1);
  auto fill = [&](Eigen::MatrixXd& mat) {
    for (Eigen::Index c = 0; c < mat.cols(); ++c) {
      for (Eigen::Index r = 0; r < mat.rows(); ++r) mat(r, c) = normal(rng);
    }
  };
  for (auto& a : model.factors) fill(a);
  for (auto& rk : model.interactions) {
    fill(rk);
    rk = (0.5 * (rk + rk.transpose())).eval();
  }
  SetBiases(data, &model);
  return model;
}

ObservedTensor MakeUnweightedBaseline(const ObservedTensor& data) {
  const int n = data.num_objects();
  std::vector<SliceMatrix> slices;
  for (int k = 0; k < data.num_slices(); ++k) {
    const SliceMatrix& in = data.slice(k);
    SliceMatrix out;
    out.row_ptr.resize(n + 1);
    out.cols.resize(static_cast<std::size_t>(n) * n);
    out.values.assign(static_cast<std::size_t>(n) * n, 0.0);
    out.weights.assign(static_cast<std::size_t>(n) * n, 1.0);
    for (int i = 0; i < n; ++i) {
      const std::size_t base = static_cast<std::size_t>(i) * n;
      out.row_ptr[i] = base;
      for (int j = 0; j < n; ++j) out.cols[base + j] = j;
      for (std::size_t p = in.row_ptr[i]; p < in.row_ptr[i + 1]; ++p) {
        out.values[base + in.cols[p]] = in.values[p];
      }
    }
    out.row_ptr[n] = static_cast<std::size_t>(n) * n;
    slices.push_back(std::move(out));
  }
  return ObservedTensor::FromSlices(
      n, std::vector<SliceType>(data.num_slices(), SliceType::kReal),
      std::move(slices));
}

FitResult Fit(const ObservedTensor& data, const LossAssignment& losses,
              const FitConfig& config) {
  config.Validate();
  losses.ValidateFor(data.slice_types());
  CheckRank(data, config.rank);
  const auto start = std::chrono::steady_clock::now();

  FitResult result;
  ObservedTensor work;
  LossAssignment work_losses;
  if (config.weighted) {
    work = config.positive_weight == 1.0
               ? data
               : ApplyClassReweighting(data, config.positive_weight);
    work_losses = losses;
    result.losses = losses;
  } else {
    work = MakeUnweightedBaseline(data);
    work_losses = LossAssignment::ForSlices(work.slice_types(),
                                            LossKind::kQuadratic);
    result.losses =
        LossAssignment::ForSlices(data.slice_types(), LossKind::kQuadratic);
  }

  FactorModel model;
  if (config.init == InitMethod::kEigen) {
    try {
      model = EigenInit(work, config.rank, config.mode, config.eigen_order);
    } catch (const NumericalError&) {
      result.trace.init_fallback = true;
      model = RandomInit(work, config.rank, config.mode, config.seed);
    }
  } else {
    model = RandomInit(work, config.rank, config.mode, config.seed);
  }

  FactorModel scratch = model;
  const ObjectiveFunction objective = [&](const Eigen::VectorXd& x,
                                          Eigen::VectorXd* grad) {
    UnflattenParameters(x, &scratch);
    ObjectiveState state =
        EvaluateObjective(scratch, work, work_losses, config.lambda);
    *grad = FlattenGradient(state);
    return state.value;
  };
  LbfgsResult opt =
      MinimizeLbfgs(objective, FlattenParameters(model), config.lbfgs);

  UnflattenParameters(opt.x, &model);
  model.Validate();
  result.model = std::move(model);
  result.trace.iterations = std::move(opt.trace);
  result.trace.reason = opt.reason;
  result.trace.evaluations = opt.evaluations;
  result.trace.seconds = std::chrono::duration<double>(
                             std::chrono::steady_clock::now() - start)
                             .count();
  return result;
}

}  // namespace mrtf
