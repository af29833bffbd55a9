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

#include "mrtf/objective.h"

#include <cmath>
#include <string>

#include "mrtf/errors.h"

namespace mrtf {
namespace {

struct SliceResult {
  double loss = 0.0;
  double sum_s = 0.0;
  // (S_k A)^T, r x n.
  Eigen::MatrixXd sa_t;
};

// Accumulates the loss over the stored cells of one slice and forms S_k A.
// `a_t` is A^T and `g_t` is (A R_k)^T, both r x n so that each object's row
// is a contiguous column. The score of (i, j) is read literally as
// a_i R_k a_j^T, so the value is differentiable in every entry of R_k, not
// just along symmetric directions.
template <LossKind kKind>
SliceResult SliceKernel(const SliceMatrix& slice, const Eigen::MatrixXd& a_t,
                        const Eigen::MatrixXd& g_t, double bias) {
  const Eigen::Index n = a_t.cols();
  SliceResult out;
  out.sa_t = Eigen::MatrixXd::Zero(a_t.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    auto sa_col = out.sa_t.col(i);
    for (std::size_t p = slice.row_ptr[i]; p < slice.row_ptr[i + 1]; ++p) {
      const Eigen::Index j = slice.cols[p];
      const double x = g_t.col(i).dot(a_t.col(j)) + bias;
      LossValue l;
      if constexpr (kKind == LossKind::kQuadratic) {
        l = Quadratic(slice.values[p], x);
      } else if constexpr (kKind == LossKind::kSmoothHinge) {
        l = SmoothHinge(slice.values[p], x);
      } else {
        l = Logistic(slice.values[p], x);
      }
      const double w = slice.weights[p];
      const double s = w * l.derivative;
      out.loss += w * l.value;
      out.sum_s += s;
      sa_col.noalias() += s * a_t.col(j);
    }
  }
  return out;
}

SliceResult RunSliceKernel(LossKind kind, const SliceMatrix& slice,
                           const Eigen::MatrixXd& a_t,
                           const Eigen::MatrixXd& g_t, double bias) {
  switch (kind) {
    case LossKind::kQuadratic:
      return SliceKernel<LossKind::kQuadratic>(slice, a_t, g_t, bias);
    case LossKind::kSmoothHinge:
      return SliceKernel<LossKind::kSmoothHinge>(slice, a_t, g_t, bias);
    case LossKind::kLogistic:
      return SliceKernel<LossKind::kLogistic>(slice, a_t, g_t, bias);
  }
  return {};
}

void CheckCompatible(const FactorModel& model, const ObservedTensor& data,
                     const LossAssignment& losses, double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw DataError("regularization must be finite and non-negative");
  }
  if (model.num_objects() != data.num_objects() ||
      model.num_slices() != data.num_slices()) {
    throw DataError("model dimensions do not match the data");
  }
  losses.ValidateFor(data.slice_types());
}

}  // namespace

ObjectiveState EvaluateObjective(const FactorModel& model,
                                 const ObservedTensor& data,
                                 const LossAssignment& losses, double lambda) {
  CheckCompatible(model, data, losses, lambda);
  const int m = model.num_slices();

  ObjectiveState state;
  state.grad_bias.resize(m);
  for (const auto& a : model.factors) {
    state.value += 0.5 * lambda * a.squaredNorm();
    state.grad_factors.push_back(lambda * a);
  }

  Eigen::MatrixXd a_t;
  for (int k = 0; k < m; ++k) {
    const Eigen::MatrixXd& a = model.factors_for(k);
    const Eigen::MatrixXd& rk = model.interactions[k];
    if (k == 0 || model.mode == FactorMode::kPerSlice) a_t = a.transpose();
    const Eigen::MatrixXd g_t = rk.transpose() * a_t;

    SliceResult slice = RunSliceKernel(losses.loss(k), data.slice(k), a_t,
                                       g_t, model.bias[k]);
    if (!std::isfinite(slice.loss) || !std::isfinite(slice.sum_s)) {
      throw NumericalError("non-finite loss or derivative in slice " +
                           std::to_string(k));
    }

    state.value += 0.5 * lambda * rk.squaredNorm() + slice.loss;
    // sa_t = (S_k A)^T = A^T S_k, so sa_t * A is A^T S_k A. S_k is symmetric
    // up to rounding; symmetrizing keeps R_k exactly symmetric under updates.
    Eigen::MatrixXd atsa = slice.sa_t * a;
    atsa = (0.5 * (atsa + atsa.transpose())).eval();
    state.grad_interactions.push_back(lambda * rk + atsa);
    Eigen::MatrixXd& grad_a =
        state.grad_factors[model.mode == FactorMode::kJoint ? 0 : k];
    grad_a.noalias() += slice.sa_t.transpose() * (rk + rk.transpose());
    state.grad_bias[k] = slice.sum_s;
  }

  if (!std::isfinite(state.value)) {
    throw NumericalError("non-finite objective value");
  }
  for (int k = 0; k < m; ++k) {
    if (!state.grad_interactions[k].allFinite()) {
      throw NumericalError("non-finite gradient in slice " +
                           std::to_string(k));
    }
  }
  for (const auto& g : state.grad_factors) {
    if (!g.allFinite()) throw NumericalError("non-finite factor gradient");
  }
  return state;
}

Eigen::Index NumParameters(const FactorModel& model) {
  Eigen::Index total = model.bias.size();
  for (const auto& a : model.factors) total += a.size();
  for (const auto& r : model.interactions) total += r.size();
  return total;
}

Eigen::VectorXd FlattenParameters(const FactorModel& model) {
  Eigen::VectorXd flat(NumParameters(model));
  Eigen::Index pos = 0;
  auto put = [&](const Eigen::MatrixXd& mat) {
    flat.segment(pos, mat.size()) =
        Eigen::Map<const Eigen::VectorXd>(mat.data(), mat.size());
    pos += mat.size();
  };
  for (const auto& a : model.factors) put(a);
  for (const auto& r : model.interactions) put(r);
  flat.segment(pos, model.bias.size()) = model.bias;
  return flat;
}

void UnflattenParameters(const Eigen::Ref<const Eigen::VectorXd>& flat,
                         FactorModel* model) {
  if (flat.size() != NumParameters(*model)) {
    throw DataError("flat parameter vector has the wrong length");
  }
  Eigen::Index pos = 0;
  auto take = [&](Eigen::MatrixXd& mat) {
    Eigen::Map<Eigen::VectorXd>(mat.data(), mat.size()) =
        flat.segment(pos, mat.size());
    pos += mat.size();
  };
  for (auto& a : model->factors) take(a);
  for (auto& r : model->interactions) take(r);
  model->bias = flat.segment(pos, model->bias.size());
}

Eigen::VectorXd FlattenGradient(const ObjectiveState& state) {
  Eigen::Index total = state.grad_bias.size();
  for (const auto& g : state.grad_factors) total += g.size();
  for (const auto& g : state.grad_interactions) total += g.size();
  Eigen::VectorXd flat(total);
  Eigen::Index pos = 0;
  auto put = [&](const Eigen::MatrixXd& mat) {
    flat.segment(pos, mat.size()) =
        Eigen::Map<const Eigen::VectorXd>(mat.data(), mat.size());
    pos += mat.size();
  };
  for (const auto& g : state.grad_factors) put(g);
  for (const auto& g : state.grad_interactions) put(g);
  flat.segment(pos, state.grad_bias.size()) = state.grad_bias;
  return flat;
}

}  // namespace mrtf
