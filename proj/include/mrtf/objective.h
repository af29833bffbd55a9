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

// Weighted, per-slice-modular training objective
//
//   F = lambda/2 ||A||^2 + sum_k [ lambda/2 ||R_k||^2
//                                  + sum_{(i,j) stored} w_ijk l_k(y_ijk, x_ijk) ]
//
// and its gradients. With S_k the sparse matrix of w_ijk * dl_k/dx on the
// stored cells of slice k:
//
//   dF/dA   = lambda A + sum_k 2 S_k A R_k^T
//   dF/dR_k = lambda R_k + A^T S_k A
//   dF/db_k = sum of the entries of S_k
//
// The biases are not regularized. Only stored cells are touched, so one
// evaluation costs O(m n_w r + m n r^2). In per-slice mode each slice uses its
// own A_k, contributes lambda/2 ||A_k||^2, and the A-gradient sum collapses to
// that slice.

#ifndef MRTF_OBJECTIVE_H_
#define MRTF_OBJECTIVE_H_

#include <vector>

#include <Eigen/Dense>

#include "mrtf/losses.h"
#include "mrtf/model.h"
#include "mrtf/tensor_data.h"

namespace mrtf {

struct ObjectiveState {
  double value = 0.0;
  std::vector<Eigen::MatrixXd> grad_factors;       // shaped like factors
  std::vector<Eigen::MatrixXd> grad_interactions;  // shaped like interactions
  Eigen::VectorXd grad_bias;
};

// Throws DataError on dimension or loss/slice-type mismatch and
// NumericalError (naming the slice) if a NaN or Inf appears.
ObjectiveState EvaluateObjective(const FactorModel& model,
                                 const ObservedTensor& data,
                                 const LossAssignment& losses, double lambda);

// Flat parameter vector: every factor matrix (column-major, in order), then
// every R_k (column-major), then b.
Eigen::Index NumParameters(const FactorModel& model);
Eigen::VectorXd FlattenParameters(const FactorModel& model);
// `model` supplies the shapes; its values are overwritten.
void UnflattenParameters(const Eigen::Ref<const Eigen::VectorXd>& flat,
                         FactorModel* model);
// Same layout as FlattenParameters.
Eigen::VectorXd FlattenGradient(const ObjectiveState& state);

}  // namespace mrtf

#endif  // MRTF_OBJECTIVE_H_
