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

#ifndef MRTF_OPTIMIZER_H_
#define MRTF_OPTIMIZER_H_

#include <cstdint>
#include <string_view>
#include <vector>

#include "mrtf/lbfgs.h"
#include "mrtf/losses.h"
#include "mrtf/model.h"
#include "mrtf/tensor_data.h"

namespace mrtf {

enum class InitMethod { kEigen, kRandom };
// How the r retained eigenpairs of a slice are chosen.
enum class EigenOrder { kMagnitude, kAlgebraic };

std::string_view InitMethodName(InitMethod method);
InitMethod ParseInitMethod(std::string_view name);
std::string_view EigenOrderName(EigenOrder order);
EigenOrder ParseEigenOrder(std::string_view name);

struct FitConfig {
  int rank = 10;
  double lambda = 1.0;
  LbfgsOptions lbfgs;
  InitMethod init = InitMethod::kEigen;
  EigenOrder eigen_order = EigenOrder::kMagnitude;
  std::uint64_t seed = 42;
  FactorMode mode = FactorMode::kJoint;
  // false: fill every unobserved cell with 0 at unit weight and fit
  // quadratic loss everywhere (the unweighted baseline).
  bool weighted = true;
  // Weight multiplier for positive entries of binary slices.
  double positive_weight = 1.0;

  void Validate() const;
};

struct FitTrace {
  std::vector<IterationRecord> iterations;
  Termination reason = Termination::kMaxIterations;
  int evaluations = 0;
  // Set when the eigendecomposition failed and random init was used.
  bool init_fallback = false;
  double seconds = 0.0;  // initialization plus optimization

  int num_iterations() const {
    return static_cast<int>(iterations.size()) - 1;
  }
};

struct FitResult {
  FactorModel model;
  // Assignment actually optimized, in terms of the input slice types. In
  // unweighted mode this is quadratic on every slice.
  LossAssignment losses;
  FitTrace trace;
};

// Eigendecomposition warm start. Each slice is densified with zeros at
// unobserved cells; its r eigenpairs of largest |eigenvalue| (or largest
// eigenvalue, for kAlgebraic) give R_k = diag(eigenvalues) and V_k. Each
// eigenvector is sign-canonicalized so its largest-magnitude component is
// positive. Joint mode uses A = mean_k V_k, per-slice mode A_k = V_k.
// b_k is the mean stored value of slice k (0 for an empty slice).
FactorModel EigenInit(const ObservedTensor& data, int rank, FactorMode mode,
                      EigenOrder order = EigenOrder::kMagnitude);

// A and R_k entries drawn from N(0, 0.1^2), R_k symmetrized, b_k as in
// EigenInit.
FactorModel RandomInit(const ObservedTensor& data, int rank, FactorMode mode,
                       std::uint64_t seed);

// Every cell of every slice materialized: observed cells keep their value
// with weight 1, unobserved cells get value 0 with weight 1. All slices are
// typed real, since 0 is not a binary label.
ObservedTensor MakeUnweightedBaseline(const ObservedTensor& data);

// Minimizes the objective with L-BFGS from the configured initialization.
// Deterministic for fixed inputs and seed.
FitResult Fit(const ObservedTensor& data, const LossAssignment& losses,
              const FitConfig& config);

}  // namespace mrtf

#endif  // MRTF_OPTIMIZER_H_
