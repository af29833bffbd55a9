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

// Low-rank factor model X_k = A R_k A^T + b_k.
//
// In joint mode a single factor matrix A (n x r) is shared by all slices, so
// every relation is scored from the same per-object embeddings. In per-slice
// mode each slice owns its own A_k and no information crosses slices.

#ifndef MRTF_MODEL_H_
#define MRTF_MODEL_H_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "mrtf/losses.h"
#include "mrtf/tensor_data.h"

namespace mrtf {

enum class FactorMode { kJoint, kPerSlice };

std::string_view FactorModeName(FactorMode mode);
FactorMode ParseFactorMode(std::string_view name);

struct FactorModel {
  FactorMode mode = FactorMode::kJoint;
  // One matrix in joint mode, one per slice in per-slice mode; each n x r.
  std::vector<Eigen::MatrixXd> factors;
  // One symmetric r x r matrix per slice.
  std::vector<Eigen::MatrixXd> interactions;
  Eigen::VectorXd bias;

  // Zero-initialized model with validated dimensions.
  static FactorModel Zeros(int num_objects, int num_slices, int rank,
                           FactorMode mode);

  int num_objects() const;
  int num_slices() const { return static_cast<int>(interactions.size()); }
  int rank() const;

  // The factor matrix that scores slice k.
  const Eigen::MatrixXd& factors_for(int k) const {
    return mode == FactorMode::kJoint ? factors[0] : factors[k];
  }

  // Throws DataError on inconsistent dimensions, rank 0, non-finite values
  // or an interaction matrix that is not symmetric to within
  // 1e-8 * (1 + ||R_k||_F).
  void Validate() const;

  friend bool operator==(const FactorModel& a, const FactorModel& b);
};

// a_i R_k a_j^T + b_k. The product is always formed with the smaller index on
// the left so that score(i, j) and score(j, i) are bitwise identical.
double PredictScore(const FactorModel& model, int i, int j, int k);

// Sign of the score on binary slices (0 maps to +1), the score itself on real
// slices.
double PredictLabel(const FactorModel& model, int i, int j, int k,
                    SliceType type);

// Scores for many pairs of one slice, via the cached product A R_k.
std::vector<double> PredictScores(const FactorModel& model, int k,
                                  const std::vector<std::pair<int, int>>& pairs);

// A model together with the loss assignment it was trained with, as stored in
// mrmodel v1 files.
struct ModelFile {
  FactorModel model;
  LossAssignment losses;

  friend bool operator==(const ModelFile&, const ModelFile&) = default;
};

void WriteModel(std::ostream& out, const FactorModel& model,
                const LossAssignment& losses);
void WriteModelFile(const std::string& path, const FactorModel& model,
                    const LossAssignment& losses);
ModelFile ReadModel(std::istream& in);
ModelFile ReadModelFile(const std::string& path);

}  // namespace mrtf

#endif  // MRTF_MODEL_H_
