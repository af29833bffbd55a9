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

#ifndef MRTF_LOSSES_H_
#define MRTF_LOSSES_H_

#include <string_view>
#include <vector>

#include "mrtf/tensor_data.h"

namespace mrtf {

enum class LossKind { kQuadratic, kSmoothHinge, kLogistic };
enum class Mapping { kIdentity, kSign };

std::string_view LossName(LossKind kind);
// Accepts "quadratic", "smooth_hinge" (or "hinge") and "logistic".
LossKind ParseLossName(std::string_view name);
std::string_view MappingName(Mapping mapping);
Mapping ParseMappingName(std::string_view name);

// A loss value together with its derivative in the score x.
struct LossValue {
  double value = 0.0;
  double derivative = 0.0;
};

// 0.5 (y - x)^2.
LossValue Quadratic(double y, double x);

// h(y x) with h(z) = 1/2 - z for z <= 0, (1 - z)^2 / 2 on (0, 1), 0 for
// z >= 1. The derivative is p x - q y where p = [0 < z < 1], q = [z < 1].
// Throws DataError unless y is +1 or -1.
LossValue SmoothHinge(double y, double x);

// log(1 + exp(-y x)), evaluated without overflow. Throws DataError unless y
// is +1 or -1.
LossValue Logistic(double y, double x);

LossValue EvaluateLoss(LossKind kind, double y, double x);

// Per-slice loss and output mapping. Smooth hinge and logistic are only valid
// on binary slices; binary slices map through sign, real slices through the
// identity.
class LossAssignment {
 public:
  LossAssignment() = default;
  LossAssignment(std::vector<LossKind> losses, std::vector<Mapping> mappings);

  // `binary_loss` on every binary slice, quadratic on every real slice.
  static LossAssignment ForSlices(const std::vector<SliceType>& types,
                                  LossKind binary_loss);

  int num_slices() const { return static_cast<int>(losses_.size()); }
  LossKind loss(int k) const { return losses_.at(k); }
  Mapping mapping(int k) const { return mappings_.at(k); }

  // Throws DataError if the assignment is inconsistent with `types`.
  void ValidateFor(const std::vector<SliceType>& types) const;

  friend bool operator==(const LossAssignment&,
                         const LossAssignment&) = default;

 private:
  std::vector<LossKind> losses_;
  std::vector<Mapping> mappings_;
};

}  // namespace mrtf

#endif  // MRTF_LOSSES_H_
