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

#include "mrtf/losses.h"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrtf/errors.h"

namespace mrtf {
namespace {

void RequireSignLabel(double y) {
  if (y != 1.0 && y != -1.0) {
    throw DataError("binary label must be ±1, got " + std::to_string(y));
  }
}

}  // namespace

std::string_view LossName(LossKind kind) {
  switch (kind) {
    case LossKind::kQuadratic:
      return "quadratic";
    case LossKind::kSmoothHinge:
      return "smooth_hinge";
    case LossKind::kLogistic:
      return "logistic";
  }
  return "unknown";
}

LossKind ParseLossName(std::string_view name) {
  if (name == "quadratic") return LossKind::kQuadratic;
  if (name == "smooth_hinge" || name == "hinge") return LossKind::kSmoothHinge;
  if (name == "logistic") return LossKind::kLogistic;
  throw DataError("unknown loss '" + std::string(name) + "'");
}

std::string_view MappingName(Mapping mapping) {
  return mapping == Mapping::kSign ? "sign" : "identity";
}

Mapping ParseMappingName(std::string_view name) {
  if (name == "sign") return Mapping::kSign;
  if (name == "identity") return Mapping::kIdentity;
  throw DataError("unknown mapping '" + std::string(name) + "'");
}

LossValue Quadratic(double y, double x) {
  const double r = x - y;
  return {0.5 * r * r, r};
}

LossValue SmoothHinge(double y, double x) {
  RequireSignLabel(y);
  const double z = y * x;
  if (z <= 0.0) return {0.5 - z, -y};
  if (z < 1.0) {
    const double gap = 1.0 - z;
    return {0.5 * gap * gap, x - y};
  }
  return {0.0, 0.0};
}

LossValue Logistic(double y, double x) {
  RequireSignLabel(y);
  const double z = y * x;
  // log(1 + e^{-z}) = max(-z, 0) + log1p(e^{-|z|}).
  const double value = std::max(-z, 0.0) + std::log1p(std::exp(-std::abs(z)));
  // 1 / (1 + e^{z}), split by sign so the exponential never overflows.
  double sigma;
  if (z >= 0.0) {
    const double t = std::exp(-z);
    sigma = t / (1.0 + t);
  } else {
    sigma = 1.0 / (1.0 + std::exp(z));
  }
  return {value, -y * sigma};
}

LossValue EvaluateLoss(LossKind kind, double y, double x) {
  switch (kind) {
    case LossKind::kQuadratic:
      return Quadratic(y, x);
    case LossKind::kSmoothHinge:
      return SmoothHinge(y, x);
    case LossKind::kLogistic:
      return Logistic(y, x);
  }
  return {};
}

LossAssignment::LossAssignment(std::vector<LossKind> losses,
                               std::vector<Mapping> mappings)
    : losses_(std::move(losses)), mappings_(std::move(mappings)) {
  if (losses_.size() != mappings_.size()) {
    throw DataError("loss and mapping lists differ in length");
  }
  for (std::size_t k = 0; k < losses_.size(); ++k) {
    if (losses_[k] != LossKind::kQuadratic && mappings_[k] != Mapping::kSign) {
      throw DataError("slice " + std::to_string(k) + ": " +
                      std::string(LossName(losses_[k])) +
                      " requires the sign mapping");
    }
  }
}

LossAssignment LossAssignment::ForSlices(const std::vector<SliceType>& types,
                                         LossKind binary_loss) {
  std::vector<LossKind> losses;
  std::vector<Mapping> mappings;
  for (SliceType t : types) {
    if (t == SliceType::kBinary) {
      losses.push_back(binary_loss);
      mappings.push_back(Mapping::kSign);
    } else {
      losses.push_back(LossKind::kQuadratic);
      mappings.push_back(Mapping::kIdentity);
    }
  }
  return LossAssignment(std::move(losses), std::move(mappings));
}

void LossAssignment::ValidateFor(const std::vector<SliceType>& types) const {
  if (types.size() != losses_.size()) {
    throw DataError("loss assignment covers " +
                    std::to_string(losses_.size()) + " slices, data has " +
                    std::to_string(types.size()));
  }
  for (std::size_t k = 0; k < types.size(); ++k) {
    const bool binary = types[k] == SliceType::kBinary;
    if (binary != (mappings_[k] == Mapping::kSign)) {
      throw DataError("slice " + std::to_string(k) + ": mapping " +
                      std::string(MappingName(mappings_[k])) +
                      " does not match a " +
                      std::string(SliceTypeName(types[k])) + " slice");
    }
    if (!binary && losses_[k] != LossKind::kQuadratic) {
      throw DataError("slice " + std::to_string(k) + ": " +
                      std::string(LossName(losses_[k])) +
                      " is only defined for binary slices");
    }
  }
}

}  // namespace mrtf
