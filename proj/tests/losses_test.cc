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

#include <cmath>

#include <gtest/gtest.h>

#include "mrtf/errors.h"

namespace mrtf {
namespace {

void ExpectLoss(LossValue got, double value, double derivative) {
  EXPECT_DOUBLE_EQ(got.value, value);
  EXPECT_DOUBLE_EQ(got.derivative, derivative);
}

TEST(QuadraticTest, Examples) {
  ExpectLoss(Quadratic(2, 1), 0.5, -1);
  ExpectLoss(Quadratic(-0.7, -0.7), 0, 0);
  ExpectLoss(Quadratic(0, 3), 4.5, 3);
}

TEST(SmoothHingeTest, Examples) {
  ExpectLoss(SmoothHinge(1, 0), 0.5, -1);
  ExpectLoss(SmoothHinge(1, 1), 0, 0);
  ExpectLoss(SmoothHinge(1, 0.5), 0.125, -0.5);
  ExpectLoss(SmoothHinge(-1, 0.5), 1.0, 1);
  ExpectLoss(SmoothHinge(-1, -3), 0, 0);
  EXPECT_THROW(SmoothHinge(0.5, 1), DataError);
}

TEST(LogisticTest, Examples) {
  ExpectLoss(Logistic(1, 0), std::log(2.0), -0.5);
  const LossValue far = Logistic(1, 50);
  EXPECT_LT(far.value, 1e-20);
  EXPECT_LT(std::abs(far.derivative), 1e-20);
  const LossValue at = Logistic(1, -1);
  EXPECT_NEAR(at.value, 1.313261687518222834, 1e-15);
  EXPECT_NEAR(at.derivative, -0.731058578630004879, 1e-15);
  EXPECT_THROW(Logistic(2, 1), DataError);
}

TEST(LogisticTest, NoOverflow) {
  const LossValue big = Logistic(-1, 1000);
  EXPECT_DOUBLE_EQ(big.value, 1000.0);
  EXPECT_DOUBLE_EQ(big.derivative, 1.0);
  EXPECT_TRUE(std::isfinite(Logistic(1, -1e308).value));
}

// Central differences away from the hinge kinks.
TEST(LossTest, DerivativeMatchesDifferences) {
  const double h = 1e-6;
  for (LossKind kind :
       {LossKind::kQuadratic, LossKind::kSmoothHinge, LossKind::kLogistic}) {
    for (double y : {-1.0, 1.0}) {
      for (double x : {-2.3, -0.4, 0.3, 0.77, 1.6}) {
        const double fd = (EvaluateLoss(kind, y, x + h).value -
                           EvaluateLoss(kind, y, x - h).value) /
                          (2 * h);
        EXPECT_NEAR(EvaluateLoss(kind, y, x).derivative, fd, 1e-7)
            << LossName(kind) << " y=" << y << " x=" << x;
      }
    }
  }
}

TEST(LossNamesTest, RoundTrip) {
  for (LossKind kind :
       {LossKind::kQuadratic, LossKind::kSmoothHinge, LossKind::kLogistic}) {
    EXPECT_EQ(ParseLossName(LossName(kind)), kind);
  }
  EXPECT_EQ(ParseLossName("hinge"), LossKind::kSmoothHinge);
  EXPECT_THROW(ParseLossName("l1"), DataError);
  EXPECT_EQ(ParseMappingName(MappingName(Mapping::kSign)), Mapping::kSign);
}

TEST(LossAssignmentTest, ForSlicesAndValidation) {
  const std::vector<SliceType> types = {SliceType::kBinary, SliceType::kReal};
  const LossAssignment a =
      LossAssignment::ForSlices(types, LossKind::kLogistic);
  EXPECT_EQ(a.loss(0), LossKind::kLogistic);
  EXPECT_EQ(a.mapping(0), Mapping::kSign);
  EXPECT_EQ(a.loss(1), LossKind::kQuadratic);
  EXPECT_EQ(a.mapping(1), Mapping::kIdentity);
  EXPECT_NO_THROW(a.ValidateFor(types));
  EXPECT_THROW(a.ValidateFor({SliceType::kReal, SliceType::kReal}), DataError);
  EXPECT_THROW(a.ValidateFor({SliceType::kBinary}), DataError);
  EXPECT_THROW(LossAssignment({LossKind::kSmoothHinge}, {Mapping::kIdentity}),
               DataError);
}

}  // namespace
}  // namespace mrtf
