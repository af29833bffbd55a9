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

#include "mrtf/synthgen.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "mrtf/errors.h"

namespace mrtf {
namespace {

// Upper-triangle values, diagonal included, row-major.
std::vector<double> UpperValues(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  std::vector<double> out;
  out.reserve(n * (n + 1) / 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i; j < n; ++j) out.push_back(x(i, j));
  }
  return out;
}

double NearestRankPercentile(std::vector<double> values, double percentile) {
  const auto count = values.size();
  auto rank = static_cast<std::size_t>(
      std::ceil(percentile / 100.0 * static_cast<double>(count)));
  rank = std::clamp<std::size_t>(rank, 1, count);
  std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
  return values[rank - 1];
}

double SampleStd(const std::vector<double>& values) {
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

// CSR storage of every cell of a dense symmetric slice at unit weight.
SliceMatrix FullSlice(const Eigen::MatrixXd& y) {
  const Eigen::Index n = y.rows();
  SliceMatrix s;
  const std::size_t nnz = static_cast<std::size_t>(n) * n;
  s.row_ptr.resize(n + 1);
  s.cols.reserve(nnz);
  s.values.reserve(nnz);
  s.weights.assign(nnz, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    s.row_ptr[i] = s.cols.size();
    for (Eigen::Index j = 0; j < n; ++j) {
      s.cols.push_back(static_cast<int>(j));
      // y is column-major and symmetric, so read (j, i) for locality.
      s.values.push_back(y(j, i));
    }
  }
  s.row_ptr[n] = s.cols.size();
  return s;
}

}  // namespace

void SynthConfig::Validate() const {
  if (num_objects < 2) throw DataError("need at least two objects");
  if (num_binary_slices < 0 || num_real_slices < 0 ||
      num_binary_slices + num_real_slices < 1) {
    throw DataError("need at least one slice");
  }
  if (rank <= 0 || rank > num_objects) {
    throw DataError("rank must lie in [1, number of objects]");
  }
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw DataError("noise standard deviation must be non-negative");
  }
  if (!(positive_percentile > 0.0 && positive_percentile < 100.0)) {
    throw DataError("percentile must lie in (0, 100)");
  }
}

SynthResult GenerateSynthetic(const SynthConfig& config) {
  config.Validate();
  const int n = config.num_objects;
  const int r = config.rank;
  const int m = config.num_binary_slices + config.num_real_slices;

  std::mt19937_64 rng(config.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  auto fill = [&](Eigen::MatrixXd& mat) {
    for (Eigen::Index c = 0; c < mat.cols(); ++c) {
      for (Eigen::Index i = 0; i < mat.rows(); ++i) mat(i, c) = normal(rng);
    }
  };

  SynthResult out;
  out.planted = FactorModel::Zeros(n, m, r, FactorMode::kJoint);
  Eigen::MatrixXd& a = out.planted.factors[0];
  fill(a);

  std::vector<SliceType> types;
  std::vector<SliceMatrix> slices;
  for (int k = 0; k < m; ++k) {
    const bool binary = k < config.num_binary_slices;
    Eigen::MatrixXd rk(r, r);
    fill(rk);
    rk = (0.5 * (rk + rk.transpose())).eval();

    Eigen::MatrixXd x = a * rk * a.transpose();
    // Exact symmetry regardless of how the product was blocked.
    x = (0.5 * (x + x.transpose())).eval();
    if (config.noise_std > 0.0) {
      std::normal_distribution<double> noise(0.0, config.noise_std);
      for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
          const double e = noise(rng);
          x(i, j) += e;
          if (j != i) x(j, i) += e;
        }
      }
    }

    const std::vector<double> upper = UpperValues(x);
    if (binary) {
      const double threshold =
          NearestRankPercentile(upper, config.positive_percentile);
      x = (x.array() > threshold).select(Eigen::MatrixXd::Ones(n, n),
                                         -Eigen::MatrixXd::Ones(n, n));
      out.planted.bias[k] = -threshold;
      types.push_back(SliceType::kBinary);
    } else {
      const double sd = SampleStd(upper);
      if (!(sd > 0.0)) throw NumericalError("real slice has zero variance");
      x /= sd;
      rk /= sd;
      types.push_back(SliceType::kReal);
    }
    out.planted.interactions[k] = rk;
    slices.push_back(FullSlice(x));
  }
  out.full = ObservedTensor::FromSlices(n, std::move(types), std::move(slices));
  return out;
}

}  // namespace mrtf
