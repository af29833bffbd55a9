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

// Synthetic multi-relational tensors with planted low-rank structure.
//
// Each slice starts from X_k = A R_k A^T + E_k with A, R_k standard normal
// (R_k symmetrized) and E_k symmetric N(0, noise_std^2) noise. Binary slices
// are thresholded at a percentile of their values; real slices are rescaled
// to unit standard deviation. Binary slices come first, then real slices.

#ifndef MRTF_SYNTHGEN_H_
#define MRTF_SYNTHGEN_H_

#include <cstdint>

#include "mrtf/model.h"
#include "mrtf/tensor_data.h"

namespace mrtf {

struct SynthConfig {
  int num_objects = 200;
  int num_binary_slices = 3;
  int num_real_slices = 0;
  int rank = 10;
  double noise_std = 0.1;
  double positive_percentile = 90.0;
  std::uint64_t seed = 42;

  void Validate() const;
};

struct SynthResult {
  // Every cell, diagonal included, observed at weight 1.
  ObservedTensor full;
  // Noise-free generating model. For binary slices b_k is minus the
  // threshold, so the sign of the planted score reproduces the noise-free
  // labels; for real slices R_k and b_k carry the rescaling.
  FactorModel planted;
};

// Statistics (percentile threshold, standard deviation) are taken over the
// upper triangle i <= j, diagonal included. The threshold uses the
// nearest-rank method: the ceil(p/100 * N)-th smallest value; values strictly
// above it become +1. The standard deviation is the sample one (divide by
// N - 1).
SynthResult GenerateSynthetic(const SynthConfig& config);

}  // namespace mrtf

#endif  // MRTF_SYNTHGEN_H_
