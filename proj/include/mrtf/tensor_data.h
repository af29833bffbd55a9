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

// Sparse, symmetric, partially observed 3-mode tensors.
//
// A tensor holds n objects and m slices (relations). Each slice stores only
// its observed cells; an unobserved cell is simply absent and carries weight
// zero implicitly. Both mirror cells (i,j) and (j,i) of an observation are
// stored, so sums over stored entries match sums over the full weighted
// matrix.

#ifndef MRTF_TENSOR_DATA_H_
#define MRTF_TENSOR_DATA_H_

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace mrtf {

enum class SliceType { kBinary, kReal };

std::string_view SliceTypeName(SliceType type);
// Throws DataError on anything other than "binary" or "real".
SliceType ParseSliceType(std::string_view name);

struct Entry {
  int slice = 0;
  int row = 0;
  int col = 0;
  double value = 0.0;
  double weight = 1.0;

  friend bool operator==(const Entry&, const Entry&) = default;
};

// Row-compressed storage of one slice. Columns are strictly increasing
// within a row.
struct SliceMatrix {
  std::vector<std::size_t> row_ptr;  // size n + 1
  std::vector<int> cols;
  std::vector<double> values;
  std::vector<double> weights;

  std::size_t nnz() const { return cols.size(); }

  friend bool operator==(const SliceMatrix&, const SliceMatrix&) = default;
};

class ObservedTensor {
 public:
  ObservedTensor() = default;

  // Builds a validated tensor from a list of observations. Each unordered
  // pair may be given once (the mirror is added) or twice (the two copies
  // must agree). Zero-weight entries are dropped. `source_lines`, when
  // non-empty, is parallel to `entries` and is used for error messages.
  static ObservedTensor FromEntries(int num_objects,
                                    std::vector<SliceType> slice_types,
                                    std::vector<Entry> entries,
                                    const std::vector<int>& source_lines = {});

  // Adopts already-built slice storage after validating every invariant,
  // including mirror symmetry.
  static ObservedTensor FromSlices(int num_objects,
                                   std::vector<SliceType> slice_types,
                                   std::vector<SliceMatrix> slices);

  int num_objects() const { return num_objects_; }
  int num_slices() const { return static_cast<int>(slice_types_.size()); }
  SliceType slice_type(int k) const { return slice_types_.at(k); }
  const std::vector<SliceType>& slice_types() const { return slice_types_; }
  const SliceMatrix& slice(int k) const { return slices_.at(k); }

  // Total stored entries across slices, mirrors included.
  std::size_t num_entries() const;

  // Stored entries in (slice, row, col) order.
  std::vector<Entry> Entries() const;

  // Entries with row <= col, i.e. one per unordered pair.
  std::vector<Entry> UnorderedPairs() const;

  bool all_binary() const;

  friend bool operator==(const ObservedTensor&,
                         const ObservedTensor&) = default;

 private:
  int num_objects_ = 0;
  std::vector<SliceType> slice_types_;
  std::vector<SliceMatrix> slices_;
};

// mrtensor v1 text format.
ObservedTensor ReadTensor(std::istream& in);
ObservedTensor ReadTensorFile(const std::string& path);
void WriteTensor(std::ostream& out, const ObservedTensor& tensor);
void WriteTensorFile(const std::string& path, const ObservedTensor& tensor);

struct SplitSpec {
  double train_fraction = 1.0;
  double validation_fraction_of_train = 0.25;
  std::uint64_t seed = 42;
  // Off: diagonal cells (i, i) are not sampled and appear in no part.
  bool include_diagonal = false;

  void Validate() const;
};

struct SplitResult {
  ObservedTensor train;
  ObservedTensor validation;
  ObservedTensor test;
};

// Partitions the unordered pairs of every slice independently. For a slice
// with P pairs, T = floor(train_fraction * P) pairs are drawn uniformly
// without replacement; V = floor(validation_fraction_of_train * T) of them
// form the validation set, the other T - V the training set, and the
// remaining P - T pairs the test set. Mirrors always share a partition.
//
// Only pairs with row < col are sampled unless include_diagonal is set.
//
// Slice k draws from std::mt19937_64 seeded with
// std::seed_seq{seed & 0xffffffff, seed >> 32, k}; the sampled pairs (in storage
// order) are permuted with std::shuffle, and permuted positions
// [0, V) go to validation, [V, T) to train, [T, P) to test.
SplitResult Split(const ObservedTensor& tensor, const SplitSpec& spec);

// Multiplies the weight of every positive entry on a binary slice.
ObservedTensor ApplyClassReweighting(const ObservedTensor& tensor,
                                     double positive_multiplier);

// Union of two tensors over the same objects and slices. Overlapping cells
// are an error.
ObservedTensor Merge(const ObservedTensor& a, const ObservedTensor& b);

}  // namespace mrtf

#endif  // MRTF_TENSOR_DATA_H_
