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

#include "mrtf/tensor_data.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <tuple>

#include "mrtf/errors.h"

namespace mrtf {
namespace {

std::string LocationOf(const std::vector<int>& lines, std::size_t idx) {
  if (idx < lines.size()) return "line " + std::to_string(lines[idx]) + ": ";
  return "";
}

auto Key(const Entry& e) { return std::tie(e.slice, e.row, e.col); }

void CheckHeader(int num_objects, const std::vector<SliceType>& slice_types) {
  if (num_objects <= 0) throw DataError("number of objects must be positive");
  if (slice_types.empty()) throw DataError("number of slices must be positive");
}

// Entries must be sorted by (slice, row, col) with no duplicates.
std::vector<SliceMatrix> BuildSlices(int num_objects, int num_slices,
                                     const std::vector<Entry>& sorted) {
  std::vector<SliceMatrix> slices(num_slices);
  for (auto& s : slices) s.row_ptr.assign(num_objects + 1, 0);
  for (const Entry& e : sorted) {
    SliceMatrix& s = slices[e.slice];
    ++s.row_ptr[e.row + 1];
    s.cols.push_back(e.col);
    s.values.push_back(e.value);
    s.weights.push_back(e.weight);
  }
  for (auto& s : slices) {
    std::partial_sum(s.row_ptr.begin(), s.row_ptr.end(), s.row_ptr.begin());
  }
  return slices;
}

std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string Trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

std::string_view SliceTypeName(SliceType type) {
  return type == SliceType::kBinary ? "binary" : "real";
}

SliceType ParseSliceType(std::string_view name) {
  if (name == "binary") return SliceType::kBinary;
  if (name == "real") return SliceType::kReal;
  throw DataError("unknown slice type '" + std::string(name) + "'");
}

ObservedTensor ObservedTensor::FromEntries(
    int num_objects, std::vector<SliceType> slice_types,
    std::vector<Entry> entries, const std::vector<int>& source_lines) {
  CheckHeader(num_objects, slice_types);
  const int m = static_cast<int>(slice_types.size());

  for (std::size_t idx = 0; idx < entries.size(); ++idx) {
    const Entry& e = entries[idx];
    const std::string at = LocationOf(source_lines, idx);
    if (e.slice < 0 || e.slice >= m) {
      throw DataError(at + "slice index " + std::to_string(e.slice) +
                      " out of range");
    }
    if (e.row < 0 || e.row >= num_objects || e.col < 0 ||
        e.col >= num_objects) {
      throw DataError(at + "object index out of range (" +
                      std::to_string(e.row) + ", " + std::to_string(e.col) +
                      ")");
    }
    if (!std::isfinite(e.value)) throw DataError(at + "non-finite value");
    if (!std::isfinite(e.weight) || e.weight < 0.0) {
      throw DataError(at + "weight must be finite and non-negative");
    }
    if (slice_types[e.slice] == SliceType::kBinary && e.value != 1.0 &&
        e.value != -1.0) {
      throw DataError(at + "binary value must be ±1");
    }
  }

  std::vector<std::size_t> order(entries.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return Key(entries[a]) < Key(entries[b]);
  });
  for (std::size_t p = 1; p < order.size(); ++p) {
    if (Key(entries[order[p - 1]]) == Key(entries[order[p]])) {
      const Entry& e = entries[order[p]];
      throw DataError(LocationOf(source_lines, order[p]) +
                      "duplicate entry (" + std::to_string(e.slice) + ", " +
                      std::to_string(e.row) + ", " + std::to_string(e.col) +
                      ")");
    }
  }

  std::vector<Entry> explicit_sorted;
  explicit_sorted.reserve(entries.size());
  for (std::size_t idx : order) explicit_sorted.push_back(entries[idx]);

  std::vector<Entry> all;
  all.reserve(2 * entries.size());
  for (std::size_t p = 0; p < explicit_sorted.size(); ++p) {
    const Entry& e = explicit_sorted[p];
    all.push_back(e);
    if (e.row == e.col) continue;
    Entry mirror{e.slice, e.col, e.row, e.value, e.weight};
    auto it = std::lower_bound(
        explicit_sorted.begin(), explicit_sorted.end(), mirror,
        [](const Entry& a, const Entry& b) { return Key(a) < Key(b); });
    if (it != explicit_sorted.end() && Key(*it) == Key(mirror)) {
      if (it->value != e.value || it->weight != e.weight) {
        throw DataError(LocationOf(source_lines, order[p]) +
                        "conflicting mirror values for (" +
                        std::to_string(e.slice) + ", " +
                        std::to_string(e.row) + ", " + std::to_string(e.col) +
                        ")");
      }
    } else {
      all.push_back(mirror);
    }
  }
  std::erase_if(all, [](const Entry& e) { return e.weight == 0.0; });
  std::sort(all.begin(), all.end(),
            [](const Entry& a, const Entry& b) { return Key(a) < Key(b); });

  ObservedTensor t;
  t.num_objects_ = num_objects;
  t.slices_ = BuildSlices(num_objects, m, all);
  t.slice_types_ = std::move(slice_types);
  return t;
}

ObservedTensor ObservedTensor::FromSlices(int num_objects,
                                          std::vector<SliceType> slice_types,
                                          std::vector<SliceMatrix> slices) {
  CheckHeader(num_objects, slice_types);
  if (slices.size() != slice_types.size()) {
    throw DataError("slice count does not match slice types");
  }
  const std::size_t n = num_objects;
  for (std::size_t k = 0; k < slices.size(); ++k) {
    const SliceMatrix& s = slices[k];
    const std::string where = "slice " + std::to_string(k) + ": ";
    if (s.row_ptr.size() != n + 1 || s.row_ptr.front() != 0 ||
        s.row_ptr.back() != s.cols.size() ||
        s.values.size() != s.cols.size() ||
        s.weights.size() != s.cols.size()) {
      throw DataError(where + "inconsistent storage sizes");
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (s.row_ptr[i] > s.row_ptr[i + 1]) {
        throw DataError(where + "row pointers not monotone");
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
        const int j = s.cols[p];
        if (j < 0 || j >= num_objects) {
          throw DataError(where + "column index out of range");
        }
        if (p > s.row_ptr[i] && s.cols[p - 1] >= j) {
          throw DataError(where + "columns not strictly increasing");
        }
        if (!std::isfinite(s.values[p])) {
          throw DataError(where + "non-finite value");
        }
        if (!std::isfinite(s.weights[p]) || s.weights[p] <= 0.0) {
          throw DataError(where + "stored weights must be finite and positive");
        }
        if (slice_types[k] == SliceType::kBinary && s.values[p] != 1.0 &&
            s.values[p] != -1.0) {
          throw DataError(where + "binary value must be ±1");
        }
        const auto row_begin = s.cols.begin() + s.row_ptr[j];
        const auto row_end = s.cols.begin() + s.row_ptr[j + 1];
        const auto it = std::lower_bound(row_begin, row_end,
                                         static_cast<int>(i));
        if (it == row_end || *it != static_cast<int>(i)) {
          throw DataError(where + "missing mirror entry");
        }
        const std::size_t q = it - s.cols.begin();
        if (s.values[q] != s.values[p] || s.weights[q] != s.weights[p]) {
          throw DataError(where + "conflicting mirror values");
        }
      }
    }
  }
  ObservedTensor t;
  t.num_objects_ = num_objects;
  t.slice_types_ = std::move(slice_types);
  t.slices_ = std::move(slices);
  return t;
}

std::size_t ObservedTensor::num_entries() const {
  std::size_t total = 0;
  for (const auto& s : slices_) total += s.nnz();
  return total;
}

std::vector<Entry> ObservedTensor::Entries() const {
  std::vector<Entry> out;
  out.reserve(num_entries());
  for (int k = 0; k < num_slices(); ++k) {
    const SliceMatrix& s = slices_[k];
    for (int i = 0; i < num_objects_; ++i) {
      for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
        out.push_back({k, i, s.cols[p], s.values[p], s.weights[p]});
      }
    }
  }
  return out;
}

std::vector<Entry> ObservedTensor::UnorderedPairs() const {
  std::vector<Entry> out;
  for (int k = 0; k < num_slices(); ++k) {
    const SliceMatrix& s = slices_[k];
    for (int i = 0; i < num_objects_; ++i) {
      for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
        if (s.cols[p] >= i) {
          out.push_back({k, i, s.cols[p], s.values[p], s.weights[p]});
        }
      }
    }
  }
  return out;
}

bool ObservedTensor::all_binary() const {
  return std::all_of(slice_types_.begin(), slice_types_.end(),
                     [](SliceType t) { return t == SliceType::kBinary; });
}

ObservedTensor ReadTensor(std::istream& in) {
  std::string raw;
  int line_no = 0;

  // Next non-comment, non-blank line; the first line is always returned.
  auto next_line = [&](bool skip_comments, std::string* out) {
    while (std::getline(in, raw)) {
      ++line_no;
      std::string line = Trim(raw);
      if (skip_comments && (line.empty() || line[0] == '#')) continue;
      *out = std::move(line);
      return true;
    }
    return false;
  };

  std::string line;
  if (!next_line(false, &line)) throw ParseError(0, "empty input");
  if (line != "#mrtensor v1") {
    throw ParseError(line_no, "expected '#mrtensor v1' header");
  }

  auto read_count = [&](const char* tag) {
    if (!next_line(true, &line)) {
      throw ParseError(0, std::string("unexpected end of input, expected '") +
                              tag + "'");
    }
    std::istringstream ss(line);
    std::string word;
    long long value = 0;
    std::string rest;
    if (!(ss >> word >> value) || word != tag || (ss >> rest)) {
      throw ParseError(line_no, std::string("expected '") + tag + " <count>'");
    }
    if (value <= 0 || value > (1LL << 30)) {
      throw ParseError(line_no, std::string(tag) + " must be positive");
    }
    return static_cast<int>(value);
  };

  const int n = read_count("n");
  const int m = read_count("m");

  std::vector<SliceType> types(m);
  std::vector<bool> seen(m, false);
  for (int s = 0; s < m; ++s) {
    if (!next_line(true, &line)) {
      throw ParseError(0, "unexpected end of input in slice declarations");
    }
    std::istringstream ss(line);
    std::string word, type_name, rest;
    int k = -1;
    if (!(ss >> word >> k >> type_name) || word != "slice" || (ss >> rest)) {
      throw ParseError(line_no, "expected 'slice <k> <binary|real>'");
    }
    if (k < 0 || k >= m) throw ParseError(line_no, "slice index out of range");
    if (seen[k]) throw ParseError(line_no, "slice declared twice");
    seen[k] = true;
    try {
      types[k] = ParseSliceType(type_name);
    } catch (const DataError& e) {
      throw ParseError(line_no, e.what());
    }
  }

  std::vector<Entry> entries;
  std::vector<int> lines;
  while (next_line(true, &line)) {
    std::istringstream ss(line);
    Entry e;
    std::string rest;
    if (!(ss >> e.slice >> e.row >> e.col >> e.value)) {
      throw ParseError(line_no, "expected '<k> <i> <j> <value> [<weight>]'");
    }
    if (!(ss >> e.weight)) {
      if (!ss.eof()) {
        throw ParseError(line_no, "malformed weight");
      }
      e.weight = 1.0;
    }
    if (ss >> rest) throw ParseError(line_no, "trailing characters");
    entries.push_back(e);
    lines.push_back(line_no);
  }

  try {
    return ObservedTensor::FromEntries(n, std::move(types), std::move(entries),
                                       lines);
  } catch (const ParseError&) {
    throw;
  } catch (const DataError& e) {
    throw ParseError(0, e.what());
  }
}

ObservedTensor ReadTensorFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return ReadTensor(in);
}

void WriteTensor(std::ostream& out, const ObservedTensor& tensor) {
  out << "#mrtensor v1\n";
  out << "n " << tensor.num_objects() << "\n";
  out << "m " << tensor.num_slices() << "\n";
  for (int k = 0; k < tensor.num_slices(); ++k) {
    out << "slice " << k << " " << SliceTypeName(tensor.slice_type(k)) << "\n";
  }
  for (const Entry& e : tensor.UnorderedPairs()) {
    out << e.slice << " " << e.row << " " << e.col << " "
        << FormatNumber(e.value) << " " << FormatNumber(e.weight) << "\n";
  }
}

void WriteTensorFile(const std::string& path, const ObservedTensor& tensor) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  WriteTensor(out, tensor);
  if (!out) throw DataError("write failed for " + path);
}

void SplitSpec::Validate() const {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw DataError("train fraction must lie in (0, 1]");
  }
  if (!(validation_fraction_of_train >= 0.0 &&
        validation_fraction_of_train < 1.0)) {
    throw DataError("validation fraction must lie in [0, 1)");
  }
}

SplitResult Split(const ObservedTensor& tensor, const SplitSpec& spec) {
  spec.Validate();
  const int n = tensor.num_objects();
  const int m = tensor.num_slices();
  enum Part : unsigned char { kTrain, kValidation, kTest, kDropped };

  std::vector<SliceMatrix> parts[3];
  for (int k = 0; k < m; ++k) {
    const SliceMatrix& s = tensor.slice(k);

    // Storage positions of the sampled pairs, row-major. Unsampled
    // diagonal cells keep kDropped.
    std::vector<std::size_t> pair_pos;
    for (int i = 0; i < n; ++i) {
      for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
        const int j = s.cols[p];
        if (j > i || (j == i && spec.include_diagonal)) pair_pos.push_back(p);
      }
    }
    const std::size_t num_pairs = pair_pos.size();
    const auto num_train =
        static_cast<std::size_t>(std::floor(spec.train_fraction * num_pairs));
    const auto num_val = static_cast<std::size_t>(
        std::floor(spec.validation_fraction_of_train * num_train));
    if (num_pairs > 0 && num_train == 0) {
      throw DataError("degenerate split: slice " + std::to_string(k) +
                      " receives no training pairs");
    }

    std::vector<std::size_t> perm(num_pairs);
    std::iota(perm.begin(), perm.end(), 0);
    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed & 0xffffffffu),
                      static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    std::shuffle(perm.begin(), perm.end(), rng);

    std::vector<unsigned char> label(s.nnz(), kDropped);
    for (std::size_t pos = 0; pos < num_pairs; ++pos) {
      label[pair_pos[perm[pos]]] =
          pos < num_val ? kValidation : pos < num_train ? kTrain : kTest;
    }
    // Lower-triangle entries follow their mirror.
    for (int i = 0; i < n; ++i) {
      for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
        const int j = s.cols[p];
        if (j >= i) continue;
        const auto first = s.cols.begin() + s.row_ptr[j];
        const auto last = s.cols.begin() + s.row_ptr[j + 1];
        label[p] = label[std::lower_bound(first, last, i) - s.cols.begin()];
      }
    }

    for (int part = 0; part < 3; ++part) {
      SliceMatrix out;
      out.row_ptr.assign(n + 1, 0);
      for (int i = 0; i < n; ++i) {
        for (std::size_t p = s.row_ptr[i]; p < s.row_ptr[i + 1]; ++p) {
          if (label[p] != part) continue;
          out.cols.push_back(s.cols[p]);
          out.values.push_back(s.values[p]);
          out.weights.push_back(s.weights[p]);
        }
        out.row_ptr[i + 1] = out.cols.size();
      }
      parts[part].push_back(std::move(out));
    }
  }

  const auto& types = tensor.slice_types();
  return {ObservedTensor::FromSlices(n, types, std::move(parts[kTrain])),
          ObservedTensor::FromSlices(n, types, std::move(parts[kValidation])),
          ObservedTensor::FromSlices(n, types, std::move(parts[kTest]))};
}

ObservedTensor ApplyClassReweighting(const ObservedTensor& tensor,
                                     double positive_multiplier) {
  if (!(positive_multiplier > 0.0) || !std::isfinite(positive_multiplier)) {
    throw DataError("positive-class multiplier must be positive");
  }
  std::vector<SliceMatrix> slices;
  for (int k = 0; k < tensor.num_slices(); ++k) {
    SliceMatrix s = tensor.slice(k);
    if (tensor.slice_type(k) == SliceType::kBinary) {
      for (std::size_t p = 0; p < s.nnz(); ++p) {
        if (s.values[p] == 1.0) s.weights[p] *= positive_multiplier;
      }
    }
    slices.push_back(std::move(s));
  }
  return ObservedTensor::FromSlices(tensor.num_objects(), tensor.slice_types(),
                                    std::move(slices));
}

ObservedTensor Merge(const ObservedTensor& a, const ObservedTensor& b) {
  if (a.num_objects() != b.num_objects() ||
      a.slice_types() != b.slice_types()) {
    throw DataError("cannot merge tensors with different shapes");
  }
  std::vector<Entry> all = a.Entries();
  std::vector<Entry> more = b.Entries();
  all.insert(all.end(), more.begin(), more.end());
  // Both inputs are already symmetric, so duplicates can only be overlaps.
  return ObservedTensor::FromEntries(a.num_objects(), a.slice_types(),
                                     std::move(all));
}

}  // namespace mrtf
