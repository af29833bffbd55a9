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

#include "mrtf/model.h"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "mrtf/errors.h"

namespace mrtf {
namespace {

void CheckIndex(const FactorModel& model, int i, int j, int k) {
  const int n = model.num_objects();
  if (i < 0 || i >= n || j < 0 || j >= n || k < 0 ||
      k >= model.num_slices()) {
    throw DataError("index out of range (" + std::to_string(i) + ", " +
                    std::to_string(j) + ", " + std::to_string(k) + ")");
  }
}

void AppendNumber(std::string* line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  if (!line->empty()) line->push_back(' ');
  line->append(buf);
}

void WriteMatrix(std::ostream& out, const Eigen::MatrixXd& mat) {
  for (Eigen::Index i = 0; i < mat.rows(); ++i) {
    std::string line;
    for (Eigen::Index j = 0; j < mat.cols(); ++j) AppendNumber(&line, mat(i, j));
    out << line << "\n";
  }
}

// Line-oriented reader that skips blank lines and tracks line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string Next(const char* expecting) {
    std::string raw;
    while (std::getline(in_, raw)) {
      ++line_no_;
      if (!raw.empty() && raw.back() == '\r') raw.pop_back();
      if (raw.find_first_not_of(" \t") == std::string::npos) continue;
      return raw;
    }
    throw ParseError(0, std::string("truncated model file, expected ") +
                            expecting);
  }

  // "<tag> <integer>"
  long long Tagged(const char* tag) {
    std::istringstream ss(Next(tag));
    std::string word, rest;
    long long value = 0;
    if (!(ss >> word >> value) || word != tag || (ss >> rest)) {
      throw ParseError(line_no_, std::string("expected '") + tag + " <int>'");
    }
    return value;
  }

  void Expect(const std::string& exact) {
    std::string line = Next(exact.c_str());
    const auto end = line.find_last_not_of(" \t");
    line.erase(end + 1);
    if (line != exact) {
      throw ParseError(line_no_, "expected '" + exact + "'");
    }
  }

  std::vector<double> Numbers(std::size_t count, const char* what) {
    std::istringstream ss(Next(what));
    std::vector<double> values;
    std::string token;
    while (ss >> token) {
      char* end = nullptr;
      const double v = std::strtod(token.c_str(), &end);
      if (end == token.c_str() || *end != '\0') {
        throw ParseError(line_no_, "malformed number '" + token + "'");
      }
      if (!std::isfinite(v)) throw ParseError(line_no_, "non-finite value");
      values.push_back(v);
    }
    if (values.size() != count) {
      throw ParseError(line_no_, "expected " + std::to_string(count) +
                                     " values in " + what + ", found " +
                                     std::to_string(values.size()));
    }
    return values;
  }

  Eigen::MatrixXd Matrix(Eigen::Index rows, Eigen::Index cols,
                         const char* what) {
    Eigen::MatrixXd mat(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto row = Numbers(cols, what);
      for (Eigen::Index j = 0; j < cols; ++j) mat(i, j) = row[j];
    }
    return mat;
  }

  int line() const { return line_no_; }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

}  // namespace

std::string_view FactorModeName(FactorMode mode) {
  return mode == FactorMode::kJoint ? "joint" : "per_slice";
}

FactorMode ParseFactorMode(std::string_view name) {
  if (name == "joint") return FactorMode::kJoint;
  if (name == "per_slice") return FactorMode::kPerSlice;
  throw DataError("unknown mode '" + std::string(name) + "'");
}

FactorModel FactorModel::Zeros(int num_objects, int num_slices, int rank,
                               FactorMode mode) {
  if (num_objects <= 0 || num_slices <= 0 || rank <= 0) {
    throw DataError("model dimensions must be positive");
  }
  FactorModel model;
  model.mode = mode;
  const int num_factors = mode == FactorMode::kJoint ? 1 : num_slices;
  model.factors.assign(num_factors, Eigen::MatrixXd::Zero(num_objects, rank));
  model.interactions.assign(num_slices, Eigen::MatrixXd::Zero(rank, rank));
  model.bias = Eigen::VectorXd::Zero(num_slices);
  return model;
}

int FactorModel::num_objects() const {
  return factors.empty() ? 0 : static_cast<int>(factors[0].rows());
}

int FactorModel::rank() const {
  return factors.empty() ? 0 : static_cast<int>(factors[0].cols());
}

void FactorModel::Validate() const {
  const int m = num_slices();
  if (m <= 0) throw DataError("model has no slices");
  const std::size_t expected_factors = mode == FactorMode::kJoint ? 1 : m;
  if (factors.size() != expected_factors) {
    throw DataError("model has " + std::to_string(factors.size()) +
                    " factor matrices, expected " +
                    std::to_string(expected_factors));
  }
  const Eigen::Index n = factors[0].rows();
  const Eigen::Index r = factors[0].cols();
  if (n <= 0) throw DataError("model has no objects");
  if (r <= 0) throw DataError("model rank must be positive");
  for (const auto& a : factors) {
    if (a.rows() != n || a.cols() != r) {
      throw DataError("factor matrix dimension mismatch");
    }
    if (!a.allFinite()) throw DataError("non-finite factor value");
  }
  for (int k = 0; k < m; ++k) {
    const auto& rk = interactions[k];
    if (rk.rows() != r || rk.cols() != r) {
      throw DataError("interaction matrix dimension mismatch");
    }
    if (!rk.allFinite()) throw DataError("non-finite interaction value");
    const double asym = (rk - rk.transpose()).norm();
    if (asym > 1e-8 * (1.0 + rk.norm())) {
      throw DataError("interaction matrix " + std::to_string(k) +
                      " is not symmetric");
    }
  }
  if (bias.size() != m) throw DataError("bias vector dimension mismatch");
  if (!bias.allFinite()) throw DataError("non-finite bias value");
}

bool operator==(const FactorModel& a, const FactorModel& b) {
  if (a.mode != b.mode || a.factors.size() != b.factors.size() ||
      a.interactions.size() != b.interactions.size() ||
      a.bias.size() != b.bias.size()) {
    return false;
  }
  auto same = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return x.rows() == y.rows() && x.cols() == y.cols() && x == y;
  };
  for (std::size_t i = 0; i < a.factors.size(); ++i) {
    if (!same(a.factors[i], b.factors[i])) return false;
  }
  for (std::size_t i = 0; i < a.interactions.size(); ++i) {
    if (!same(a.interactions[i], b.interactions[i])) return false;
  }
  return a.bias == b.bias;
}

double PredictScore(const FactorModel& model, int i, int j, int k) {
  CheckIndex(model, i, j, k);
  const int lo = std::min(i, j);
  const int hi = std::max(i, j);
  const Eigen::MatrixXd& a = model.factors_for(k);
  const Eigen::MatrixXd& rk = model.interactions[k];
  const int r = model.rank();
  double score = 0.0;
  for (int p = 0; p < r; ++p) {
    double inner = 0.0;
    for (int q = 0; q < r; ++q) inner += rk(p, q) * a(hi, q);
    score += a(lo, p) * inner;
  }
  return score + model.bias[k];
}

double PredictLabel(const FactorModel& model, int i, int j, int k,
                    SliceType type) {
  const double score = PredictScore(model, i, j, k);
  if (type == SliceType::kReal) return score;
  return score >= 0.0 ? 1.0 : -1.0;
}

std::vector<double> PredictScores(
    const FactorModel& model, int k,
    const std::vector<std::pair<int, int>>& pairs) {
  if (k < 0 || k >= model.num_slices()) {
    throw DataError("slice index out of range");
  }
  const Eigen::MatrixXd& a = model.factors_for(k);
  const Eigen::MatrixXd cached = a * model.interactions[k];
  std::vector<double> scores;
  scores.reserve(pairs.size());
  for (const auto& [i, j] : pairs) {
    CheckIndex(model, i, j, k);
    const int lo = std::min(i, j);
    const int hi = std::max(i, j);
    scores.push_back(cached.row(lo).dot(a.row(hi)) + model.bias[k]);
  }
  return scores;
}

void WriteModel(std::ostream& out, const FactorModel& model,
                const LossAssignment& losses) {
  model.Validate();
  if (losses.num_slices() != model.num_slices()) {
    throw DataError("loss assignment does not match model slices");
  }
  out << "#mrmodel v1\n";
  out << "n " << model.num_objects() << "\n";
  out << "m " << model.num_slices() << "\n";
  out << "r " << model.rank() << "\n";
  out << "mode " << FactorModeName(model.mode) << "\n";
  for (int k = 0; k < model.num_slices(); ++k) {
    out << "slice " << k << " " << LossName(losses.loss(k)) << " "
        << MappingName(losses.mapping(k)) << "\n";
  }
  if (model.mode == FactorMode::kJoint) {
    out << "A\n";
    WriteMatrix(out, model.factors[0]);
  } else {
    for (int k = 0; k < model.num_slices(); ++k) {
      out << "A " << k << "\n";
      WriteMatrix(out, model.factors[k]);
    }
  }
  for (int k = 0; k < model.num_slices(); ++k) {
    out << "R " << k << "\n";
    WriteMatrix(out, model.interactions[k]);
  }
  out << "b\n";
  WriteMatrix(out, model.bias.transpose());
}

void WriteModelFile(const std::string& path, const FactorModel& model,
                    const LossAssignment& losses) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  WriteModel(out, model, losses);
  if (!out) throw DataError("write failed for " + path);
}

ModelFile ReadModel(std::istream& in) {
  LineReader reader(in);
  reader.Expect("#mrmodel v1");
  const long long n = reader.Tagged("n");
  const long long m = reader.Tagged("m");
  const long long r = reader.Tagged("r");
  if (n <= 0 || m <= 0 || r <= 0 || n > (1LL << 30) || m > (1LL << 20) ||
      r > (1LL << 20)) {
    throw ParseError(reader.line(), "model dimensions must be positive");
  }

  FactorMode mode;
  {
    std::istringstream ss(reader.Next("mode"));
    std::string word, name;
    if (!(ss >> word >> name) || word != "mode") {
      throw ParseError(reader.line(), "expected 'mode <joint|per_slice>'");
    }
    try {
      mode = ParseFactorMode(name);
    } catch (const DataError& e) {
      throw ParseError(reader.line(), e.what());
    }
  }

  std::vector<LossKind> loss_kinds(m);
  std::vector<Mapping> mappings(m);
  for (long long k = 0; k < m; ++k) {
    std::istringstream ss(reader.Next("slice"));
    std::string word, loss_name, mapping_name;
    long long index = -1;
    if (!(ss >> word >> index >> loss_name >> mapping_name) ||
        word != "slice" || index != k) {
      throw ParseError(reader.line(), "expected 'slice " + std::to_string(k) +
                                          " <loss> <mapping>'");
    }
    try {
      loss_kinds[k] = ParseLossName(loss_name);
      mappings[k] = ParseMappingName(mapping_name);
    } catch (const DataError& e) {
      throw ParseError(reader.line(), e.what());
    }
  }

  ModelFile file;
  try {
    file.losses = LossAssignment(std::move(loss_kinds), std::move(mappings));
  } catch (const DataError& e) {
    throw ParseError(reader.line(), e.what());
  }

  FactorModel& model = file.model;
  model.mode = mode;
  if (mode == FactorMode::kJoint) {
    reader.Expect("A");
    model.factors.push_back(reader.Matrix(n, r, "A"));
  } else {
    for (long long k = 0; k < m; ++k) {
      reader.Expect("A " + std::to_string(k));
      model.factors.push_back(reader.Matrix(n, r, "A"));
    }
  }
  for (long long k = 0; k < m; ++k) {
    reader.Expect("R " + std::to_string(k));
    model.interactions.push_back(reader.Matrix(r, r, "R"));
  }
  reader.Expect("b");
  const auto b = reader.Numbers(m, "b");
  model.bias = Eigen::Map<const Eigen::VectorXd>(b.data(), m);

  std::string trailing;
  while (std::getline(in, trailing)) {
    if (trailing.find_first_not_of(" \t\r") != std::string::npos) {
      throw ParseError(0, "unexpected content after bias vector");
    }
  }
  try {
    model.Validate();
  } catch (const DataError& e) {
    throw ParseError(0, e.what());
  }
  return file;
}

ModelFile ReadModelFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return ReadModel(in);
}

}  // namespace mrtf
