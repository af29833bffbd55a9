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

// Limited-memory BFGS with a strong-Wolfe line search.
//
// The search direction comes from the two-loop recursion over the most recent
// `memory` curvature pairs (s, y), scaled by gamma = s'y / y'y. The line
// search brackets a step satisfying
//
//   f(x + a d) <= f(x) + c1 a g'd        (sufficient decrease)
//   |g(x + a d)'d| <= c2 |g'd|           (curvature)
//
// and then zooms in with safeguarded cubic interpolation.

#ifndef MRTF_LBFGS_H_
#define MRTF_LBFGS_H_

#include <functional>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace mrtf {

struct LbfgsOptions {
  int memory = 10;
  int max_iterations = 500;
  double gradient_tolerance = 1e-5;  // on the infinity norm
  double relative_objective_tolerance = 1e-9;
  double c1 = 1e-4;
  double c2 = 0.9;
  int max_line_search_trials = 20;

  void Validate() const;
};

enum class Termination {
  kGradientTolerance,
  kObjectiveTolerance,
  kMaxIterations,
  kLineSearchFailure,
};

std::string_view TerminationName(Termination reason);

struct IterationRecord {
  int iteration = 0;
  double objective = 0.0;
  double gradient_inf_norm = 0.0;
  double step_length = 0.0;
  double seconds = 0.0;  // cumulative since the start of the minimization
};

struct LbfgsResult {
  Eigen::VectorXd x;
  double objective = 0.0;
  Eigen::VectorXd gradient;
  Termination reason = Termination::kMaxIterations;
  // Record 0 is the starting point; one record per accepted step after that.
  std::vector<IterationRecord> trace;
  int evaluations = 0;

  int iterations() const { return static_cast<int>(trace.size()) - 1; }
};

// Returns f(x) and writes the gradient into *grad (already sized).
using ObjectiveFunction =
    std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

// Throws NumericalError if the line search fails before the first accepted
// step. A later failure ends the run with kLineSearchFailure and the last
// accepted iterate.
LbfgsResult MinimizeLbfgs(const ObjectiveFunction& objective,
                          Eigen::VectorXd x0, const LbfgsOptions& options);

}  // namespace mrtf

#endif  // MRTF_LBFGS_H_
