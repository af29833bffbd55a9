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

#include "mrtf/lbfgs.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>

#include "mrtf/errors.h"

namespace mrtf {
namespace {

struct Point {
  double alpha = 0.0;
  double f = 0.0;
  double dphi = 0.0;  // directional derivative g(x + alpha d)'d
};

struct LineSearchResult {
  bool ok = false;
  double alpha = 0.0;
  double f = 0.0;
  Eigen::VectorXd x;
  Eigen::VectorXd g;
};

// Minimizer of the cubic matching f and f' at both ends; falls back to
// bisection when the cubic has no real minimizer or lands too close to an
// end of the interval.
double CubicStep(const Point& a, const Point& b) {
  const double lo = std::min(a.alpha, b.alpha);
  const double hi = std::max(a.alpha, b.alpha);
  const double mid = 0.5 * (lo + hi);
  const double d1 = a.dphi + b.dphi - 3.0 * (a.f - b.f) / (a.alpha - b.alpha);
  const double disc = d1 * d1 - a.dphi * b.dphi;
  if (!(disc >= 0.0)) return mid;
  const double d2 = std::copysign(std::sqrt(disc), b.alpha - a.alpha);
  const double denom = b.dphi - a.dphi + 2.0 * d2;
  if (denom == 0.0) return mid;
  const double t = b.alpha - (b.alpha - a.alpha) * (b.dphi + d2 - d1) / denom;
  const double margin = 0.1 * (hi - lo);
  if (!std::isfinite(t) || t < lo + margin || t > hi - margin) return mid;
  return t;
}

class StrongWolfeSearch {
 public:
  StrongWolfeSearch(const ObjectiveFunction& fn, const LbfgsOptions& options,
                    int* evaluations)
      : fn_(fn), options_(options), evaluations_(evaluations) {}

  LineSearchResult Run(const Eigen::VectorXd& x, double f0,
                       const Eigen::VectorXd& d, double dphi0,
                       double alpha_init) {
    x_ = &x;
    d_ = &d;
    f0_ = f0;
    dphi0_ = dphi0;
    trials_ = 0;
    last_ = LineSearchResult{};

    Point prev{0.0, f0, dphi0};
    double alpha = alpha_init;
    while (trials_ < options_.max_line_search_trials) {
      Point cur = Evaluate(alpha);
      if (!std::isfinite(cur.f)) {
        // Overshot into a region where the objective blows up.
        alpha = prev.alpha + 0.5 * (alpha - prev.alpha);
        continue;
      }
      if (cur.f > f0_ + options_.c1 * cur.alpha * dphi0_ ||
          (trials_ > 1 && cur.f >= prev.f)) {
        return Zoom(prev, cur);
      }
      if (std::abs(cur.dphi) <= -options_.c2 * dphi0_) return Accept();
      if (cur.dphi >= 0.0) return Zoom(cur, prev);
      prev = cur;
      alpha *= 2.0;
    }
    return {};
  }

 private:
  Point Evaluate(double alpha) {
    ++trials_;
    ++*evaluations_;
    trial_x_ = *x_ + alpha * *d_;
    trial_g_.resize(trial_x_.size());
    double f;
    try {
      f = fn_(trial_x_, &trial_g_);
    } catch (const NumericalError&) {
      f = std::numeric_limits<double>::infinity();
    }
    const double dphi = std::isfinite(f) ? trial_g_.dot(*d_) : 0.0;
    if (std::isfinite(f)) {
      last_.alpha = alpha;
      last_.f = f;
    }
    return {alpha, f, dphi};
  }

  LineSearchResult Accept() {
    LineSearchResult out;
    out.ok = true;
    out.alpha = last_.alpha;
    out.f = last_.f;
    out.x = trial_x_;
    out.g = trial_g_;
    return out;
  }

  // Invariant: lo satisfies sufficient decrease and has the lowest f seen in
  // the bracket; the interval between lo and hi contains a Wolfe point.
  LineSearchResult Zoom(Point lo, Point hi) {
    while (trials_ < options_.max_line_search_trials) {
      if (std::abs(hi.alpha - lo.alpha) <=
          std::numeric_limits<double>::epsilon() *
              std::max(1.0, std::abs(lo.alpha))) {
        break;
      }
      const double alpha =
          std::isfinite(hi.f) ? CubicStep(lo, hi) : 0.5 * (lo.alpha + hi.alpha);
      Point cur = Evaluate(alpha);
      if (!std::isfinite(cur.f) ||
          cur.f > f0_ + options_.c1 * cur.alpha * dphi0_ || cur.f >= lo.f) {
        hi = cur;
        continue;
      }
      if (std::abs(cur.dphi) <= -options_.c2 * dphi0_) return Accept();
      if (cur.dphi * (hi.alpha - lo.alpha) >= 0.0) hi = lo;
      lo = cur;
    }
    return {};
  }

  const ObjectiveFunction& fn_;
  const LbfgsOptions& options_;
  int* evaluations_;
  const Eigen::VectorXd* x_ = nullptr;
  const Eigen::VectorXd* d_ = nullptr;
  double f0_ = 0.0;
  double dphi0_ = 0.0;
  int trials_ = 0;
  Eigen::VectorXd trial_x_;
  Eigen::VectorXd trial_g_;
  LineSearchResult last_;
};

struct CurvaturePair {
  Eigen::VectorXd s;
  Eigen::VectorXd y;
  double rho;
};

Eigen::VectorXd TwoLoopDirection(const std::deque<CurvaturePair>& memory,
                                 const Eigen::VectorXd& g) {
  Eigen::VectorXd q = -g;
  if (memory.empty()) return q;
  std::vector<double> alpha(memory.size());
  for (std::size_t i = memory.size(); i-- > 0;) {
    alpha[i] = memory[i].rho * memory[i].s.dot(q);
    q.noalias() -= alpha[i] * memory[i].y;
  }
  const auto& last = memory.back();
  q *= last.s.dot(last.y) / last.y.squaredNorm();
  for (std::size_t i = 0; i < memory.size(); ++i) {
    const double beta = memory[i].rho * memory[i].y.dot(q);
    q.noalias() += (alpha[i] - beta) * memory[i].s;
  }
  return q;
}

double InfNorm(const Eigen::VectorXd& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

}  // namespace

void LbfgsOptions::Validate() const {
  if (memory <= 0) throw DataError("L-BFGS memory must be positive");
  if (max_iterations < 0) throw DataError("max iterations must be >= 0");
  if (!(gradient_tolerance > 0.0) || !(relative_objective_tolerance > 0.0)) {
    throw DataError("tolerances must be positive");
  }
  if (!(0.0 < c1 && c1 < c2 && c2 < 1.0)) {
    throw DataError("line search requires 0 < c1 < c2 < 1");
  }
  if (max_line_search_trials <= 0) {
    throw DataError("line search needs at least one trial");
  }
}

std::string_view TerminationName(Termination reason) {
  switch (reason) {
    case Termination::kGradientTolerance:
      return "gradient_tol";
    case Termination::kObjectiveTolerance:
      return "objective_tol";
    case Termination::kMaxIterations:
      return "max_iters";
    case Termination::kLineSearchFailure:
      return "line_search_failure";
  }
  return "unknown";
}

LbfgsResult MinimizeLbfgs(const ObjectiveFunction& objective,
                          Eigen::VectorXd x0, const LbfgsOptions& options) {
  options.Validate();
  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(Clock::now() - start).count();
  };

  LbfgsResult result;
  result.x = std::move(x0);
  result.gradient.resize(result.x.size());
  result.objective = objective(result.x, &result.gradient);
  result.evaluations = 1;
  if (!std::isfinite(result.objective) || !result.gradient.allFinite()) {
    throw NumericalError("objective is not finite at the starting point");
  }
  result.trace.push_back(
      {0, result.objective, InfNorm(result.gradient), 0.0, elapsed()});
  if (InfNorm(result.gradient) <= options.gradient_tolerance) {
    result.reason = Termination::kGradientTolerance;
    return result;
  }

  StrongWolfeSearch search(objective, options, &result.evaluations);
  std::deque<CurvaturePair> memory;
  result.reason = Termination::kMaxIterations;

  for (int iter = 1; iter <= options.max_iterations; ++iter) {
    const Eigen::VectorXd& g = result.gradient;
    Eigen::VectorXd d = TwoLoopDirection(memory, g);
    double dphi0 = g.dot(d);
    if (!(dphi0 < 0.0)) {
      memory.clear();
      d = -g;
      dphi0 = -g.squaredNorm();
    }
    auto steepest_step = [&] {
      return std::min(1.0, 1.0 / g.lpNorm<1>());
    };
    double alpha0 = memory.empty() ? steepest_step() : 1.0;
    LineSearchResult ls = search.Run(result.x, result.objective, d, dphi0,
                                     alpha0);
    if (!ls.ok && !memory.empty()) {
      memory.clear();
      d = -g;
      dphi0 = -g.squaredNorm();
      ls = search.Run(result.x, result.objective, d, dphi0, steepest_step());
    }
    if (!ls.ok) {
      if (iter == 1) {
        throw NumericalError("line search failed before any accepted step");
      }
      result.reason = Termination::kLineSearchFailure;
      break;
    }

    CurvaturePair pair{ls.x - result.x, ls.g - g, 0.0};
    const double sy = pair.s.dot(pair.y);
    if (sy > std::numeric_limits<double>::epsilon() * pair.y.squaredNorm()) {
      pair.rho = 1.0 / sy;
      memory.push_back(std::move(pair));
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }

    const double f_prev = result.objective;
    result.x = std::move(ls.x);
    result.gradient = std::move(ls.g);
    result.objective = ls.f;
    const double gnorm = InfNorm(result.gradient);
    result.trace.push_back({iter, result.objective, gnorm, ls.alpha,
                            elapsed()});

    if (gnorm <= options.gradient_tolerance) {
      result.reason = Termination::kGradientTolerance;
      break;
    }
    const double scale =
        std::max({std::abs(f_prev), std::abs(result.objective), 1.0});
    if (std::abs(f_prev - result.objective) <=
        options.relative_objective_tolerance * scale) {
      result.reason = Termination::kObjectiveTolerance;
      break;
    }
  }
  return result;
}

}  // namespace mrtf
