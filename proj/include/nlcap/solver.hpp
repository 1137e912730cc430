#pragma once
//
// nlcap / solver : projected subgradient driver shared by the graph and
// matrix condenser solvers.
//

#include "nlcap/gauge.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace nlcap {

enum class StepRule { Polyak, Diminishing };

StepRule parse_step_rule(const std::string& text);

struct SolveOptions {
  int max_iters = 50000;
  double tol = 1e-8;     // relative best-value improvement threshold
  int window = 200;      // stagnation window, in iterations
  StepRule step_rule = StepRule::Polyak;
  std::uint64_t seed = 0;
};

struct SolveStats {
  double value = 0.0;
  int iterations = 0;
  std::vector<double> best_value_history;
  bool tolerance_met = false;
};

struct SubgradientCallbacks {
  // Returns the objective at x and fills g with a subgradient.
  std::function<double(const Vec& x, Vec& g)> value_and_subgradient;
  // Projects x onto the feasible set, in place (exact, closed form).
  std::function<void(Vec& x)> project;
};

/// Minimizes a convex objective over a compact convex set. The Polyak rule
/// targets best-so-far minus an adaptive gap that halves on stalls; the
/// diminishing rule uses normalized steps ~ 1/sqrt(t). On return x holds the
/// best feasible iterate.
SolveStats projected_subgradient(const SubgradientCallbacks& cb, Vec& x, const SolveOptions& opts);

}  // namespace nlcap
