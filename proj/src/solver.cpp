#include "nlcap/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace nlcap {

StepRule parse_step_rule(const std::string& text) {
  if (text == "polyak") return StepRule::Polyak;
  if (text == "diminishing") return StepRule::Diminishing;
  throw std::invalid_argument("unknown step rule '" + text + "' (polyak, diminishing)");
}

SolveStats projected_subgradient(const SubgradientCallbacks& cb, Vec& x, const SolveOptions& opts) {
  if (opts.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");
  cb.project(x);
  Vec g(x.size());
  double f = cb.value_and_subgradient(x, g);
  double f_best = f;
  Vec x_best = x;
  SolveStats stats;
  stats.best_value_history.push_back(f_best);

  const double diam = 2.0 * std::sqrt(static_cast<double>(x.size()) + 1.0);
  double delta = 0.25 * std::max(f, 1e-12);
  int stall = 0;
  std::vector<double> ring(static_cast<std::size_t>(std::max(opts.window, 1)), f_best);

  int it = 0;
  for (it = 1; it <= opts.max_iters; ++it) {
    const double gn2 = g.squaredNorm();
    if (!(gn2 > 0.0)) {  // zero subgradient: x is a global minimizer
      stats.tolerance_met = true;
      break;
    }
    double step;
    if (opts.step_rule == StepRule::Polyak) {
      step = (f - (f_best - delta)) / gn2;
      if (!(step > 0.0)) step = delta / gn2;
    } else {
      step = diam / (std::sqrt(static_cast<double>(it)) * std::sqrt(gn2));
    }
    if (step * std::sqrt(gn2) > diam) step = diam / std::sqrt(gn2);

    x.noalias() -= step * g;
    cb.project(x);
    f = cb.value_and_subgradient(x, g);

    if (f < f_best - 1e-15 * std::max(1.0, std::abs(f_best))) {
      const double gain = f_best - f;
      f_best = f;
      x_best = x;
      stats.best_value_history.push_back(f_best);
      if (gain >= 0.05 * delta) stall = 0; else ++stall;
    } else {
      ++stall;
    }
    if (stall >= 30) {
      delta = std::max(0.5 * delta, 1e-17 * std::max(1.0, std::abs(f_best)));
      stall = 0;
    }

    const std::size_t slot = static_cast<std::size_t>(it % opts.window);
    if (it >= opts.window) {
      const double prev = ring[slot];  // best value as of iteration it - window
      if (prev - f_best < opts.tol * std::max(std::abs(f_best), 1e-12)) {
        ring[slot] = f_best;
        stats.tolerance_met = true;
        break;
      }
    }
    ring[slot] = f_best;
  }

  x = x_best;
  stats.value = f_best;
  stats.iterations = std::min(it, opts.max_iters);
  if (stats.best_value_history.empty() || stats.best_value_history.back() != f_best)
    stats.best_value_history.push_back(f_best);
  return stats;
}

}  // namespace nlcap
