#pragma once
//
// nlcap / capacity : condenser capacities on labeled graphs — the convex
// solver, capacity profiles over growing balls, and independent oracles.
//

#include "nlcap/graph.hpp"
#include "nlcap/solver.hpp"

#include <string>
#include <utility>
#include <vector>

namespace nlcap {

/// Minimize the gradient seminorm over functions pinned to 1 on the source
/// set and 0 on the sink set; the halo is always part of the sink.
struct CondenserProblem {
  const LabeledGraph* graph = nullptr;
  std::vector<int> source;  // X1, interior vertices, value 1
  std::vector<int> sink;    // X2, value 0 (the halo is implicit)
  NormingFunction phi = NormingFunction::lp(2.0);
  GradientCombiner combiner = GradientCombiner::MaxThenNorm;
  bool box = true;  // enforce 0 <= f <= 1

  void validate() const;
};

struct GraphSolveReport {
  double value = 0.0;
  Vec minimizer;  // full vertex function, pins applied
  int iterations = 0;
  double feasibility_residual = 0.0;
  std::vector<double> best_value_history;
  bool tolerance_met = false;
};

/// Objective value of a pinned vertex function, and optionally a subgradient
/// with respect to all vertex values. Agrees with gradient_seminorm.
double condenser_objective(const LabeledGraph& g, const Vec& f, const NormingFunction& phi,
                           GradientCombiner combiner, Vec* grad = nullptr);

GraphSolveReport solve_condenser(const CondenserProblem& p, const SolveOptions& opts = {});

struct ProfilePoint {
  int radius = 0;
  double value = 0.0;
  int iterations = 0;
  bool tolerance_met = false;
};

/// Condenser values for the source set on balls of growing radius, sink =
/// halo. Values are nonincreasing in the radius.
std::vector<ProfilePoint> capacity_profile(const GroupSpec& group,
                                           const std::string& source_labels,
                                           const NormingFunction& phi, GradientCombiner combiner,
                                           const std::vector<int>& radii,
                                           const SolveOptions& opts = {});

/// Exact value for phi = Lp(2), combiner = EuclideanThenNorm: sqrt of the
/// Dirichlet energy of the harmonic extension (graph Laplacian solve).
double oracle_quadratic(const CondenserProblem& p);

/// Exact value for phi = Lp(1), combiner = SumThenNorm, box on: the minimum
/// number of edges separating the source from sink + halo (unit max-flow).
double oracle_mincut(const CondenserProblem& p);

struct ProbeReport {
  std::vector<ProfilePoint> profile;
  std::string verdict;  // "vanishing", "bounded-below", "inconclusive"
  double power_law_slope = 0.0;
  double power_law_r2 = 0.0;
  double last_ratio = 0.0;
};

/// Heuristic decay-vs-saturation classification of the singleton capacity
/// profile for Lp(p). Advisory, not a proof.
ProbeReport hyperbolicity_probe(const GroupSpec& group, double p, int rmax,
                                GradientCombiner combiner = GradientCombiner::EuclideanThenNorm,
                                const SolveOptions& opts = {});

}  // namespace nlcap
