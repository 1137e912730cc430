#pragma once
//
// nlcap / modulus : the finite-dimensional condenser modulus for operator
// tuples — minimize the largest gauge norm of the commutators [T_j, X] over
// 0 <= X <= I with XP = P, XQ = 0 — and the graph <-> matrix transfer.
//

#include "nlcap/capacity.hpp"
#include "nlcap/gauge.hpp"
#include "nlcap/graph.hpp"
#include "nlcap/solver.hpp"

#include <optional>
#include <vector>

namespace nlcap {

enum class TupleKind { Custom, TruncatedShift, DiagonalMultiplication };

struct OperatorTuple {
  std::vector<Mat> ops;
  TupleKind kind = TupleKind::Custom;
  std::optional<Vec> cyclic;

  int dim() const { return ops.empty() ? 0 : static_cast<int>(ops.front().rows()); }
  void validate(int max_dim = 2000) const;
};

/// Orthogonal projections P, Q with PQ = 0, given as coordinate subsets (the
/// common case) or as orthonormal column frames.
struct ProjectionPair {
  bool coordinate_form = true;
  std::vector<int> p_coords, q_coords;
  Mat p_frame, q_frame;

  static ProjectionPair coordinates(std::vector<int> p, std::vector<int> q, int dim);
  static ProjectionPair frames(Mat p, Mat q);

  int p_rank() const;
  int q_rank() const;
  Mat p_matrix(int dim) const;
  Mat q_matrix(int dim) const;
  void validate(int dim) const;
};

/// One partial-permutation matrix per generator: entry 1 at (g_j v, v) for
/// every stored edge, on the basis of all stored vertices.
OperatorTuple truncated_shift_tuple(const LabeledGraph& g);

/// max_j phi(singular values of T_j X - X T_j).
double modulus_objective(const OperatorTuple& tau, const Mat& x, const NormingFunction& phi);

/// Frobenius-nearest feasible point: P on range(P), 0 on range(Q), and the
/// complement block compressed and eigenvalue-clipped to [0, 1].
Mat project_feasible(const Mat& x, const ProjectionPair& pq);

/// Zeroes all off-diagonal entries; never increases a gauge norm.
Mat diag_compress(const Mat& m);

struct ModulusSolveReport {
  double value = 0.0;
  Mat minimizer;
  int iterations = 0;
  double feasibility_residual = 0.0;
  std::vector<double> best_value_history;
  bool tolerance_met = false;
};

ModulusSolveReport solve_modulus(const OperatorTuple& tau, const ProjectionPair& pq,
                                 const NormingFunction& phi, const SolveOptions& opts = {},
                                 const std::optional<Mat>& warm_start = {});

struct TransferReport {
  GraphSolveReport graph;
  ModulusSolveReport matrix;
  double cap_graph = 0.0;
  double k_matrix = 0.0;
  double gap = 0.0;  // relative
  bool embed_ok = false;     // diag of the graph minimizer is modulus-feasible
                             // with equal objective
  bool compress_ok = false;  // diagonal of the matrix minimizer is graph-
                             // feasible with no larger seminorm
  bool diag_roundtrip_ok = false;
  double embed_value = 0.0;
  double compress_value = 0.0;
};

/// Solves the matched condenser instances on both sides (MaxThenNorm gauge
/// objective; P = source coordinates, Q = sink + halo coordinates) and
/// verifies both sandwich directions on the returned minimizers.
TransferReport transfer_compare(const LabeledGraph& g, const std::vector<int>& source,
                                const std::vector<int>& sink, const NormingFunction& phi,
                                const SolveOptions& opts = {});

}  // namespace nlcap
