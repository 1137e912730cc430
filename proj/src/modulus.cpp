#include "nlcap/modulus.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nlcap {

namespace {

constexpr double kActiveTol = 1e-9;
constexpr double kEigClipTol = 1e-12;

Mat symmetrized(const Mat& m) { return 0.5 * (m + m.transpose()); }

}  // namespace

void OperatorTuple::validate(int max_dim) const {
  if (ops.empty()) throw std::invalid_argument("operator tuple is empty");
  const int d = dim();
  if (d > max_dim)
    throw std::invalid_argument("operator dimension " + std::to_string(d) + " exceeds the cap of " +
                                std::to_string(max_dim));
  for (const auto& t : ops) {
    if (t.rows() != d || t.cols() != d)
      throw std::invalid_argument("operator tuple has mismatched dimensions");
    if (!t.allFinite()) throw std::invalid_argument("operator tuple has non-finite entries");
  }
  if (kind == TupleKind::TruncatedShift) {
    for (const auto& t : ops) {
      Eigen::VectorXd row_sum = Vec::Zero(d), col_sum = Vec::Zero(d);
      for (int r = 0; r < d; ++r)
        for (int c = 0; c < d; ++c) {
          const double v = t(r, c);
          if (v != 0.0 && v != 1.0)
            throw std::invalid_argument("truncated shift has an entry outside {0,1}");
          row_sum[r] += v;
          col_sum[c] += v;
        }
      if (row_sum.maxCoeff() > 1.0 || col_sum.maxCoeff() > 1.0)
        throw std::invalid_argument("truncated shift is not a partial permutation");
    }
  }
  if (cyclic) {
    if (cyclic->size() != d) throw std::invalid_argument("cyclic vector has wrong length");
    if (std::abs(cyclic->norm() - 1.0) > 1e-9)
      throw std::invalid_argument("cyclic vector must have unit norm");
  }
}

ProjectionPair ProjectionPair::coordinates(std::vector<int> p, std::vector<int> q, int dim) {
  ProjectionPair pq;
  pq.coordinate_form = true;
  std::sort(p.begin(), p.end());
  std::sort(q.begin(), q.end());
  p.erase(std::unique(p.begin(), p.end()), p.end());
  q.erase(std::unique(q.begin(), q.end()), q.end());
  pq.p_coords = std::move(p);
  pq.q_coords = std::move(q);
  pq.validate(dim);
  return pq;
}

ProjectionPair ProjectionPair::frames(Mat p, Mat q) {
  ProjectionPair pq;
  pq.coordinate_form = false;
  pq.p_frame = std::move(p);
  pq.q_frame = std::move(q);
  pq.validate(static_cast<int>(pq.p_frame.rows()));
  return pq;
}

int ProjectionPair::p_rank() const {
  return coordinate_form ? static_cast<int>(p_coords.size()) : static_cast<int>(p_frame.cols());
}

int ProjectionPair::q_rank() const {
  return coordinate_form ? static_cast<int>(q_coords.size()) : static_cast<int>(q_frame.cols());
}

Mat ProjectionPair::p_matrix(int dim) const {
  Mat m = Mat::Zero(dim, dim);
  if (coordinate_form) {
    for (int i : p_coords) m(i, i) = 1.0;
  } else if (p_frame.cols() > 0) {
    m = p_frame * p_frame.transpose();
  }
  return m;
}

Mat ProjectionPair::q_matrix(int dim) const {
  Mat m = Mat::Zero(dim, dim);
  if (coordinate_form) {
    for (int i : q_coords) m(i, i) = 1.0;
  } else if (q_frame.cols() > 0) {
    m = q_frame * q_frame.transpose();
  }
  return m;
}

void ProjectionPair::validate(int dim) const {
  if (coordinate_form) {
    for (int i : p_coords)
      if (i < 0 || i >= dim) throw std::invalid_argument("P coordinate out of range");
    for (int i : q_coords)
      if (i < 0 || i >= dim) throw std::invalid_argument("Q coordinate out of range");
    std::vector<char> in_p(static_cast<std::size_t>(dim), 0);
    for (int i : p_coords) in_p[static_cast<std::size_t>(i)] = 1;
    for (int i : q_coords)
      if (in_p[static_cast<std::size_t>(i)])
        throw std::invalid_argument("P and Q ranges intersect (PQ != 0)");
    return;
  }
  auto check_frame = [dim](const Mat& f, const char* name) {
    if (f.cols() == 0) return;
    if (f.rows() != dim) throw std::invalid_argument(std::string(name) + " frame has wrong height");
    const Mat gram = f.transpose() * f;
    if ((gram - Mat::Identity(f.cols(), f.cols())).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument(std::string(name) + " frame is not orthonormal");
  };
  check_frame(p_frame, "P");
  check_frame(q_frame, "Q");
  if (p_frame.cols() > 0 && q_frame.cols() > 0) {
    if ((p_frame.transpose() * q_frame).cwiseAbs().maxCoeff() > 1e-10)
      throw std::invalid_argument("P and Q ranges intersect (PQ != 0)");
  }
}

OperatorTuple truncated_shift_tuple(const LabeledGraph& g) {
  OperatorTuple tau;
  tau.kind = TupleKind::TruncatedShift;
  const int d = g.vertex_count();
  for (int j = 0; j < g.generator_count(); ++j) {
    Mat t = Mat::Zero(d, d);
    for (const auto& e : g.edges()[static_cast<std::size_t>(j)]) t(e.dst, e.src) = 1.0;
    tau.ops.push_back(std::move(t));
  }
  return tau;
}

double modulus_objective(const OperatorTuple& tau, const Mat& x, const NormingFunction& phi) {
  double best = 0.0;
  for (const auto& t : tau.ops) {
    const Mat k = t * x - x * t;
    best = std::max(best, evaluate_singular_norm(phi, k));
  }
  return best;
}

namespace {

// Basis bookkeeping for the reduced block: X = P + C Y C^T with Y an m x m
// symmetric matrix, 0 <= Y <= I.
struct ReducedBasis {
  int d = 0, m = 0;
  bool coordinate_form = true;
  std::vector<int> comp;  // coordinate path
  std::vector<int> p_coords;
  Mat c_frame;  // frame path, d x m
  Mat p_mat;    // frame path

  Mat assemble(const Mat& y) const {
    Mat x = Mat::Zero(d, d);
    if (coordinate_form) {
      for (int i : p_coords) x(i, i) = 1.0;
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          x(comp[static_cast<std::size_t>(a)], comp[static_cast<std::size_t>(b)]) = y(a, b);
      return x;
    }
    x = p_mat;
    if (m > 0) x += c_frame * y * c_frame.transpose();
    return x;
  }

  Mat compress(const Mat& s) const {
    if (coordinate_form) {
      Mat y(m, m);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          y(a, b) = s(comp[static_cast<std::size_t>(a)], comp[static_cast<std::size_t>(b)]);
      return y;
    }
    return c_frame.transpose() * s * c_frame;
  }
};

ReducedBasis make_basis(const ProjectionPair& pq, int dim) {
  ReducedBasis basis;
  basis.d = dim;
  basis.coordinate_form = pq.coordinate_form;
  if (pq.coordinate_form) {
    std::vector<char> taken(static_cast<std::size_t>(dim), 0);
    for (int i : pq.p_coords) taken[static_cast<std::size_t>(i)] = 1;
    for (int i : pq.q_coords) taken[static_cast<std::size_t>(i)] = 1;
    for (int v = 0; v < dim; ++v)
      if (!taken[static_cast<std::size_t>(v)]) basis.comp.push_back(v);
    basis.p_coords = pq.p_coords;
    basis.m = static_cast<int>(basis.comp.size());
    return basis;
  }
  // Orthonormal complement of span(P) + span(Q) via full QR.
  const int rp = pq.p_rank(), rq = pq.q_rank();
  Mat pqcols(dim, rp + rq);
  if (rp > 0) pqcols.leftCols(rp) = pq.p_frame;
  if (rq > 0) pqcols.rightCols(rq) = pq.q_frame;
  basis.m = dim - rp - rq;
  if (basis.m < 0) throw std::invalid_argument("projection ranks exceed the dimension");
  if (rp + rq == 0) {
    basis.c_frame = Mat::Identity(dim, dim);
  } else {
    Eigen::HouseholderQR<Mat> qr(pqcols);
    const Mat qfull = qr.householderQ() * Mat::Identity(dim, dim);
    basis.c_frame = qfull.rightCols(basis.m);
  }
  basis.p_mat = pq.p_matrix(dim);
  return basis;
}

Mat clip_box(const Mat& y) {
  if (y.size() == 0) return y;
  Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrized(y));
  Vec lam = eig.eigenvalues();
  for (Eigen::Index i = 0; i < lam.size(); ++i) {
    if (lam[i] < kEigClipTol) lam[i] = 0.0;
    if (lam[i] > 1.0 - kEigClipTol && lam[i] < 1.0 + kEigClipTol) lam[i] = 1.0;
    lam[i] = std::clamp(lam[i], 0.0, 1.0);
  }
  return eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

Mat project_feasible(const Mat& x, const ProjectionPair& pq) {
  const int d = static_cast<int>(x.rows());
  if (x.cols() != d) throw std::invalid_argument("project_feasible expects a square matrix");
  pq.validate(d);
  const ReducedBasis basis = make_basis(pq, d);
  if (basis.m == 0) return basis.assemble(Mat::Zero(0, 0));
  return basis.assemble(clip_box(basis.compress(symmetrized(x))));
}

Mat diag_compress(const Mat& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("diag_compress expects a square matrix");
  return Mat(m.diagonal().asDiagonal());
}

ModulusSolveReport solve_modulus(const OperatorTuple& tau, const ProjectionPair& pq,
                                 const NormingFunction& phi, const SolveOptions& opts,
                                 const std::optional<Mat>& warm_start) {
  tau.validate();
  const int d = tau.dim();
  pq.validate(d);
  const ReducedBasis basis = make_basis(pq, d);
  const int m = basis.m;
  const int ngen = static_cast<int>(tau.ops.size());

  ModulusSolveReport report;

  auto finalize = [&](const Mat& x_final, const SolveStats& stats) {
    report.value = stats.value;
    report.minimizer = x_final;
    report.iterations = stats.iterations;
    report.best_value_history = stats.best_value_history;
    report.tolerance_met = stats.tolerance_met;
    Eigen::SelfAdjointEigenSolver<Mat> eig(symmetrized(x_final));
    double resid = 0.0;
    if (eig.eigenvalues().size() > 0)
      resid = std::max({0.0, -eig.eigenvalues().minCoeff(), eig.eigenvalues().maxCoeff() - 1.0});
    const Mat pmat = pq.p_matrix(d), qmat = pq.q_matrix(d);
    resid = std::max(resid, (x_final * pmat - pmat).cwiseAbs().maxCoeff());
    resid = std::max(resid, (x_final * qmat).cwiseAbs().maxCoeff());
    report.feasibility_residual = resid;
  };

  if (m == 0) {
    const Mat x = basis.assemble(Mat::Zero(0, 0));
    SolveStats stats;
    stats.value = modulus_objective(tau, x, phi);
    stats.tolerance_met = true;
    stats.best_value_history = {stats.value};
    finalize(x, stats);
    return report;
  }

  Mat y0 = Mat::Zero(m, m);
  if (warm_start) {
    if (warm_start->rows() != d || warm_start->cols() != d)
      throw std::invalid_argument("warm start has wrong dimensions");
    y0 = clip_box(basis.compress(symmetrized(*warm_start)));
  }

  Vec x_vec = Eigen::Map<const Vec>(y0.data(), m * m);
  Mat work_x(d, d), work_y(m, m);
  std::vector<double> vals(static_cast<std::size_t>(ngen));

  SubgradientCallbacks cb;
  cb.value_and_subgradient = [&](const Vec& yv, Vec& gout) {
    work_y = Eigen::Map<const Mat>(yv.data(), m, m);
    work_x = basis.assemble(work_y);
    double best = 0.0;
    for (int j = 0; j < ngen; ++j) {
      const Mat k = tau.ops[static_cast<std::size_t>(j)] * work_x - work_x * tau.ops[static_cast<std::size_t>(j)];
      vals[static_cast<std::size_t>(j)] = evaluate_singular_norm(phi, k);
      best = std::max(best, vals[static_cast<std::size_t>(j)]);
    }
    int active = 0;
    for (int j = 0; j < ngen; ++j)
      if (vals[static_cast<std::size_t>(j)] >= best - kActiveTol) ++active;
    Mat gy = Mat::Zero(m, m);
    for (int j = 0; j < ngen; ++j) {
      if (vals[static_cast<std::size_t>(j)] < best - kActiveTol) continue;
      const Mat& t = tau.ops[static_cast<std::size_t>(j)];
      const Mat k = t * work_x - work_x * t;
      const Mat gk = subgradient_singular(phi, k);
      const Mat gx = t.transpose() * gk - gk * t.transpose();
      gy += basis.compress(gx) / active;
    }
    gy = symmetrized(gy);
    gout = Eigen::Map<const Vec>(gy.data(), m * m);
    return best;
  };
  cb.project = [&](Vec& yv) {
    Mat y = Eigen::Map<const Mat>(yv.data(), m, m);
    y = clip_box(y);
    yv = Eigen::Map<const Vec>(y.data(), m * m);
  };

  const SolveStats stats = projected_subgradient(cb, x_vec, opts);
  const Mat y_best = Eigen::Map<const Mat>(x_vec.data(), m, m);
  finalize(basis.assemble(y_best), stats);
  return report;
}

TransferReport transfer_compare(const LabeledGraph& g, const std::vector<int>& source,
                                const std::vector<int>& sink, const NormingFunction& phi,
                                const SolveOptions& opts) {
  TransferReport rep;

  CondenserProblem prob;
  prob.graph = &g;
  prob.source = source;
  prob.sink = sink;
  prob.phi = phi;
  prob.combiner = GradientCombiner::MaxThenNorm;
  rep.graph = solve_condenser(prob, opts);
  rep.cap_graph = rep.graph.value;

  const OperatorTuple tau = truncated_shift_tuple(g);
  std::vector<int> q_coords = sink;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.is_halo(v)) q_coords.push_back(v);
  const ProjectionPair pq = ProjectionPair::coordinates(source, q_coords, g.vertex_count());

  const Mat x_embed = Mat(rep.graph.minimizer.asDiagonal());
  rep.matrix = solve_modulus(tau, pq, phi, opts, x_embed);
  rep.k_matrix = rep.matrix.value;

  // Embedding direction: the diagonal matrix of the graph minimizer must be
  // feasible with matrix objective equal to the graph objective.
  rep.embed_value = modulus_objective(tau, x_embed, phi);
  rep.embed_ok = std::abs(rep.embed_value - rep.cap_graph) <= 1e-9 * std::max(1.0, rep.cap_graph);

  // Compression direction: the diagonal of the matrix minimizer is a
  // feasible vertex function whose seminorm does not exceed the matrix
  // objective.
  Vec f_back = rep.matrix.minimizer.diagonal();
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (g.is_halo(v)) f_back[v] = 0.0;
    f_back[v] = std::clamp(f_back[v], 0.0, 1.0);
  }
  for (int v : source) f_back[v] = 1.0;
  for (int v : sink) f_back[v] = 0.0;
  rep.compress_value = gradient_seminorm(g, f_back, phi, GradientCombiner::MaxThenNorm);
  rep.compress_ok = rep.compress_value <= rep.k_matrix * (1.0 + 1e-9) + 1e-12;

  rep.diag_roundtrip_ok = rep.embed_ok && rep.compress_ok;
  rep.gap = std::abs(rep.cap_graph - rep.k_matrix) / std::max({rep.cap_graph, rep.k_matrix, 1e-12});
  return rep;
}

}  // namespace nlcap
