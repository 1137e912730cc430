#include "nlcap/modulus.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace nlcap;
using nlcap::testing::approx_rel;
using nlcap::testing::random_mat;

namespace {

OperatorTuple scalar_tuple(int dim, double a, double b) {
  OperatorTuple tau;
  tau.ops.push_back(a * Mat::Identity(dim, dim));
  tau.ops.push_back(b * Mat::Identity(dim, dim));
  return tau;
}

}  // namespace

TEST_CASE("truncated shifts from balls") {
  const auto line = cayley_ball(parse_group("z:1"), 1);
  const auto tau = truncated_shift_tuple(line);
  REQUIRE(tau.ops.size() == 1);
  CHECK(tau.dim() == 5);
  CHECK(tau.ops[0].sum() == doctest::Approx(4.0));
  CHECK_NOTHROW(tau.validate());

  const auto tree = cayley_ball(parse_group("free:2"), 1);
  const auto tt = truncated_shift_tuple(tree);
  REQUIRE(tt.ops.size() == 2);
  CHECK(tt.dim() == 17);
  CHECK_NOTHROW(tt.validate());

  LabeledGraph bare(2);
  bare.add_vertex("a", false);
  bare.add_vertex("b", false);
  const auto zt = truncated_shift_tuple(bare);
  CHECK(zt.ops[0].cwiseAbs().maxCoeff() == 0.0);
  CHECK(zt.ops[1].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("commutator entries of a diagonal against a shift") {
  const auto g = cayley_ball(parse_group("z:2"), 1);
  const auto tau = truncated_shift_tuple(g);
  std::mt19937_64 rng(3);
  Vec f = zero_halo(g, nlcap::testing::random_vec(rng, g.vertex_count()));
  const Mat x = Mat(f.asDiagonal());
  for (int j = 0; j < g.generator_count(); ++j) {
    const Mat k = tau.ops[static_cast<std::size_t>(j)] * x - x * tau.ops[static_cast<std::size_t>(j)];
    Mat expected = Mat::Zero(g.vertex_count(), g.vertex_count());
    for (const auto& e : g.edges()[static_cast<std::size_t>(j)])
      expected(e.dst, e.src) = -(f[e.dst] - f[e.src]);
    CHECK((k - expected).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("projection pair validation") {
  CHECK_THROWS_AS(ProjectionPair::coordinates({0, 1}, {1, 2}, 4), std::invalid_argument);
  CHECK_THROWS_AS(ProjectionPair::coordinates({5}, {}, 4), std::invalid_argument);
  const auto pq = ProjectionPair::coordinates({0}, {3}, 4);
  CHECK(pq.p_rank() == 1);
  CHECK(pq.q_rank() == 1);
  const Mat p = pq.p_matrix(4);
  CHECK((p * p - p).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("feasible projection") {
  const auto pq = ProjectionPair::coordinates({0}, {}, 3);
  const Mat x2 = 2.0 * Mat::Identity(3, 3);
  CHECK((project_feasible(x2, pq) - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-12);
  const Mat xneg = -Mat::Identity(3, 3);
  CHECK((project_feasible(xneg, pq) - pq.p_matrix(3)).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937_64 rng(8);
  const auto pq2 = ProjectionPair::coordinates({0}, {4}, 5);
  Mat y = random_mat(rng, 5, 5);
  const Mat feas = project_feasible(y, pq2);
  CHECK((project_feasible(feas, pq2) - feas).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("diagonal compression") {
  Mat d = Mat::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = -2.0;
  CHECK((diag_compress(d) - d).cwiseAbs().maxCoeff() == 0.0);
  Mat swap(2, 2);
  swap << 0, 1, 1, 0;
  CHECK(diag_compress(swap).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scalar tuples have zero modulus") {
  const auto tau = scalar_tuple(4, 2.5, -1.0);
  const auto pq = ProjectionPair::coordinates({0}, {3}, 4);
  const auto rep = solve_modulus(tau, pq, NormingFunction::lp(2.0));
  CHECK(rep.value <= 1e-12);
  CHECK(rep.feasibility_residual <= 1e-10);
}

TEST_CASE("lattice modulus matches the graph value") {
  const auto g = cayley_ball(parse_group("z:1"), 2);
  const auto tau = truncated_shift_tuple(g);
  std::vector<int> q;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.is_halo(v)) q.push_back(v);
  const auto pq = ProjectionPair::coordinates({g.find("0")}, q, g.vertex_count());
  const auto rep = solve_modulus(tau, pq, NormingFunction::lp(2.0));
  CHECK(approx_rel(rep.value, std::sqrt(2.0 / 3.0), 0.02));
  CHECK(rep.feasibility_residual <= 1e-10);
}

TEST_CASE("modulus is monotone in the source projection") {
  const auto g = cayley_ball(parse_group("z:1"), 2);
  const auto tau = truncated_shift_tuple(g);
  std::vector<int> q;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.is_halo(v)) q.push_back(v);
  const auto small = ProjectionPair::coordinates({g.find("0")}, q, g.vertex_count());
  const auto large =
      ProjectionPair::coordinates({g.find("0"), g.find("1")}, q, g.vertex_count());
  const double v_small = solve_modulus(tau, small, NormingFunction::lp(2.0)).value;
  const double v_large = solve_modulus(tau, large, NormingFunction::lp(2.0)).value;
  CHECK(v_large >= v_small - 0.01 * v_small);
}

TEST_CASE("objective is convex along segments of feasible points") {
  const auto g = cayley_ball(parse_group("z:1"), 2);
  const auto tau = truncated_shift_tuple(g);
  std::vector<int> q;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.is_halo(v)) q.push_back(v);
  const auto pq = ProjectionPair::coordinates({g.find("0")}, q, g.vertex_count());
  std::mt19937_64 rng(15);
  const auto phi = NormingFunction::lorentz_p1(2.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Mat x1 = project_feasible(random_mat(rng, tau.dim(), tau.dim()), pq);
    const Mat x2 = project_feasible(random_mat(rng, tau.dim(), tau.dim()), pq);
    const double t = static_cast<double>(rng() % 1000) / 1000.0;
    const double lhs = modulus_objective(tau, t * x1 + (1 - t) * x2, phi);
    const double rhs =
        t * modulus_objective(tau, x1, phi) + (1 - t) * modulus_objective(tau, x2, phi);
    CHECK(lhs <= rhs + 1e-10);
  }
}

TEST_CASE("transfer between graph capacity and matrix modulus") {
  const auto g = cayley_ball(parse_group("z:1"), 2);
  SolveOptions opts;
  opts.tol = 1e-10;
  const auto rep = transfer_compare(g, {g.find("0")}, {}, NormingFunction::lp(2.0), opts);
  CHECK(approx_rel(rep.cap_graph, std::sqrt(2.0 / 3.0), 0.02));
  CHECK(rep.gap <= 0.02);
  CHECK(rep.embed_ok);
  CHECK(rep.compress_ok);
  CHECK(rep.diag_roundtrip_ok);

  const auto lorentz = transfer_compare(g, {g.find("0")}, {}, NormingFunction::lorentz_p1(2.0), opts);
  CHECK(lorentz.gap <= 0.03);
  CHECK(lorentz.diag_roundtrip_ok);
}

TEST_CASE("frame-form projections agree with coordinate form") {
  const auto g = cayley_ball(parse_group("z:1"), 1);
  const auto tau = truncated_shift_tuple(g);
  const int d = g.vertex_count();
  std::vector<int> q;
  for (int v = 0; v < d; ++v)
    if (g.is_halo(v)) q.push_back(v);
  const auto pq_coord = ProjectionPair::coordinates({g.find("0")}, q, d);

  Mat pf = Mat::Zero(d, 1);
  pf(g.find("0"), 0) = 1.0;
  Mat qf = Mat::Zero(d, static_cast<Eigen::Index>(q.size()));
  for (std::size_t i = 0; i < q.size(); ++i) qf(q[i], static_cast<Eigen::Index>(i)) = 1.0;
  const auto pq_frame = ProjectionPair::frames(pf, qf);

  const auto a = solve_modulus(tau, pq_coord, NormingFunction::lp(2.0));
  const auto b = solve_modulus(tau, pq_frame, NormingFunction::lp(2.0));
  CHECK(approx_rel(a.value, b.value, 1e-3));
  CHECK(b.feasibility_residual <= 1e-9);
}
