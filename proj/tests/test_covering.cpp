#include "nlcap/covering.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>

using namespace nlcap;
using nlcap::testing::approx_rel;

namespace {

CellSet shape(CellShape s, int level, int dim = 1) {
  ShapeSpec spec;
  spec.shape = s;
  spec.level = level;
  spec.dim = dim;
  return build_cell_set(spec);
}

const double kCarpetExponent = std::log(8.0) / std::log(3.0);

}  // namespace

TEST_CASE("built-in cell sets") {
  const auto interval = shape(CellShape::Interval, 2);
  CHECK(interval.cells.size() == 4);
  CHECK(interval.side() == doctest::Approx(0.25));

  const auto cantor = shape(CellShape::Cantor, 2);
  REQUIRE(cantor.cells.size() == 4);
  CHECK(cantor.side() == doctest::Approx(1.0 / 9.0));
  const int expected[] = {0, 2, 6, 8};
  for (int i = 0; i < 4; ++i) CHECK(cantor.cells[static_cast<std::size_t>(i)][0] == expected[i]);

  const auto carpet = shape(CellShape::Carpet, 1);
  CHECK(carpet.cells.size() == 8);
  for (const auto& cell : carpet.cells) CHECK(!(cell[0] == 1 && cell[1] == 1));

  CHECK_THROWS_AS(shape(CellShape::Carpet, 7), std::length_error);
}

TEST_CASE("interval covering value is scale free") {
  const auto e = shape(CellShape::Interval, 6);
  for (double eps : {0.6, 0.3, 0.15, 0.08, 0.04, 0.02}) {
    const auto res = covering_value(e, eps, NormingFunction::lp(1.0), CoverStrategy::Dyadic);
    CHECK(approx_rel(res.value, 0.5, 0.02));
  }
  CHECK_THROWS_AS(covering_value(e, 1e-4, NormingFunction::lp(1.0), CoverStrategy::Dyadic),
                  std::invalid_argument);
}

TEST_CASE("square covering values stay in a narrow band") {
  const auto e = shape(CellShape::Cube, 6, 2);
  const auto phi = NormingFunction::lorentz_p1(2.0);
  double lo = 1e300, hi = 0.0;
  for (int b = 3; b <= 6; ++b) {
    const double eps = std::pow(0.5, b) * std::sqrt(2.0) / 2.0 * (1.0 + 1e-9);
    const auto res = covering_value(e, eps, phi, CoverStrategy::Dyadic);
    lo = std::min(lo, res.value);
    hi = std::max(hi, res.value);
  }
  CHECK(hi / lo <= 1.25);
}

TEST_CASE("carpet covering value tracks its similarity exponent") {
  const auto phi = NormingFunction::lorentz_p1(kCarpetExponent);
  const double target = kCarpetExponent * std::sqrt(2.0) / 2.0;
  for (int level : {2, 3}) {
    const auto e = shape(CellShape::Carpet, level);
    const auto res =
        covering_value(e, e.cell_circumradius() * (1.0 + 1e-9), phi, CoverStrategy::Dyadic);
    CHECK(std::abs(res.value - target) / target <= 0.25);
  }
}

TEST_CASE("dyadic covering value is monotone in eps and in the set") {
  const auto e = shape(CellShape::Cube, 5, 2);
  const auto phi = NormingFunction::lorentz_p1(2.0);
  double prev = -1.0;
  for (int b = 1; b <= 5; ++b) {  // shrinking eps
    const double eps = std::pow(0.5, b) * std::sqrt(2.0) / 2.0 * (1.0 + 1e-9);
    const double v = covering_value(e, eps, phi, CoverStrategy::Dyadic).value;
    if (prev >= 0.0) CHECK(v >= prev - 1e-12);
    prev = v;
  }

  const auto carpet = shape(CellShape::Carpet, 2);
  CellSet full = carpet;
  full.cells.clear();
  for (int x = 0; x < 9; ++x)
    for (int y = 0; y < 9; ++y) full.cells.push_back({x, y});
  full.weights.assign(full.cells.size(), std::pow(full.side(), 2));
  full.validate();
  const double eps = carpet.cell_circumradius() * 3.0 * (1.0 + 1e-9);
  CHECK(covering_value(carpet, eps, phi, CoverStrategy::Dyadic).value <=
        covering_value(full, eps, phi, CoverStrategy::Dyadic).value + 1e-12);
}

TEST_CASE("greedy covering is valid and no worse than dyadic at the same eps") {
  const auto phi = NormingFunction::lorentz_p1(2.0);
  for (const auto& [s, level, eps] :
       {std::tuple{CellShape::Cantor, 3, 0.2}, std::tuple{CellShape::Interval, 3, 0.3},
        std::tuple{CellShape::Carpet, 2, 0.15}}) {
    const auto e = shape(s, level);
    const auto greedy = covering_value(e, eps, phi, CoverStrategy::Greedy);
    CHECK(greedy.value > 0.0);
    for (const auto& part : greedy.covering.parts) CHECK(part.radius < eps);
    const auto dyadic = covering_value(e, eps, phi, CoverStrategy::Dyadic);
    CHECK(greedy.value <= dyadic.value * (1.0 + 1e-9));
    // determinism
    CHECK(covering_value(e, eps, phi, CoverStrategy::Greedy).value == greedy.value);
  }
}

TEST_CASE("grid models") {
  const auto e = shape(CellShape::Interval, 2);
  const auto m = build_grid_model(e);
  REQUIRE(m.dim() == 1);
  CHECK(m.coords[0][0] == doctest::Approx(0.125));
  CHECK(m.coords[0][1] == doctest::Approx(0.375));
  CHECK(m.coords[0][2] == doctest::Approx(0.625));
  CHECK(m.coords[0][3] == doctest::Approx(0.875));
  for (int i = 0; i < 4; ++i) CHECK(m.xi[i] == doctest::Approx(0.5));

  const auto carpet = build_grid_model(shape(CellShape::Carpet, 1));
  CHECK(carpet.size() == 8);
  CHECK(carpet.dim() == 2);
  CHECK(std::abs(carpet.xi.norm() - 1.0) < 1e-12);
}

TEST_CASE("covering projection") {
  const auto e = shape(CellShape::Interval, 2);
  const auto m = build_grid_model(e);

  CoveringPartition singletons;
  for (int i = 0; i < 4; ++i) {
    CoveringPart part;
    part.cell_ids = {i};
    part.center = m.cells.cell_center(static_cast<std::size_t>(i));
    part.radius = m.cells.cell_circumradius() * (1 + 1e-9);
    singletons.parts.push_back(part);
  }
  CHECK((covering_projection(m, singletons) - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);

  const auto whole = block_partition(e, 0);
  const Mat pw = covering_projection(m, whole);
  CHECK((pw - 0.25 * Mat::Ones(4, 4)).cwiseAbs().maxCoeff() < 1e-12);  // rank one on uniform xi

  const auto halves = chunk_partition(e, 2);
  const Mat ph = covering_projection(m, halves);
  Mat expected = Mat::Zero(4, 4);
  expected.block(0, 0, 2, 2).setConstant(0.5);
  expected.block(2, 2, 2, 2).setConstant(0.5);
  CHECK((ph - expected).cwiseAbs().maxCoeff() < 1e-12);

  CHECK((ph * ph - ph).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((ph - ph.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((ph * m.xi - m.xi).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("certificate on the interval example") {
  const auto e = shape(CellShape::Interval, 2);
  const auto m = build_grid_model(e);
  const auto parts = chunk_partition(e, 2);
  const auto rep = certificate_check(m, parts, NormingFunction::lp(1.0), 0.3);
  CHECK(rep.lhs_ideal == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(rep.rhs_ideal == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(rep.lhs_op == doctest::Approx(0.125).epsilon(1e-9));
  CHECK(rep.ok);

  // singleton parts commute
  CoveringPartition singles;
  for (int i = 0; i < 4; ++i) {
    CoveringPart part;
    part.cell_ids = {i};
    part.center = e.cell_center(static_cast<std::size_t>(i));
    part.radius = e.cell_circumradius() * (1 + 1e-9);
    singles.parts.push_back(part);
  }
  const auto trivial = certificate_check(m, singles, NormingFunction::lp(1.0), 0.2);
  CHECK(trivial.lhs_ideal <= 1e-14);
  CHECK(trivial.ok);
}

TEST_CASE("certificate agrees with dense commutators") {
  for (const auto& [s, level, dim] : {std::tuple{CellShape::Interval, 2, 1},
                                      std::tuple{CellShape::Cube, 2, 2},
                                      std::tuple{CellShape::Cantor, 2, 1}}) {
    const auto e = shape(s, level, dim);
    const auto m = build_grid_model(e);
    const auto parts = block_partition(e, level - 1);
    double eps = 0.0;
    for (const auto& part : parts.parts) eps = std::max(eps, part.radius);
    eps *= 1.0 + 1e-9;
    for (const auto& phi : {NormingFunction::lp(1.0), NormingFunction::lp(2.0),
                            NormingFunction::lorentz_p1(2.0)}) {
      const auto rep = certificate_check(m, parts, phi, eps);
      const Mat p = covering_projection(m, parts);
      double dense_lhs = 0.0, dense_op = 0.0;
      for (int i = 0; i < m.dim(); ++i) {
        const Mat k = m.op_matrix(i) * p - p * m.op_matrix(i);
        dense_lhs = std::max(dense_lhs, evaluate_singular_norm(phi, k));
        dense_op = std::max(dense_op, singular_values(k).maxCoeff());
      }
      CHECK(approx_rel(rep.lhs_ideal, dense_lhs, 1e-8));
      CHECK(approx_rel(rep.lhs_op, dense_op, 1e-8));
      CHECK(rep.ok);
    }
  }
}

TEST_CASE("commutator blocks vanish for parts flat in a direction") {
  const auto e = shape(CellShape::Cube, 2, 2);
  const auto m = build_grid_model(e);
  // rows of cells: constant y within each part
  CoveringPartition rows;
  for (int y = 0; y < 4; ++y) {
    CoveringPart part;
    for (std::size_t i = 0; i < e.cells.size(); ++i)
      if (e.cells[i][1] == y) part.cell_ids.push_back(static_cast<int>(i));
    rows.parts.push_back(part);
  }
  for (auto& part : rows.parts) {
    // bounding box of the row
    double lo = 1.0, hi = 0.0, ylo = 1.0, yhi = 0.0;
    for (int id : part.cell_ids) {
      const Vec c = e.cell_center(static_cast<std::size_t>(id));
      lo = std::min(lo, c[0]);
      hi = std::max(hi, c[0]);
      ylo = std::min(ylo, c[1]);
      yhi = std::max(yhi, c[1]);
    }
    part.center = Vec(2);
    part.center << 0.5 * (lo + hi), 0.5 * (ylo + yhi);
    part.radius = 0.7;  // generous, contains the row
  }
  const Mat p = covering_projection(m, rows);
  const Mat ky = m.op_matrix(1) * p - p * m.op_matrix(1);
  CHECK(ky.cwiseAbs().maxCoeff() < 1e-14);
  const Mat kx = m.op_matrix(0) * p - p * m.op_matrix(0);
  CHECK(kx.cwiseAbs().maxCoeff() > 1e-3);
}

TEST_CASE("scaling study trends") {
  const auto square = scaling_study(CellShape::Cube, 2, 2.0, {2, 3, 4}, GaugeKind::LorentzP1);
  double lo = 1e300, hi = 0.0;
  for (const auto& row : square) {
    lo = std::min(lo, row.covering_value);
    hi = std::max(hi, row.covering_value);
    CHECK(row.certificate_lhs <= row.certificate_rhs * (1 + 1e-9));
  }
  CHECK(hi / lo <= 1.35);

  const auto interval = scaling_study(CellShape::Interval, 1, 1.0, {2, 3, 4, 5}, GaugeKind::LorentzP1);
  for (const auto& row : interval) CHECK(approx_rel(row.covering_value, 0.5, 0.02));
}

TEST_CASE("cell files round-trip") {
  auto e = shape(CellShape::Cantor, 2);
  e.weights[1] = 0.1234567890123456789;  // not representable exactly
  e.weights[2] = 1.0 / 3.0;
  const std::string text = serialize_cells(e);
  const CellSet back = parse_cells(text);
  CHECK(back.dim == e.dim);
  CHECK(back.level == e.level);
  CHECK(back.base == e.base);
  CHECK(back.cells == e.cells);
  REQUIRE(back.weights.size() == e.weights.size());
  for (std::size_t i = 0; i < e.weights.size(); ++i) CHECK(back.weights[i] == e.weights[i]);
  CHECK(serialize_cells(back) == text);
  CHECK_THROWS_AS(parse_cells("cells 1 2\nc 0 -1\n"), std::invalid_argument);
}

TEST_CASE("partition validation") {
  const auto e = shape(CellShape::Interval, 1);
  CoveringPartition bad;
  CoveringPart part;
  part.cell_ids = {0, 1};
  part.center = Vec::Constant(1, 0.5);
  part.radius = 0.1;  // too small to contain both cells
  bad.parts.push_back(part);
  CHECK_THROWS_AS(validate_partition(e, bad), std::invalid_argument);

  const auto m = build_grid_model(e);
  CoveringPartition incomplete;
  CoveringPart only;
  only.cell_ids = {0};
  only.center = e.cell_center(0);
  only.radius = e.cell_circumradius() * 1.1;
  incomplete.parts.push_back(only);
  CHECK_THROWS_AS(covering_projection(m, incomplete), std::invalid_argument);
}
