#include "nlcap/covering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <stdexcept>

namespace nlcap {

double CellSet::side() const { return std::pow(static_cast<double>(base), -level); }

double CellSet::cell_circumradius() const { return side() * std::sqrt(static_cast<double>(dim)) / 2.0; }

Vec CellSet::cell_center(std::size_t i) const {
  const double h = side();
  Vec c(dim);
  for (int k = 0; k < dim; ++k)
    c[k] = (cells[i][static_cast<std::size_t>(k)] + 0.5) * h;
  return c;
}

void CellSet::validate() const {
  if (dim < 1 || dim > 3) throw std::invalid_argument("cell set dimension must be 1..3");
  if (level < 0) throw std::invalid_argument("cell set level must be >= 0");
  if (base != 2 && base != 3) throw std::invalid_argument("cell set base must be 2 or 3");
  if (cells.size() != weights.size())
    throw std::invalid_argument("cell and weight counts differ");
  if (cells.empty()) throw std::invalid_argument("cell set is empty");
  long long per_axis = 1;
  for (int l = 0; l < level; ++l) per_axis *= base;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (static_cast<int>(cells[i].size()) != dim)
      throw std::invalid_argument("cell index arity mismatch");
    for (int k = 0; k < dim; ++k)
      if (cells[i][static_cast<std::size_t>(k)] < 0 || cells[i][static_cast<std::size_t>(k)] >= per_axis)
        throw std::invalid_argument("cell index outside [0,1]^n");
    if (!(weights[i] > 0.0) || !std::isfinite(weights[i]))
      throw std::invalid_argument("cell weights must be positive and finite");
    if (i > 0 && !(cells[i - 1] < cells[i]))
      throw std::invalid_argument("cells must be strictly increasing in lexicographic order");
  }
}

CellShape parse_shape(const std::string& text) {
  if (text == "cube") return CellShape::Cube;
  if (text == "interval") return CellShape::Interval;
  if (text == "cantor") return CellShape::Cantor;
  if (text == "carpet") return CellShape::Carpet;
  throw std::invalid_argument("unknown shape '" + text + "' (cube, interval, cantor, carpet)");
}

std::string shape_name(CellShape s) {
  switch (s) {
    case CellShape::Cube: return "cube";
    case CellShape::Interval: return "interval";
    case CellShape::Cantor: return "cantor";
    case CellShape::Carpet: return "carpet";
  }
  return "?";
}

CellSet build_cell_set(const ShapeSpec& spec, std::size_t max_cells) {
  if (spec.level < 0) throw std::invalid_argument("level must be >= 0");
  CellSet e;
  e.level = spec.level;
  switch (spec.shape) {
    case CellShape::Cube: {
      if (spec.dim < 1 || spec.dim > 3) throw std::invalid_argument("cube dimension must be 1..3");
      e.dim = spec.dim;
      e.base = 2;
      break;
    }
    case CellShape::Interval: e.dim = 1; e.base = 2; break;
    case CellShape::Cantor: e.dim = 1; e.base = 3; break;
    case CellShape::Carpet: e.dim = 2; e.base = 3; break;
  }

  long long per_axis = 1;
  for (int l = 0; l < spec.level; ++l) per_axis *= e.base;

  auto cell_count_guard = [&](double predicted) {
    if (predicted > static_cast<double>(max_cells))
      throw std::length_error("cell count exceeds the cap of " + std::to_string(max_cells));
  };

  switch (spec.shape) {
    case CellShape::Cube:
    case CellShape::Interval: {
      cell_count_guard(std::pow(static_cast<double>(per_axis), e.dim));
      std::vector<int> idx(static_cast<std::size_t>(e.dim), 0);
      while (true) {
        e.cells.push_back(idx);
        int k = e.dim - 1;
        while (k >= 0 && ++idx[static_cast<std::size_t>(k)] == per_axis) {
          idx[static_cast<std::size_t>(k)] = 0;
          --k;
        }
        if (k < 0) break;
      }
      break;
    }
    case CellShape::Cantor: {
      cell_count_guard(std::pow(2.0, spec.level));
      // base-3 digits restricted to {0, 2}
      std::vector<int> xs{0};
      for (int l = 0; l < spec.level; ++l) {
        std::vector<int> next;
        for (int x : xs) {
          next.push_back(3 * x);
          next.push_back(3 * x + 2);
        }
        xs = std::move(next);
      }
      std::sort(xs.begin(), xs.end());
      for (int x : xs) e.cells.push_back({x});
      break;
    }
    case CellShape::Carpet: {
      cell_count_guard(std::pow(8.0, spec.level));
      std::vector<std::pair<int, int>> ps{{0, 0}};
      for (int l = 0; l < spec.level; ++l) {
        std::vector<std::pair<int, int>> next;
        for (auto [x, y] : ps)
          for (int dx = 0; dx < 3; ++dx)
            for (int dy = 0; dy < 3; ++dy) {
              if (dx == 1 && dy == 1) continue;
              next.emplace_back(3 * x + dx, 3 * y + dy);
            }
        ps = std::move(next);
      }
      std::sort(ps.begin(), ps.end());
      for (auto [x, y] : ps) e.cells.push_back({x, y});
      break;
    }
  }

  const double w = spec.lebesgue ? std::pow(e.side(), e.dim) : 1.0 / static_cast<double>(e.cells.size());
  e.weights.assign(e.cells.size(), w);
  e.validate();
  return e;
}

namespace {

struct BoundingBox {
  std::vector<int> lo, hi;  // inclusive cell-index box

  void absorb(const std::vector<int>& idx) {
    if (lo.empty()) {
      lo = hi = idx;
      return;
    }
    for (std::size_t k = 0; k < idx.size(); ++k) {
      lo[k] = std::min(lo[k], idx[k]);
      hi[k] = std::max(hi[k], idx[k]);
    }
  }
};

void set_center_radius(const CellSet& e, CoveringPart& part) {
  BoundingBox box;
  for (int id : part.cell_ids) box.absorb(e.cells[static_cast<std::size_t>(id)]);
  const double h = e.side();
  part.center = Vec(e.dim);
  double sq = 0.0;
  for (int k = 0; k < e.dim; ++k) {
    const double lo = box.lo[static_cast<std::size_t>(k)] * h;
    const double hi = (box.hi[static_cast<std::size_t>(k)] + 1) * h;
    part.center[k] = 0.5 * (lo + hi);
    sq += 0.25 * (hi - lo) * (hi - lo);
  }
  part.radius = std::sqrt(sq);
}

}  // namespace

void validate_partition(const CellSet& e, const CoveringPartition& c) {
  std::vector<char> seen(e.cells.size(), 0);
  const double cell_r = e.cell_circumradius();
  for (const auto& part : c.parts) {
    if (part.cell_ids.empty()) throw std::invalid_argument("covering has an empty part");
    if (part.center.size() != e.dim) throw std::invalid_argument("part center has wrong arity");
    for (int id : part.cell_ids) {
      if (id < 0 || id >= static_cast<int>(e.cells.size()))
        throw std::invalid_argument("part references an unknown cell");
      if (seen[static_cast<std::size_t>(id)])
        throw std::invalid_argument("covering parts overlap");
      seen[static_cast<std::size_t>(id)] = 1;
      const Vec center = e.cell_center(static_cast<std::size_t>(id));
      const double dist = (center - part.center).norm() + cell_r;
      if (dist > part.radius * (1.0 + 1e-12) + 1e-15)
        throw std::invalid_argument("part ball does not contain all of its cells");
    }
  }
  for (char s : seen)
    if (!s) throw std::invalid_argument("covering misses a cell");
}

CoveringPartition block_partition(const CellSet& e, int block_level) {
  if (block_level < 0 || block_level > e.level)
    throw std::invalid_argument("block level must lie in [0, level]");
  long long shrink = 1;
  for (int l = block_level; l < e.level; ++l) shrink *= e.base;
  std::map<std::vector<int>, std::vector<int>> groups;
  for (std::size_t i = 0; i < e.cells.size(); ++i) {
    std::vector<int> key(static_cast<std::size_t>(e.dim));
    for (int k = 0; k < e.dim; ++k)
      key[static_cast<std::size_t>(k)] =
          static_cast<int>(e.cells[i][static_cast<std::size_t>(k)] / shrink);
    groups[key].push_back(static_cast<int>(i));
  }
  CoveringPartition c;
  for (auto& [key, ids] : groups) {
    CoveringPart part;
    part.cell_ids = ids;
    set_center_radius(e, part);
    c.parts.push_back(std::move(part));
  }
  return c;
}

CoveringPartition chunk_partition(const CellSet& e, int n_parts) {
  const int n = static_cast<int>(e.cells.size());
  if (n_parts < 1 || n_parts > n)
    throw std::invalid_argument("part count must lie in [1, cell count]");
  CoveringPartition c;
  int start = 0;
  for (int j = 0; j < n_parts; ++j) {
    const int len = n / n_parts + (j < n % n_parts ? 1 : 0);
    CoveringPart part;
    for (int i = start; i < start + len; ++i) part.cell_ids.push_back(i);
    set_center_radius(e, part);
    c.parts.push_back(std::move(part));
    start += len;
  }
  return c;
}

CoverStrategy parse_strategy(const std::string& text) {
  if (text == "dyadic") return CoverStrategy::Dyadic;
  if (text == "greedy") return CoverStrategy::Greedy;
  throw std::invalid_argument("unknown covering strategy '" + text + "' (dyadic, greedy)");
}

CoveringResult covering_value(const CellSet& e, double eps, const NormingFunction& phi,
                              CoverStrategy strategy) {
  e.validate();
  if (!(eps > e.cell_circumradius()))
    throw std::invalid_argument("eps must exceed the cell circumradius");

  CoveringResult result;
  if (strategy == CoverStrategy::Dyadic) {
    // Coarsest grid level whose nominal block circumradius is below eps.
    int b = e.level;
    for (int cand = 0; cand <= e.level; ++cand) {
      const double r = std::pow(static_cast<double>(e.base), -cand) * std::sqrt(e.dim) / 2.0;
      if (r < eps) {
        b = cand;
        break;
      }
    }
    result.covering = block_partition(e, b);
  } else {
    const double h = e.side();
    long long per_axis = 1;
    for (int l = 0; l < e.level; ++l) per_axis *= e.base;
    int w = 1;
    while (w + 1 <= per_axis && (w + 1) * h * std::sqrt(e.dim) / 2.0 < eps) ++w;

    std::vector<char> covered(e.cells.size(), 0);
    std::size_t remaining = e.cells.size();
    BoundingBox all;
    for (const auto& idx : e.cells) all.absorb(idx);
    while (remaining > 0) {
      // window position covering the most uncovered cells, lexicographic ties
      std::vector<int> best_off;
      std::size_t best_count = 0;
      std::vector<int> off(static_cast<std::size_t>(e.dim));
      std::vector<int> lo(static_cast<std::size_t>(e.dim)), hi(static_cast<std::size_t>(e.dim));
      for (int k = 0; k < e.dim; ++k) {
        lo[static_cast<std::size_t>(k)] = std::max(0, all.lo[static_cast<std::size_t>(k)] - w + 1);
        hi[static_cast<std::size_t>(k)] = all.hi[static_cast<std::size_t>(k)];
        off[static_cast<std::size_t>(k)] = lo[static_cast<std::size_t>(k)];
      }
      while (true) {
        std::size_t count = 0;
        for (std::size_t i = 0; i < e.cells.size(); ++i) {
          if (covered[i]) continue;
          bool inside = true;
          for (int k = 0; k < e.dim && inside; ++k) {
            const int x = e.cells[i][static_cast<std::size_t>(k)];
            inside = x >= off[static_cast<std::size_t>(k)] && x < off[static_cast<std::size_t>(k)] + w;
          }
          if (inside) ++count;
        }
        if (count > best_count) {
          best_count = count;
          best_off = off;
        }
        int k = e.dim - 1;
        while (k >= 0 && ++off[static_cast<std::size_t>(k)] > hi[static_cast<std::size_t>(k)]) {
          off[static_cast<std::size_t>(k)] = lo[static_cast<std::size_t>(k)];
          --k;
        }
        if (k < 0) break;
      }
      CoveringPart part;
      for (std::size_t i = 0; i < e.cells.size(); ++i) {
        if (covered[i]) continue;
        bool inside = true;
        for (int k = 0; k < e.dim && inside; ++k) {
          const int x = e.cells[i][static_cast<std::size_t>(k)];
          inside = x >= best_off[static_cast<std::size_t>(k)] && x < best_off[static_cast<std::size_t>(k)] + w;
        }
        if (inside) {
          covered[i] = 1;
          part.cell_ids.push_back(static_cast<int>(i));
          --remaining;
        }
      }
      set_center_radius(e, part);
      result.covering.parts.push_back(std::move(part));
    }
  }

  validate_partition(e, result.covering);
  Vec radii(static_cast<Eigen::Index>(result.covering.parts.size()));
  for (std::size_t j = 0; j < result.covering.parts.size(); ++j) {
    const double r = result.covering.parts[j].radius;
    if (!(r < eps)) throw std::invalid_argument("covering radius reached eps");
    radii[static_cast<Eigen::Index>(j)] = r;
  }
  result.value = evaluate_norm(phi, radii);
  return result;
}

GridModel build_grid_model(const CellSet& e) {
  e.validate();
  GridModel m;
  m.cells = e;
  const int n = static_cast<int>(e.cells.size());
  m.coords.assign(static_cast<std::size_t>(e.dim), Vec(n));
  double total = 0.0;
  for (const double w : e.weights) total += w;
  m.xi = Vec(n);
  for (int i = 0; i < n; ++i) {
    const Vec c = e.cell_center(static_cast<std::size_t>(i));
    for (int k = 0; k < e.dim; ++k) m.coords[static_cast<std::size_t>(k)][i] = c[k];
    m.xi[i] = std::sqrt(e.weights[static_cast<std::size_t>(i)] / total);
  }
  return m;
}

Mat GridModel::op_matrix(int i) const {
  return Mat(coords[static_cast<std::size_t>(i)].asDiagonal());
}

Mat covering_projection(const GridModel& m, const CoveringPartition& c) {
  validate_partition(m.cells, c);
  const int n = m.size();
  Mat p = Mat::Zero(n, n);
  for (const auto& part : c.parts) {
    Vec psi = Vec::Zero(n);
    for (int id : part.cell_ids) psi[id] = m.xi[id];
    const double nrm = psi.norm();
    if (!(nrm > 0.0)) throw std::invalid_argument("covering part has zero mass");
    psi /= nrm;
    p.noalias() += psi * psi.transpose();
  }
  return p;
}

CertificateReport certificate_check(const GridModel& m, const CoveringPartition& c,
                                    const NormingFunction& phi, double eps) {
  validate_partition(m.cells, c);
  CertificateReport rep;
  rep.eps = eps;
  for (const auto& part : c.parts) {
    if (!(part.radius < eps))
      throw std::invalid_argument("partition radius reached eps");
    rep.radii.push_back(part.radius);
  }

  // Per part and coordinate, [D_i, psi psi^T] restricted to the part is
  // a psi^T - psi a^T with a = D_i psi, whose nonzero singular values are the
  // pair (beta, beta), beta = |a - <a, psi> psi|.
  const int dim = m.dim();
  double lhs_ideal = 0.0;
  for (int i = 0; i < dim; ++i) {
    Vec betas(static_cast<Eigen::Index>(c.parts.size()));
    for (std::size_t j = 0; j < c.parts.size(); ++j) {
      const auto& part = c.parts[j];
      const std::size_t len = part.cell_ids.size();
      Vec psi(static_cast<Eigen::Index>(len)), dpsi(static_cast<Eigen::Index>(len));
      for (std::size_t t = 0; t < len; ++t) psi[static_cast<Eigen::Index>(t)] = m.xi[part.cell_ids[t]];
      psi /= psi.norm();
      for (std::size_t t = 0; t < len; ++t)
        dpsi[static_cast<Eigen::Index>(t)] =
            m.coords[static_cast<std::size_t>(i)][part.cell_ids[t]] * psi[static_cast<Eigen::Index>(t)];
      const Vec resid = dpsi - psi.dot(dpsi) * psi;
      betas[static_cast<Eigen::Index>(j)] = resid.norm();
    }
    rep.lhs_op = std::max(rep.lhs_op, betas.size() > 0 ? betas.maxCoeff() : 0.0);
    Vec doubled(2 * betas.size());
    doubled << betas, betas;
    lhs_ideal = std::max(lhs_ideal, evaluate_norm(phi, doubled));
  }
  rep.lhs_ideal = lhs_ideal;
  Vec radii = Eigen::Map<const Vec>(rep.radii.data(), static_cast<Eigen::Index>(rep.radii.size()));
  rep.rhs_ideal = 2.0 * evaluate_norm(phi, radii);
  const bool ideal_ok = rep.lhs_ideal <= rep.rhs_ideal * (1.0 + 1e-9) + 1e-15;
  const bool op_ok = rep.lhs_op <= 2.0 * eps * (1.0 + 1e-9);
  rep.ok = ideal_ok && op_ok;
  return rep;
}

std::vector<ScalingRow> scaling_study(CellShape shape, int dim, double p,
                                      const std::vector<int>& levels, GaugeKind gauge_kind) {
  if (levels.empty()) throw std::invalid_argument("empty level list");
  for (std::size_t i = 1; i < levels.size(); ++i)
    if (levels[i] <= levels[i - 1]) throw std::invalid_argument("levels must be increasing");
  NormingFunction phi =
      gauge_kind == GaugeKind::LorentzP1 ? NormingFunction::lorentz_p1(p) : NormingFunction::lp(p);

  std::vector<ScalingRow> rows;
  for (int level : levels) {
    if (level < 1) throw std::invalid_argument("scaling study levels must be >= 1");
    ShapeSpec spec;
    spec.shape = shape;
    spec.dim = dim;
    spec.level = level;
    const CellSet e = build_cell_set(spec);
    const double eps_fine = e.cell_circumradius() * (1.0 + 1e-9);
    const CoveringResult fine = covering_value(e, eps_fine, phi, CoverStrategy::Dyadic);

    const GridModel model = build_grid_model(e);
    const CoveringPartition coarse = block_partition(e, level - 1);
    const double eps_coarse =
        std::pow(static_cast<double>(e.base), -(level - 1)) * std::sqrt(e.dim) / 2.0 * (1.0 + 1e-9);
    const CertificateReport cert = certificate_check(model, coarse, phi, eps_coarse);
    if (!cert.ok) throw std::runtime_error("certificate inequality failed in scaling study");

    rows.push_back({level, fine.value, cert.lhs_ideal, cert.rhs_ideal});
  }
  return rows;
}

std::string serialize_cells(const CellSet& e) {
  std::ostringstream os;
  os << "cells " << e.dim << ' ' << e.level << "\n";
  os << "base " << e.base << "\n";
  char buf[64];
  for (std::size_t i = 0; i < e.cells.size(); ++i) {
    os << 'c';
    for (int k = 0; k < e.dim; ++k) os << ' ' << e.cells[i][static_cast<std::size_t>(k)];
    std::snprintf(buf, sizeof buf, "%.17g", e.weights[i]);
    os << ' ' << buf << "\n";
  }
  return os.str();
}

CellSet parse_cells(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  bool have_header = false;
  CellSet e;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok) || tok[0] == '#') continue;
    if (!have_header) {
      if (tok != "cells")
        throw std::invalid_argument("line " + std::to_string(lineno) + ": expected 'cells <dim> <level>'");
      if (!(ss >> e.dim >> e.level))
        throw std::invalid_argument("line " + std::to_string(lineno) + ": bad cells header");
      have_header = true;
      continue;
    }
    if (tok == "base") {
      if (!(ss >> e.base))
        throw std::invalid_argument("line " + std::to_string(lineno) + ": bad base");
    } else if (tok == "c") {
      std::vector<int> idx(static_cast<std::size_t>(e.dim));
      for (int k = 0; k < e.dim; ++k)
        if (!(ss >> idx[static_cast<std::size_t>(k)]))
          throw std::invalid_argument("line " + std::to_string(lineno) + ": bad cell index");
      double w = 0.0;
      if (!(ss >> w)) throw std::invalid_argument("line " + std::to_string(lineno) + ": bad cell weight");
      e.cells.push_back(std::move(idx));
      e.weights.push_back(w);
    } else {
      throw std::invalid_argument("line " + std::to_string(lineno) + ": unknown record '" + tok + "'");
    }
  }
  if (!have_header) throw std::invalid_argument("empty cell file");
  e.validate();
  return e;
}

}  // namespace nlcap
