#pragma once
//
// Shared helpers for the test suites: seeded random inputs, random condenser
// instances, and a grid + local-search reference optimizer.
//

#include "nlcap/capacity.hpp"
#include "nlcap/graph.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <vector>

namespace nlcap::testing {

inline bool approx_rel(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({std::abs(a), std::abs(b), 1e-12});
}

inline Vec random_vec(std::mt19937_64& rng, int n, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = dist(rng);
  return v;
}

inline Mat random_mat(std::mt19937_64& rng, int rows, int cols) {
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  Mat m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = dist(rng);
  return m;
}

/// Path with `edges` edges on one generator; vertices p0..p<edges>.
inline LabeledGraph path_graph(int edges) {
  LabeledGraph g(1);
  for (int v = 0; v <= edges; ++v) g.add_vertex("p" + std::to_string(v), false);
  for (int v = 0; v < edges; ++v) g.add_edge(0, v, v + 1);
  return g;
}

/// Connected random graph: a random spanning tree plus extra edges, each
/// edge assigned to the first generator keeping the maps partial
/// permutations. All vertices interior.
inline LabeledGraph random_connected_graph(std::mt19937_64& rng, int n_vertices, int extra_edges) {
  std::vector<std::pair<int, int>> edge_list;
  std::set<std::pair<int, int>> seen;
  for (int v = 1; v < n_vertices; ++v) {
    const int u = static_cast<int>(rng() % static_cast<unsigned>(v));
    edge_list.emplace_back(u, v);
    seen.emplace(std::min(u, v), std::max(u, v));
  }
  int attempts = 0;
  while (extra_edges > 0 && attempts < 50 * extra_edges) {
    ++attempts;
    const int u = static_cast<int>(rng() % static_cast<unsigned>(n_vertices));
    const int v = static_cast<int>(rng() % static_cast<unsigned>(n_vertices));
    if (u == v) continue;
    const auto key = std::make_pair(std::min(u, v), std::max(u, v));
    if (seen.count(key)) continue;
    seen.insert(key);
    edge_list.emplace_back(u, v);
    --extra_edges;
  }

  // greedy generator assignment keeping each map injective
  std::vector<std::vector<char>> out_used, in_used;
  std::vector<int> gen_of(edge_list.size(), -1);
  for (std::size_t i = 0; i < edge_list.size(); ++i) {
    const auto [u, v] = edge_list[i];
    int gen = -1;
    for (std::size_t gidx = 0; gidx < out_used.size(); ++gidx)
      if (!out_used[gidx][static_cast<std::size_t>(u)] && !in_used[gidx][static_cast<std::size_t>(v)]) {
        gen = static_cast<int>(gidx);
        break;
      }
    if (gen < 0) {
      gen = static_cast<int>(out_used.size());
      out_used.emplace_back(static_cast<std::size_t>(n_vertices), 0);
      in_used.emplace_back(static_cast<std::size_t>(n_vertices), 0);
    }
    out_used[static_cast<std::size_t>(gen)][static_cast<std::size_t>(u)] = 1;
    in_used[static_cast<std::size_t>(gen)][static_cast<std::size_t>(v)] = 1;
    gen_of[i] = gen;
  }

  LabeledGraph g(static_cast<int>(out_used.size()));
  for (int v = 0; v < n_vertices; ++v) g.add_vertex("v" + std::to_string(v), false);
  for (std::size_t i = 0; i < edge_list.size(); ++i)
    g.add_edge(gen_of[i], edge_list[i].first, edge_list[i].second);
  return g;
}

/// Random disjoint nonempty source/sink sets of size 1..3 each.
inline void random_condenser_sets(std::mt19937_64& rng, int n_vertices, std::vector<int>& source,
                                  std::vector<int>& sink) {
  std::vector<int> ids(static_cast<std::size_t>(n_vertices));
  for (int v = 0; v < n_vertices; ++v) ids[static_cast<std::size_t>(v)] = v;
  std::shuffle(ids.begin(), ids.end(), rng);
  const int ns = 1 + static_cast<int>(rng() % 3);
  const int nt = 1 + static_cast<int>(rng() % 3);
  source.assign(ids.begin(), ids.begin() + ns);
  sink.assign(ids.begin() + ns, ids.begin() + std::min<std::size_t>(ids.size(), ns + nt));
}

/// Reference optimizer: coarse full grid over the free values, then a
/// seeded shrinking local random search. Independent of the solver path.
inline double grid_reference_value(const CondenserProblem& p, std::uint64_t seed) {
  p.validate();
  const LabeledGraph& g = *p.graph;
  const int nv = g.vertex_count();
  std::vector<char> pinned(static_cast<std::size_t>(nv), 0);
  Vec full = Vec::Zero(nv);
  for (int v = 0; v < nv; ++v)
    if (g.is_halo(v)) pinned[static_cast<std::size_t>(v)] = 1;
  for (int v : p.sink) pinned[static_cast<std::size_t>(v)] = 1;
  for (int v : p.source) {
    pinned[static_cast<std::size_t>(v)] = 1;
    full[v] = 1.0;
  }
  std::vector<int> free_ids;
  for (int v = 0; v < nv; ++v)
    if (!pinned[static_cast<std::size_t>(v)]) free_ids.push_back(v);
  const int k = static_cast<int>(free_ids.size());

  auto eval = [&](const std::vector<double>& x) {
    for (int i = 0; i < k; ++i) full[free_ids[static_cast<std::size_t>(i)]] = x[static_cast<std::size_t>(i)];
    return gradient_seminorm(g, full, p.phi, p.combiner);
  };

  std::vector<double> x(static_cast<std::size_t>(k), 0.0), best_x = x;
  if (k == 0) return eval(x);

  int steps = 8;  // finest full grid that stays around <= 6e5 points
  while (std::pow(steps * 2 + 1.0, k) <= 6e5 && steps < 64) steps *= 2;
  if (std::pow(steps + 1.0, k) > 6e5) steps = 8;

  double best = std::numeric_limits<double>::infinity();
  std::vector<int> grid(static_cast<std::size_t>(k), 0);
  while (true) {
    for (int i = 0; i < k; ++i)
      x[static_cast<std::size_t>(i)] = static_cast<double>(grid[static_cast<std::size_t>(i)]) / steps;
    const double v = eval(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
    int i = k - 1;
    while (i >= 0 && ++grid[static_cast<std::size_t>(i)] > steps) {
      grid[static_cast<std::size_t>(i)] = 0;
      --i;
    }
    if (i < 0) break;
  }

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double radius = 1.0 / steps;
  for (int round = 0; round < 14; ++round) {
    for (int s = 0; s < 1500; ++s) {
      for (int i = 0; i < k; ++i)
        x[static_cast<std::size_t>(i)] =
            std::clamp(best_x[static_cast<std::size_t>(i)] + radius * gauss(rng), 0.0, 1.0);
      const double v = eval(x);
      if (v < best) {
        best = v;
        best_x = x;
      }
    }
    radius *= 0.5;
  }

  // Exact line minimization along random directions: the objective is convex,
  // so ternary search on the feasible segment is exact.
  std::vector<double> dir(static_cast<std::size_t>(k));
  for (int round = 0; round < 2000; ++round) {
    double nrm = 0.0;
    for (int i = 0; i < k; ++i) {
      dir[static_cast<std::size_t>(i)] = gauss(rng);
      nrm += dir[static_cast<std::size_t>(i)] * dir[static_cast<std::size_t>(i)];
    }
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) continue;
    double tlo = -1e30, thi = 1e30;
    for (int i = 0; i < k; ++i) {
      const double d = dir[static_cast<std::size_t>(i)] / nrm;
      dir[static_cast<std::size_t>(i)] = d;
      if (d == 0.0) continue;
      const double a = (0.0 - best_x[static_cast<std::size_t>(i)]) / d;
      const double b = (1.0 - best_x[static_cast<std::size_t>(i)]) / d;
      tlo = std::max(tlo, std::min(a, b));
      thi = std::min(thi, std::max(a, b));
    }
    if (!(thi > tlo)) continue;
    auto eval_t = [&](double t) {
      for (int i = 0; i < k; ++i)
        x[static_cast<std::size_t>(i)] = std::clamp(
            best_x[static_cast<std::size_t>(i)] + t * dir[static_cast<std::size_t>(i)], 0.0, 1.0);
      return eval(x);
    };
    double lo = tlo, hi = thi;
    for (int it = 0; it < 80; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (eval_t(m1) <= eval_t(m2))
        hi = m2;
      else
        lo = m1;
    }
    const double t = 0.5 * (lo + hi);
    const double v = eval_t(t);
    if (v < best) {
      best = v;
      for (int i = 0; i < k; ++i)
        best_x[static_cast<std::size_t>(i)] = std::clamp(
            best_x[static_cast<std::size_t>(i)] + t * dir[static_cast<std::size_t>(i)], 0.0, 1.0);
    }
  }
  return best;
}

}  // namespace nlcap::testing
