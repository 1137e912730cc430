#include "nlcap/capacity.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nlcap {

namespace {

constexpr double kActiveTol = 1e-9;  // generators within this of the max are active

std::vector<int> bfs_distances(const LabeledGraph& g, const std::vector<char>& sources) {
  std::vector<int> dist(static_cast<std::size_t>(g.vertex_count()), -1);
  std::deque<int> q;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (sources[static_cast<std::size_t>(v)]) {
      dist[static_cast<std::size_t>(v)] = 0;
      q.push_back(v);
    }
  const auto& adj = g.adjacency();
  while (!q.empty()) {
    const int v = q.front();
    q.pop_front();
    for (int u : adj[static_cast<std::size_t>(v)])
      if (dist[static_cast<std::size_t>(u)] < 0) {
        dist[static_cast<std::size_t>(u)] = dist[static_cast<std::size_t>(v)] + 1;
        q.push_back(u);
      }
  }
  return dist;
}

}  // namespace

void CondenserProblem::validate() const {
  if (!graph) throw std::invalid_argument("condenser problem has no graph");
  if (source.empty()) throw std::invalid_argument("source set X1 must be nonempty");
  std::vector<char> in_source(static_cast<std::size_t>(graph->vertex_count()), 0);
  for (int v : source) {
    if (v < 0 || v >= graph->vertex_count()) throw std::invalid_argument("source vertex out of range");
    if (graph->is_halo(v))
      throw std::invalid_argument("source vertex '" + graph->label(v) + "' lies in the halo");
    in_source[static_cast<std::size_t>(v)] = 1;
  }
  for (int v : sink) {
    if (v < 0 || v >= graph->vertex_count()) throw std::invalid_argument("sink vertex out of range");
    if (in_source[static_cast<std::size_t>(v)])
      throw std::invalid_argument("source and sink sets intersect at '" + graph->label(v) + "'");
  }
}

double condenser_objective(const LabeledGraph& g, const Vec& f, const NormingFunction& phi,
                           GradientCombiner combiner, Vec* grad) {
  const int ngen = g.generator_count();
  const int nv = g.vertex_count();
  if (grad) *grad = Vec::Zero(nv);

  switch (combiner) {
    case GradientCombiner::MaxThenNorm: {
      std::vector<Vec> diffs(static_cast<std::size_t>(ngen));
      double best = 0.0;
      for (int j = 0; j < ngen; ++j) {
        const auto& es = g.edges()[static_cast<std::size_t>(j)];
        Vec d(static_cast<Eigen::Index>(es.size()));
        for (std::size_t i = 0; i < es.size(); ++i)
          d[static_cast<Eigen::Index>(i)] = f[es[i].dst] - f[es[i].src];
        diffs[static_cast<std::size_t>(j)] = std::move(d);
      }
      std::vector<double> vals(static_cast<std::size_t>(ngen), 0.0);
      for (int j = 0; j < ngen; ++j) {
        vals[static_cast<std::size_t>(j)] = evaluate_norm(phi, diffs[static_cast<std::size_t>(j)]);
        best = std::max(best, vals[static_cast<std::size_t>(j)]);
      }
      if (grad && ngen > 0) {
        int active = 0;
        for (int j = 0; j < ngen; ++j)
          if (vals[static_cast<std::size_t>(j)] >= best - kActiveTol) ++active;
        for (int j = 0; j < ngen; ++j) {
          if (vals[static_cast<std::size_t>(j)] < best - kActiveTol) continue;
          const Vec w = subgradient_vector(phi, diffs[static_cast<std::size_t>(j)]);
          const auto& es = g.edges()[static_cast<std::size_t>(j)];
          for (std::size_t i = 0; i < es.size(); ++i) {
            const double c = w[static_cast<Eigen::Index>(i)] / active;
            (*grad)[es[i].dst] += c;
            (*grad)[es[i].src] -= c;
          }
        }
      }
      return best;
    }

    case GradientCombiner::PointwiseMaxThenNorm: {
      Vec m = Vec::Zero(nv);
      for (int j = 0; j < ngen; ++j)
        for (const auto& e : g.edges()[static_cast<std::size_t>(j)])
          m[e.src] = std::max(m[e.src], std::abs(f[e.dst] - f[e.src]));
      const double value = evaluate_norm(phi, m);
      if (grad) {
        const Vec w = subgradient_vector(phi, m);
        for (int v = 0; v < nv; ++v) {
          if (m[v] <= 0.0 || w[v] == 0.0) continue;
          // active generators at v, averaged
          std::vector<int> act_dst;
          std::vector<double> act_sign;
          for (int j = 0; j < ngen; ++j) {
            const int t = g.edge_map()[static_cast<std::size_t>(j)][static_cast<std::size_t>(v)];
            if (t < 0) continue;
            const double d = f[t] - f[v];
            if (std::abs(d) >= m[v] - kActiveTol) {
              act_dst.push_back(t);
              act_sign.push_back(d >= 0.0 ? 1.0 : -1.0);
            }
          }
          if (act_dst.empty()) continue;
          for (std::size_t a = 0; a < act_dst.size(); ++a) {
            const double c = w[v] * act_sign[a] / static_cast<double>(act_dst.size());
            (*grad)[act_dst[a]] += c;
            (*grad)[v] -= c;
          }
        }
      }
      return value;
    }

    case GradientCombiner::EuclideanThenNorm: {
      Vec sq = Vec::Zero(nv);
      for (int j = 0; j < ngen; ++j)
        for (const auto& e : g.edges()[static_cast<std::size_t>(j)]) {
          const double d = f[e.dst] - f[e.src];
          sq[e.src] += d * d;
        }
      const Vec en = sq.cwiseSqrt();
      const double value = evaluate_norm(phi, en);
      if (grad) {
        const Vec w = subgradient_vector(phi, en);
        for (int j = 0; j < ngen; ++j)
          for (const auto& e : g.edges()[static_cast<std::size_t>(j)]) {
            if (en[e.src] <= 0.0 || w[e.src] == 0.0) continue;
            const double d = f[e.dst] - f[e.src];
            const double c = w[e.src] * d / en[e.src];
            (*grad)[e.dst] += c;
            (*grad)[e.src] -= c;
          }
      }
      return value;
    }

    case GradientCombiner::SumThenNorm: {
      std::size_t total = 0;
      for (int j = 0; j < ngen; ++j) total += g.edges()[static_cast<std::size_t>(j)].size();
      Vec cat(static_cast<Eigen::Index>(total));
      Eigen::Index pos = 0;
      for (int j = 0; j < ngen; ++j)
        for (const auto& e : g.edges()[static_cast<std::size_t>(j)])
          cat[pos++] = f[e.dst] - f[e.src];
      const double value = evaluate_norm(phi, cat);
      if (grad) {
        const Vec w = subgradient_vector(phi, cat);
        pos = 0;
        for (int j = 0; j < ngen; ++j)
          for (const auto& e : g.edges()[static_cast<std::size_t>(j)]) {
            const double c = w[pos++];
            (*grad)[e.dst] += c;
            (*grad)[e.src] -= c;
          }
      }
      return value;
    }
  }
  throw std::logic_error("unreachable");
}

GraphSolveReport solve_condenser(const CondenserProblem& p, const SolveOptions& opts) {
  p.validate();
  const LabeledGraph& g = *p.graph;
  const int nv = g.vertex_count();

  std::vector<char> pinned(static_cast<std::size_t>(nv), 0);
  Vec base = Vec::Zero(nv);
  for (int v = 0; v < nv; ++v)
    if (g.is_halo(v)) pinned[static_cast<std::size_t>(v)] = 1;
  for (int v : p.sink) pinned[static_cast<std::size_t>(v)] = 1;
  for (int v : p.source) {
    pinned[static_cast<std::size_t>(v)] = 1;
    base[v] = 1.0;
  }
  std::vector<int> free_ids;
  for (int v = 0; v < nv; ++v)
    if (!pinned[static_cast<std::size_t>(v)]) free_ids.push_back(v);

  // Distance-based interpolation between the source (1) and sink + halo (0).
  std::vector<char> src_mask(static_cast<std::size_t>(nv), 0), snk_mask(static_cast<std::size_t>(nv), 0);
  for (int v : p.source) src_mask[static_cast<std::size_t>(v)] = 1;
  for (int v : p.sink) snk_mask[static_cast<std::size_t>(v)] = 1;
  for (int v = 0; v < nv; ++v)
    if (g.is_halo(v)) snk_mask[static_cast<std::size_t>(v)] = 1;
  const auto d1 = bfs_distances(g, src_mask);
  const auto d2 = bfs_distances(g, snk_mask);

  Vec full = base;
  Vec x(static_cast<Eigen::Index>(free_ids.size()));
  for (std::size_t i = 0; i < free_ids.size(); ++i) {
    const int v = free_ids[i];
    const int a = d1[static_cast<std::size_t>(v)], b = d2[static_cast<std::size_t>(v)];
    double val = 0.0;
    if (a >= 0 && b >= 0)
      val = static_cast<double>(b) / static_cast<double>(a + b);
    else if (a >= 0)
      val = 1.0;
    x[static_cast<Eigen::Index>(i)] = val;
  }

  SubgradientCallbacks cb;
  Vec grad_full(nv);
  cb.value_and_subgradient = [&](const Vec& xf, Vec& gout) {
    for (std::size_t i = 0; i < free_ids.size(); ++i)
      full[free_ids[i]] = xf[static_cast<Eigen::Index>(i)];
    const double val = condenser_objective(g, full, p.phi, p.combiner, &grad_full);
    for (std::size_t i = 0; i < free_ids.size(); ++i)
      gout[static_cast<Eigen::Index>(i)] = grad_full[free_ids[i]];
    return val;
  };
  cb.project = [&](Vec& xf) {
    if (p.box)
      for (Eigen::Index i = 0; i < xf.size(); ++i) xf[i] = std::clamp(xf[i], 0.0, 1.0);
  };

  const SolveStats stats = projected_subgradient(cb, x, opts);

  GraphSolveReport report;
  for (std::size_t i = 0; i < free_ids.size(); ++i)
    full[free_ids[i]] = x[static_cast<Eigen::Index>(i)];
  report.value = stats.value;
  report.minimizer = full;
  report.iterations = stats.iterations;
  report.best_value_history = stats.best_value_history;
  report.tolerance_met = stats.tolerance_met;
  double resid = 0.0;
  for (int v : p.source) resid = std::max(resid, std::abs(full[v] - 1.0));
  for (int v : p.sink) resid = std::max(resid, std::abs(full[v]));
  for (int v = 0; v < nv; ++v) {
    if (g.is_halo(v)) resid = std::max(resid, std::abs(full[v]));
    if (p.box) resid = std::max({resid, -full[v], full[v] - 1.0});
  }
  report.feasibility_residual = std::max(resid, 0.0);
  return report;
}

std::vector<ProfilePoint> capacity_profile(const GroupSpec& group, const std::string& source_labels,
                                           const NormingFunction& phi, GradientCombiner combiner,
                                           const std::vector<int>& radii, const SolveOptions& opts) {
  if (radii.empty()) throw std::invalid_argument("empty radius list");
  for (std::size_t i = 1; i < radii.size(); ++i)
    if (radii[i] < radii[i - 1]) throw std::invalid_argument("radii must be nondecreasing");

  std::vector<ProfilePoint> out;
  for (int r : radii) {
    const LabeledGraph ball = cayley_ball(group, r);
    CondenserProblem prob;
    prob.graph = &ball;
    std::string labels = source_labels;
    // the identity may be written "e" for any group
    prob.source.clear();
    {
      std::istringstream ss(labels);
      std::string tok;
      while (std::getline(ss, tok, ';')) {
        if (tok.empty()) continue;
        const std::string lab = (tok == "e") ? identity_label(group) : tok;
        const int id = ball.find(lab);
        if (id < 0)
          throw std::invalid_argument("source vertex '" + tok + "' not in the radius-" +
                                      std::to_string(r) + " ball");
        if (ball.is_halo(id) || std::find(prob.source.begin(), prob.source.end(), id) != prob.source.end())
          continue;
        prob.source.push_back(id);
      }
    }
    prob.phi = phi;
    prob.combiner = combiner;
    const GraphSolveReport rep = solve_condenser(prob, opts);
    out.push_back({r, rep.value, rep.iterations, rep.tolerance_met});
  }
  return out;
}

double oracle_quadratic(const CondenserProblem& p) {
  p.validate();
  if (p.phi.kind != GaugeKind::Lp || p.phi.p != 2.0 ||
      p.combiner != GradientCombiner::EuclideanThenNorm)
    throw std::invalid_argument("quadratic oracle requires phi = l2 and the euclidean combiner");
  const LabeledGraph& g = *p.graph;
  const int nv = g.vertex_count();

  Vec f = Vec::Zero(nv);
  std::vector<char> pinned(static_cast<std::size_t>(nv), 0);
  for (int v = 0; v < nv; ++v)
    if (g.is_halo(v)) pinned[static_cast<std::size_t>(v)] = 1;
  for (int v : p.sink) pinned[static_cast<std::size_t>(v)] = 1;
  for (int v : p.source) {
    pinned[static_cast<std::size_t>(v)] = 1;
    f[v] = 1.0;
  }

  // Components with no pinned vertex stay at 0 (they contribute no energy).
  std::vector<int> comp(static_cast<std::size_t>(nv), -1);
  int ncomp = 0;
  const auto& adj = g.adjacency();
  for (int s = 0; s < nv; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    std::deque<int> q{s};
    comp[static_cast<std::size_t>(s)] = ncomp;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      for (int u : adj[static_cast<std::size_t>(v)])
        if (comp[static_cast<std::size_t>(u)] < 0) {
          comp[static_cast<std::size_t>(u)] = ncomp;
          q.push_back(u);
        }
    }
    ++ncomp;
  }
  std::vector<char> comp_pinned(static_cast<std::size_t>(ncomp), 0);
  for (int v = 0; v < nv; ++v)
    if (pinned[static_cast<std::size_t>(v)]) comp_pinned[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])] = 1;

  std::vector<int> unknown_of(static_cast<std::size_t>(nv), -1);
  std::vector<int> unknowns;
  for (int v = 0; v < nv; ++v)
    if (!pinned[static_cast<std::size_t>(v)] && comp_pinned[static_cast<std::size_t>(comp[static_cast<std::size_t>(v)])]) {
      unknown_of[static_cast<std::size_t>(v)] = static_cast<int>(unknowns.size());
      unknowns.push_back(v);
    }

  if (!unknowns.empty()) {
    using Triplet = Eigen::Triplet<double>;
    std::vector<Triplet> trips;
    Vec rhs = Vec::Zero(static_cast<Eigen::Index>(unknowns.size()));
    Vec diag = Vec::Zero(static_cast<Eigen::Index>(unknowns.size()));
    for (const auto& gen_edges : g.edges())
      for (const auto& e : gen_edges) {
        if (e.src == e.dst) continue;
        const int a = unknown_of[static_cast<std::size_t>(e.src)];
        const int b = unknown_of[static_cast<std::size_t>(e.dst)];
        if (a >= 0) diag[a] += 1.0;
        if (b >= 0) diag[b] += 1.0;
        if (a >= 0 && b >= 0) {
          trips.emplace_back(a, b, -1.0);
          trips.emplace_back(b, a, -1.0);
        } else if (a >= 0) {
          rhs[a] += f[e.dst];
        } else if (b >= 0) {
          rhs[b] += f[e.src];
        }
      }
    for (Eigen::Index i = 0; i < diag.size(); ++i)
      trips.emplace_back(static_cast<int>(i), static_cast<int>(i), diag[i]);
    Eigen::SparseMatrix<double> L(static_cast<int>(unknowns.size()), static_cast<int>(unknowns.size()));
    L.setFromTriplets(trips.begin(), trips.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(L);
    if (ldlt.info() != Eigen::Success) throw std::runtime_error("Laplacian factorization failed");
    const Vec sol = ldlt.solve(rhs);
    for (std::size_t i = 0; i < unknowns.size(); ++i) f[unknowns[i]] = sol[static_cast<Eigen::Index>(i)];
  }

  double energy = 0.0;
  for (const auto& gen_edges : g.edges())
    for (const auto& e : gen_edges) {
      const double d = f[e.dst] - f[e.src];
      energy += d * d;
    }
  return std::sqrt(energy);
}

namespace {

// Dinic max-flow with integer capacities.
class MaxFlow {
 public:
  explicit MaxFlow(int n) : head_(static_cast<std::size_t>(n), -1) {}

  void add_edge(int u, int v, long long cap_uv, long long cap_vu) {
    push(u, v, cap_uv);
    push(v, u, cap_vu);
  }

  long long run(int s, int t) {
    long long flow = 0;
    while (bfs(s, t)) {
      iter_ = head_;
      long long f;
      while ((f = dfs(s, t, std::numeric_limits<long long>::max())) > 0) flow += f;
    }
    return flow;
  }

 private:
  struct Arc {
    int to, next;
    long long cap;
  };
  std::vector<Arc> arcs_;
  std::vector<int> head_, iter_;
  std::vector<int> level_;

  void push(int u, int v, long long cap) {
    arcs_.push_back({v, head_[static_cast<std::size_t>(u)], cap});
    head_[static_cast<std::size_t>(u)] = static_cast<int>(arcs_.size()) - 1;
  }

  bool bfs(int s, int t) {
    level_.assign(head_.size(), -1);
    std::deque<int> q{s};
    level_[static_cast<std::size_t>(s)] = 0;
    while (!q.empty()) {
      const int v = q.front();
      q.pop_front();
      for (int a = head_[static_cast<std::size_t>(v)]; a != -1; a = arcs_[static_cast<std::size_t>(a)].next) {
        const auto& arc = arcs_[static_cast<std::size_t>(a)];
        if (arc.cap > 0 && level_[static_cast<std::size_t>(arc.to)] < 0) {
          level_[static_cast<std::size_t>(arc.to)] = level_[static_cast<std::size_t>(v)] + 1;
          q.push_back(arc.to);
        }
      }
    }
    return level_[static_cast<std::size_t>(t)] >= 0;
  }

  long long dfs(int v, int t, long long limit) {
    if (v == t) return limit;
    for (int& a = iter_[static_cast<std::size_t>(v)]; a != -1; a = arcs_[static_cast<std::size_t>(a)].next) {
      auto& arc = arcs_[static_cast<std::size_t>(a)];
      if (arc.cap <= 0 || level_[static_cast<std::size_t>(arc.to)] != level_[static_cast<std::size_t>(v)] + 1)
        continue;
      const long long got = dfs(arc.to, t, std::min(limit, arc.cap));
      if (got > 0) {
        arc.cap -= got;
        arcs_[static_cast<std::size_t>(a ^ 1)].cap += got;
        return got;
      }
    }
    return 0;
  }
};

}  // namespace

double oracle_mincut(const CondenserProblem& p) {
  p.validate();
  if (p.phi.kind != GaugeKind::Lp || p.phi.p != 1.0 ||
      p.combiner != GradientCombiner::SumThenNorm || !p.box)
    throw std::invalid_argument("min-cut oracle requires phi = l1, the sum combiner, and the box");
  const LabeledGraph& g = *p.graph;
  const int nv = g.vertex_count();
  const int s = nv, t = nv + 1;
  MaxFlow mf(nv + 2);
  for (const auto& gen_edges : g.edges())
    for (const auto& e : gen_edges) {
      if (e.src == e.dst) continue;
      mf.add_edge(e.src, e.dst, 1, 1);  // undirected unit edge
    }
  const long long inf = std::numeric_limits<long long>::max() / 4;
  std::vector<char> is_sink(static_cast<std::size_t>(nv), 0);
  for (int v = 0; v < nv; ++v)
    if (g.is_halo(v)) is_sink[static_cast<std::size_t>(v)] = 1;
  for (int v : p.sink) is_sink[static_cast<std::size_t>(v)] = 1;
  for (int v : p.source) {
    if (is_sink[static_cast<std::size_t>(v)]) throw std::invalid_argument("source meets sink");
    mf.add_edge(s, v, inf, 0);
  }
  for (int v = 0; v < nv; ++v)
    if (is_sink[static_cast<std::size_t>(v)]) mf.add_edge(v, t, inf, 0);
  return static_cast<double>(mf.run(s, t));
}

ProbeReport hyperbolicity_probe(const GroupSpec& group, double p, int rmax,
                                GradientCombiner combiner, const SolveOptions& opts) {
  if (!(p >= 1.0)) throw std::domain_error("probe requires p >= 1");
  if (rmax < 4) throw std::invalid_argument("probe requires rmax >= 4");
  std::vector<int> radii;
  for (int r = 1; r <= rmax; ++r) radii.push_back(r);
  ProbeReport rep;
  rep.profile = capacity_profile(group, "e", NormingFunction::lp(p), combiner, radii, opts);

  const std::size_t n = rep.profile.size();
  bool monotone = true;
  for (std::size_t i = 1; i < n; ++i)
    if (rep.profile[i].value > rep.profile[i - 1].value * (1.0 + 1e-6)) monotone = false;

  // Least-squares fit of log(value) against log(R).
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  int m = 0;
  for (const auto& pt : rep.profile) {
    if (pt.value <= 0.0) continue;
    const double lx = std::log(static_cast<double>(pt.radius));
    const double ly = std::log(pt.value);
    sx += lx; sy += ly; sxx += lx * lx; sxy += lx * ly; syy += ly * ly;
    ++m;
  }
  if (m >= 2) {
    const double denom = m * sxx - sx * sx;
    if (denom > 0) {
      rep.power_law_slope = (m * sxy - sx * sy) / denom;
      const double sst = syy - sy * sy / m;
      const double b = rep.power_law_slope;
      const double a = (sy - b * sx) / m;
      double sse = 0;
      for (const auto& pt : rep.profile) {
        if (pt.value <= 0.0) continue;
        const double e = std::log(pt.value) - (a + b * std::log(static_cast<double>(pt.radius)));
        sse += e * e;
      }
      rep.power_law_r2 = sst > 0 ? 1.0 - sse / sst : 1.0;
    }
  }
  rep.last_ratio = (n >= 2 && rep.profile[n - 2].value > 0)
                       ? rep.profile[n - 1].value / rep.profile[n - 2].value
                       : 0.0;

  const double floor = 0.05;
  if (!monotone || n < 2) {
    rep.verdict = "inconclusive";
  } else if (rep.last_ratio >= 0.99 && rep.profile[n - 1].value > floor) {
    rep.verdict = "bounded-below";
  } else if (rep.last_ratio < 0.99) {
    rep.verdict = "vanishing";
  } else {
    rep.verdict = "inconclusive";
  }
  return rep;
}

}  // namespace nlcap
