#include "nlcap/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <sstream>
#include <stdexcept>

namespace nlcap {

LabeledGraph::LabeledGraph(int n_generators) : n_generators_(n_generators) {
  if (n_generators < 0) throw std::invalid_argument("generator count must be >= 0");
  edge_map_.resize(static_cast<std::size_t>(n_generators));
  in_map_.resize(static_cast<std::size_t>(n_generators));
  edges_.resize(static_cast<std::size_t>(n_generators));
}

int LabeledGraph::add_vertex(const std::string& label, bool halo) {
  if (label.empty()) throw std::invalid_argument("empty vertex label");
  if (index_.count(label)) throw std::invalid_argument("duplicate vertex label '" + label + "'");
  const int id = vertex_count();
  labels_.push_back(label);
  halo_.push_back(halo);
  if (!halo) ++interior_count_;
  index_.emplace(label, id);
  for (auto& m : edge_map_) m.push_back(-1);
  for (auto& m : in_map_) m.push_back(-1);
  adjacency_.clear();
  return id;
}

void LabeledGraph::add_edge(int gen, int src, int dst) {
  if (gen < 0 || gen >= n_generators_) throw std::invalid_argument("generator index out of range");
  if (src < 0 || src >= vertex_count() || dst < 0 || dst >= vertex_count())
    throw std::invalid_argument("edge endpoint out of range");
  auto& out = edge_map_[static_cast<std::size_t>(gen)];
  auto& in = in_map_[static_cast<std::size_t>(gen)];
  if (out[static_cast<std::size_t>(src)] != -1)
    throw std::invalid_argument("generator " + std::to_string(gen + 1) + ": source '" +
                                label(src) + "' already has an edge");
  if (in[static_cast<std::size_t>(dst)] != -1)
    throw std::invalid_argument("generator " + std::to_string(gen + 1) + ": target '" +
                                label(dst) + "' already has an edge (injectivity)");
  out[static_cast<std::size_t>(src)] = dst;
  in[static_cast<std::size_t>(dst)] = src;
  edges_[static_cast<std::size_t>(gen)].push_back({src, dst});
  adjacency_.clear();
}

int LabeledGraph::find(const std::string& label) const {
  auto it = index_.find(label);
  return it == index_.end() ? -1 : it->second;
}

const std::vector<std::vector<int>>& LabeledGraph::adjacency() const {
  if (adjacency_.empty() && vertex_count() > 0) {
    adjacency_.resize(static_cast<std::size_t>(vertex_count()));
    for (const auto& gen_edges : edges_)
      for (const auto& e : gen_edges) {
        adjacency_[static_cast<std::size_t>(e.src)].push_back(e.dst);
        if (e.dst != e.src) adjacency_[static_cast<std::size_t>(e.dst)].push_back(e.src);
      }
  }
  return adjacency_;
}

bool LabeledGraph::same_structure(const LabeledGraph& other) const {
  return n_generators_ == other.n_generators_ && labels_ == other.labels_ &&
         halo_ == other.halo_ && edge_map_ == other.edge_map_;
}

GroupSpec parse_group(const std::string& text) {
  const auto colon = text.find(':');
  const std::string head = text.substr(0, colon);
  int rank = 1;
  if (colon != std::string::npos) {
    try {
      rank = std::stoi(text.substr(colon + 1));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad group spec '" + text + "'");
    }
  }
  GroupSpec g;
  if (head == "z" || head == "Z" || head == "zd") {
    g.family = GroupSpec::Family::FreeAbelian;
  } else if (head == "free" || head == "f") {
    g.family = GroupSpec::Family::Free;
  } else {
    throw std::invalid_argument("unknown group family '" + head + "' (use z:<d> or free:<k>)");
  }
  if (rank < 1) throw std::invalid_argument("group rank must be >= 1");
  if (g.family == GroupSpec::Family::Free && rank > 26)
    throw std::invalid_argument("free group rank capped at 26");
  g.rank = rank;
  return g;
}

std::string group_name(const GroupSpec& g) {
  return (g.family == GroupSpec::Family::FreeAbelian ? "z:" : "free:") + std::to_string(g.rank);
}

std::string identity_label(const GroupSpec& g) {
  if (g.family == GroupSpec::Family::Free) return "e";
  std::string s = "0";
  for (int i = 1; i < g.rank; ++i) s += ",0";
  return s;
}

namespace {

std::string abelian_label(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(v[i]);
  }
  return s;
}

char free_letter(int gen, bool inverse) {
  return static_cast<char>((inverse ? 'A' : 'a') + gen);
}

// Left multiplication by a letter on a reduced word; "e" is the identity.
std::string free_left_mul(char c, const std::string& w) {
  const char inv = std::isupper(c) ? static_cast<char>(std::tolower(c))
                                   : static_cast<char>(std::toupper(c));
  if (w == "e") return std::string(1, c);
  if (!w.empty() && w[0] == inv) {
    std::string r = w.substr(1);
    return r.empty() ? "e" : r;
  }
  return c + w;
}

}  // namespace

std::size_t ball_size(const GroupSpec& group, int radius) {
  if (radius < 0) return 0;
  const auto r = static_cast<std::size_t>(radius);
  if (group.family == GroupSpec::Family::FreeAbelian) {
    // sum_k 2^k C(d,k) C(R,k), the l1-ball count in Z^d.
    const int d = group.rank;
    long double total = 0.0L;
    for (int k = 0; k <= std::min(d, radius); ++k) {
      long double term = std::pow(2.0L, k);
      for (int i = 0; i < k; ++i) term *= static_cast<long double>(d - i) / (i + 1);
      for (int i = 0; i < k; ++i) term *= static_cast<long double>(radius - i) / (i + 1);
      total += term;
    }
    if (total > 1e18L) return static_cast<std::size_t>(-1);
    return static_cast<std::size_t>(std::llround(static_cast<double>(total)));
  }
  const int k = group.rank;
  if (k == 1) return 2 * r + 1;
  // 1 + 2k ((2k-1)^R - 1) / (2k-2)
  long double size = 1.0L, sphere = 2.0L * k;
  for (std::size_t i = 1; i <= r; ++i) {
    size += sphere;
    sphere *= (2.0L * k - 1.0L);
    if (size > 1e18L) return static_cast<std::size_t>(-1);
  }
  return static_cast<std::size_t>(std::llround(static_cast<double>(size)));
}

LabeledGraph cayley_ball(const GroupSpec& group, int radius, std::size_t max_stored) {
  if (radius < 0) throw std::invalid_argument("radius must be >= 0");
  const std::size_t predicted = ball_size(group, radius + 1);
  if (predicted > max_stored)
    throw std::length_error("ball of radius " + std::to_string(radius + 1) + " has " +
                            std::to_string(predicted) + " vertices, above the cap of " +
                            std::to_string(max_stored));

  LabeledGraph g(group.rank);

  if (group.family == GroupSpec::Family::FreeAbelian) {
    const int d = group.rank;
    std::vector<std::vector<int>> elems;
    std::unordered_map<std::string, int> seen;
    std::deque<std::pair<int, int>> queue;  // (vertex id, distance)

    std::vector<int> origin(static_cast<std::size_t>(d), 0);
    elems.push_back(origin);
    seen.emplace(abelian_label(origin), 0);
    g.add_vertex(abelian_label(origin), false);
    queue.emplace_back(0, 0);
    while (!queue.empty()) {
      auto [id, dist] = queue.front();
      queue.pop_front();
      if (dist == radius + 1) continue;
      for (int j = 0; j < d; ++j) {
        for (int s : {+1, -1}) {
          std::vector<int> nb = elems[static_cast<std::size_t>(id)];
          nb[static_cast<std::size_t>(j)] += s;
          const std::string lab = abelian_label(nb);
          if (seen.count(lab)) continue;
          const int nid = g.add_vertex(lab, dist + 1 == radius + 1);
          seen.emplace(lab, nid);
          elems.push_back(std::move(nb));
          queue.emplace_back(nid, dist + 1);
        }
      }
    }
    for (int j = 0; j < d; ++j)
      for (int v = 0; v < g.vertex_count(); ++v) {
        std::vector<int> t = elems[static_cast<std::size_t>(v)];
        t[static_cast<std::size_t>(j)] += 1;
        const auto it = seen.find(abelian_label(t));
        if (it != seen.end()) g.add_edge(j, v, it->second);
      }
    return g;
  }

  const int k = group.rank;
  std::vector<std::string> words;
  std::unordered_map<std::string, int> seen;
  std::deque<std::pair<int, int>> queue;
  words.emplace_back("e");
  seen.emplace("e", 0);
  g.add_vertex("e", false);
  queue.emplace_back(0, 0);
  while (!queue.empty()) {
    auto [id, dist] = queue.front();
    queue.pop_front();
    if (dist == radius + 1) continue;
    for (int j = 0; j < k; ++j) {
      for (bool inverse : {false, true}) {
        const std::string nb = free_left_mul(free_letter(j, inverse), words[static_cast<std::size_t>(id)]);
        if (seen.count(nb)) continue;
        const int nid = g.add_vertex(nb, dist + 1 == radius + 1);
        seen.emplace(nb, nid);
        words.push_back(nb);
        queue.emplace_back(nid, dist + 1);
      }
    }
  }
  for (int j = 0; j < k; ++j)
    for (int v = 0; v < g.vertex_count(); ++v) {
      const std::string t = free_left_mul(free_letter(j, false), words[static_cast<std::size_t>(v)]);
      const auto it = seen.find(t);
      if (it != seen.end()) g.add_edge(j, v, it->second);
    }
  return g;
}

namespace {

[[noreturn]] void parse_fail(int line, const std::string& msg) {
  throw std::invalid_argument("line " + std::to_string(line) + ": " + msg);
}

}  // namespace

LabeledGraph load_graph(std::istream& in) {
  std::string line;
  int lineno = 0;
  bool have_header = false;
  LabeledGraph g;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok) || tok[0] == '#') continue;
    if (!have_header) {
      if (tok != "graph") parse_fail(lineno, "expected 'graph <n_generators>' header");
      int n = -1;
      if (!(ss >> n) || n < 0) parse_fail(lineno, "bad generator count");
      g = LabeledGraph(n);
      have_header = true;
      continue;
    }
    if (tok == "v") {
      std::string id, kind;
      if (!(ss >> id >> kind)) parse_fail(lineno, "expected 'v <id> interior|halo'");
      if (kind != "interior" && kind != "halo") parse_fail(lineno, "vertex kind must be interior or halo");
      try {
        g.add_vertex(id, kind == "halo");
      } catch (const std::exception& e) {
        parse_fail(lineno, e.what());
      }
    } else if (tok == "e") {
      int gen = 0;
      std::string src, dst;
      if (!(ss >> gen >> src >> dst)) parse_fail(lineno, "expected 'e <generator> <src> <dst>'");
      if (gen < 1 || gen > g.generator_count()) parse_fail(lineno, "generator index out of range");
      const int s = g.find(src), d = g.find(dst);
      if (s < 0) parse_fail(lineno, "unknown vertex '" + src + "'");
      if (d < 0) parse_fail(lineno, "unknown vertex '" + dst + "'");
      try {
        g.add_edge(gen - 1, s, d);
      } catch (const std::exception& e) {
        parse_fail(lineno, e.what());
      }
    } else {
      parse_fail(lineno, "unknown record '" + tok + "'");
    }
  }
  if (!have_header) throw std::invalid_argument("empty graph file");
  return g;
}

LabeledGraph parse_graph(const std::string& text) {
  std::istringstream ss(text);
  return load_graph(ss);
}

std::string serialize_graph(const LabeledGraph& g) {
  std::ostringstream os;
  os << "graph " << g.generator_count() << "\n";
  for (int v = 0; v < g.vertex_count(); ++v)
    os << "v " << g.label(v) << ' ' << (g.is_halo(v) ? "halo" : "interior") << "\n";
  for (int j = 0; j < g.generator_count(); ++j)
    for (int v = 0; v < g.vertex_count(); ++v) {
      const int t = g.edge_map()[static_cast<std::size_t>(j)][static_cast<std::size_t>(v)];
      if (t != -1) os << "e " << (j + 1) << ' ' << g.label(v) << ' ' << g.label(t) << "\n";
    }
  return os.str();
}

std::vector<int> resolve_labels(const LabeledGraph& g, const std::string& labels) {
  std::vector<int> out;
  std::string cur;
  std::istringstream ss(labels);
  while (std::getline(ss, cur, ';')) {
    if (cur.empty()) continue;
    const int id = g.find(cur);
    if (id < 0) throw std::invalid_argument("unknown vertex label '" + cur + "'");
    if (std::find(out.begin(), out.end(), id) == out.end()) out.push_back(id);
  }
  return out;
}

void require_vertex_function(const LabeledGraph& g, const Vec& f) {
  if (f.size() != g.vertex_count())
    throw std::invalid_argument("vertex function has wrong length");
  if (!f.allFinite()) throw std::invalid_argument("vertex function has non-finite values");
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.is_halo(v) && std::abs(f[v]) > 1e-12)
      throw std::invalid_argument("vertex function nonzero on halo vertex '" + g.label(v) + "'");
}

Vec zero_halo(const LabeledGraph& g, Vec f) {
  for (int v = 0; v < g.vertex_count(); ++v)
    if (g.is_halo(v)) f[v] = 0.0;
  return f;
}

GradientCombiner parse_combiner(const std::string& text) {
  if (text == "max") return GradientCombiner::MaxThenNorm;
  if (text == "pointwise-max" || text == "pmax") return GradientCombiner::PointwiseMaxThenNorm;
  if (text == "euclidean" || text == "euclid") return GradientCombiner::EuclideanThenNorm;
  if (text == "sum") return GradientCombiner::SumThenNorm;
  throw std::invalid_argument("unknown combiner '" + text +
                              "' (max, pointwise-max, euclidean, sum)");
}

std::string combiner_name(GradientCombiner c) {
  switch (c) {
    case GradientCombiner::MaxThenNorm: return "max";
    case GradientCombiner::PointwiseMaxThenNorm: return "pointwise-max";
    case GradientCombiner::EuclideanThenNorm: return "euclidean";
    case GradientCombiner::SumThenNorm: return "sum";
  }
  return "?";
}

Vec generator_difference(const LabeledGraph& g, const Vec& f, int gen) {
  if (gen < 0 || gen >= g.generator_count())
    throw std::invalid_argument("generator index out of range");
  require_vertex_function(g, f);
  const auto& es = g.edges()[static_cast<std::size_t>(gen)];
  Vec d(static_cast<Eigen::Index>(es.size()));
  for (std::size_t i = 0; i < es.size(); ++i)
    d[static_cast<Eigen::Index>(i)] = f[es[i].dst] - f[es[i].src];
  return d;
}

double gradient_seminorm(const LabeledGraph& g, const Vec& f, const NormingFunction& phi,
                         GradientCombiner combiner) {
  require_vertex_function(g, f);
  const int n = g.generator_count();
  const int nv = g.vertex_count();
  switch (combiner) {
    case GradientCombiner::MaxThenNorm: {
      double best = 0.0;
      for (int j = 0; j < n; ++j) best = std::max(best, evaluate_norm(phi, generator_difference(g, f, j)));
      return best;
    }
    case GradientCombiner::PointwiseMaxThenNorm:
    case GradientCombiner::EuclideanThenNorm: {
      Vec per_vertex = Vec::Zero(nv);
      for (int j = 0; j < n; ++j) {
        const auto& es = g.edges()[static_cast<std::size_t>(j)];
        for (const auto& e : es) {
          const double d = f[e.dst] - f[e.src];
          if (combiner == GradientCombiner::PointwiseMaxThenNorm)
            per_vertex[e.src] = std::max(per_vertex[e.src], std::abs(d));
          else
            per_vertex[e.src] += d * d;
        }
      }
      if (combiner == GradientCombiner::EuclideanThenNorm)
        per_vertex = per_vertex.cwiseSqrt();
      return evaluate_norm(phi, per_vertex);
    }
    case GradientCombiner::SumThenNorm: {
      std::size_t total = 0;
      for (int j = 0; j < n; ++j) total += g.edges()[static_cast<std::size_t>(j)].size();
      Vec cat(static_cast<Eigen::Index>(total));
      Eigen::Index pos = 0;
      for (int j = 0; j < n; ++j)
        for (const auto& e : g.edges()[static_cast<std::size_t>(j)]) cat[pos++] = f[e.dst] - f[e.src];
      return evaluate_norm(phi, cat);
    }
  }
  throw std::logic_error("unreachable");
}

}  // namespace nlcap
