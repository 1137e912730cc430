#pragma once
//
// nlcap / graph : generator-labeled graphs, Cayley-graph balls with a halo
// layer, and the discrete gradient seminorms built on them.
//

#include "nlcap/gauge.hpp"

#include <cstddef>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace nlcap {

/// Finite vertex set with one partial injective map per generator. The halo
/// is the outermost stored layer; functions on the graph are pinned to 0
/// there, which models finitely supported functions on an infinite graph.
class LabeledGraph {
 public:
  struct Edge {
    int src = -1;
    int dst = -1;
  };

  explicit LabeledGraph(int n_generators = 0);

  int generator_count() const { return n_generators_; }
  int vertex_count() const { return static_cast<int>(labels_.size()); }
  int interior_count() const { return interior_count_; }
  int halo_count() const { return vertex_count() - interior_count_; }

  int add_vertex(const std::string& label, bool halo);
  void add_edge(int gen, int src, int dst);

  int find(const std::string& label) const;  // -1 if absent
  const std::string& label(int v) const { return labels_[static_cast<std::size_t>(v)]; }
  bool is_halo(int v) const { return halo_[static_cast<std::size_t>(v)]; }

  /// edge_map[gen][v]: target of generator gen at v, or -1 when undefined.
  const std::vector<std::vector<int>>& edge_map() const { return edge_map_; }
  /// Stored edges per generator, in insertion order.
  const std::vector<std::vector<Edge>>& edges() const { return edges_; }

  /// Undirected adjacency (both edge directions), built on first use.
  const std::vector<std::vector<int>>& adjacency() const;

  bool same_structure(const LabeledGraph& other) const;

 private:
  int n_generators_ = 0;
  int interior_count_ = 0;
  std::vector<std::string> labels_;
  std::vector<bool> halo_;
  std::vector<std::vector<int>> edge_map_;  // [gen][src] -> dst
  std::vector<std::vector<int>> in_map_;    // [gen][dst] -> src, injectivity guard
  std::vector<std::vector<Edge>> edges_;
  std::unordered_map<std::string, int> index_;
  mutable std::vector<std::vector<int>> adjacency_;
};

struct GroupSpec {
  enum class Family { FreeAbelian, Free };
  Family family = Family::FreeAbelian;
  int rank = 1;
};

GroupSpec parse_group(const std::string& text);  // "z:2", "free:3"
std::string group_name(const GroupSpec& g);
std::string identity_label(const GroupSpec& g);

/// Ball of radius R+1 in the word metric: interior B_R, halo B_{R+1} \ B_R.
/// Edges realize left multiplication v -> g_j v wherever both endpoints are
/// stored. Throws std::length_error when |B_{R+1}| exceeds max_stored.
LabeledGraph cayley_ball(const GroupSpec& group, int radius, std::size_t max_stored = 200000);

/// Interior vertex count of cayley_ball(group, radius); closed form.
std::size_t ball_size(const GroupSpec& group, int radius);

LabeledGraph parse_graph(const std::string& text);
LabeledGraph load_graph(std::istream& in);
std::string serialize_graph(const LabeledGraph& g);

/// Vertex ids for a ';'-separated label list. Throws on unknown labels.
std::vector<int> resolve_labels(const LabeledGraph& g, const std::string& labels);

// A vertex function is a Vec indexed by stored vertices, zero on the halo.
void require_vertex_function(const LabeledGraph& g, const Vec& f);
Vec zero_halo(const LabeledGraph& g, Vec f);

enum class GradientCombiner { MaxThenNorm, PointwiseMaxThenNorm, EuclideanThenNorm, SumThenNorm };

GradientCombiner parse_combiner(const std::string& text);
std::string combiner_name(GradientCombiner c);

/// Differences f(g_j v) - f(v) over the stored edges of generator gen (the
/// halo contributes value 0, so edges from the halo into the interior are
/// included; they carry the boundary terms of the truncation).
Vec generator_difference(const LabeledGraph& g, const Vec& f, int gen);

/// The gradient seminorm of f for the given combiner:
///   MaxThenNorm          max_j phi(D_j f)
///   PointwiseMaxThenNorm phi(v -> max_j |D_j f(v)|)
///   EuclideanThenNorm    phi(v -> sqrt(sum_j D_j f(v)^2))
///   SumThenNorm          phi(concatenation of all D_j f)
double gradient_seminorm(const LabeledGraph& g, const Vec& f, const NormingFunction& phi,
                         GradientCombiner combiner);

}  // namespace nlcap
