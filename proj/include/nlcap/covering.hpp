#pragma once
//
// nlcap / covering : ball-covering values of grid cell sets, the discretized
// commuting multiplication model with cyclic vector, the covering projection,
// and the commutator certificate inequality.
//

#include "nlcap/gauge.hpp"

#include <string>
#include <vector>

namespace nlcap {

/// Axis-aligned grid cells of side base^(-level) inside [0,1]^dim, with a
/// positive weight per cell.
struct CellSet {
  int dim = 1;
  int level = 0;
  int base = 2;  // 2 dyadic, 3 triadic
  std::vector<std::vector<int>> cells;  // dim indices each, lexicographic
  std::vector<double> weights;

  double side() const;
  double cell_circumradius() const;
  Vec cell_center(std::size_t i) const;
  void validate() const;
};

enum class CellShape { Cube, Interval, Cantor, Carpet };

CellShape parse_shape(const std::string& text);
std::string shape_name(CellShape s);

struct ShapeSpec {
  CellShape shape = CellShape::Interval;
  int dim = 1;     // cube only; interval/cantor are 1-d, carpet is 2-d
  int level = 0;
  bool lebesgue = true;  // false: equal mass per cell
};

CellSet build_cell_set(const ShapeSpec& spec, std::size_t max_cells = 262144);

struct CoveringPart {
  std::vector<int> cell_ids;
  Vec center;
  double radius = 0.0;
};

struct CoveringPartition {
  std::vector<CoveringPart> parts;
};

/// Checks disjointness, completeness, and cell-by-cell ball containment.
void validate_partition(const CellSet& e, const CoveringPartition& c);

/// Partition into the grid blocks of the given coarser level (0 = one block
/// covering everything); centers and radii from the per-part bounding boxes.
CoveringPartition block_partition(const CellSet& e, int block_level);

/// Partition into n contiguous chunks of the cell ordering.
CoveringPartition chunk_partition(const CellSet& e, int n_parts);

enum class CoverStrategy { Dyadic, Greedy };

CoverStrategy parse_strategy(const std::string& text);

struct CoveringResult {
  double value = 0.0;
  CoveringPartition covering;
};

/// Upper bound on the covering value with all radii < eps: gauge norm of the
/// radius sequence of a verified covering. Dyadic uses the coarsest
/// admissible grid blocks; greedy repeatedly covers the most cells with one
/// admissible window.
CoveringResult covering_value(const CellSet& e, double eps, const NormingFunction& phi,
                              CoverStrategy strategy);

/// Coordinate multiplication tuple on the occupied cells: diagonal entries
/// are the cell centers, and the cyclic vector has entries sqrt(weight).
struct GridModel {
  CellSet cells;
  std::vector<Vec> coords;  // one diagonal per ambient coordinate
  Vec xi;

  int dim() const { return static_cast<int>(coords.size()); }
  int size() const { return static_cast<int>(xi.size()); }
  Mat op_matrix(int i) const;  // dense diagonal, for tests and small models
};

GridModel build_grid_model(const CellSet& e);

/// Sum of the rank-one projections onto the restrictions of the cyclic
/// vector to the parts. Satisfies P^2 = P = P^T and P xi = xi.
Mat covering_projection(const GridModel& m, const CoveringPartition& c);

struct CertificateReport {
  double lhs_ideal = 0.0;  // max_i gauge norm of [tau_i, P]
  double rhs_ideal = 0.0;  // 2 * gauge norm of the radius sequence
  double lhs_op = 0.0;     // max_i operator norm of [tau_i, P]
  double eps = 0.0;
  bool ok = false;
  std::vector<double> radii;
};

/// Verifies lhs_ideal <= rhs_ideal and lhs_op <= 2 eps. Exploits the part
/// block structure: each commutator block has paired singular values
/// (beta_j, beta_j) with beta_j <= r_j.
CertificateReport certificate_check(const GridModel& m, const CoveringPartition& c,
                                    const NormingFunction& phi, double eps);

struct ScalingRow {
  int level = 0;
  double covering_value = 0.0;
  double certificate_lhs = 0.0;
  double certificate_rhs = 0.0;
};

/// Per-level finest-covering values plus the certificate at one block level
/// coarser (where the commutators are nontrivial).
std::vector<ScalingRow> scaling_study(CellShape shape, int dim, double p,
                                      const std::vector<int>& levels, GaugeKind gauge_kind);

std::string serialize_cells(const CellSet& e);
CellSet parse_cells(const std::string& text);

}  // namespace nlcap
