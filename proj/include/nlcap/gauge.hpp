#pragma once
//
// nlcap / gauge : symmetric gauge functions (norming functions) on sequences
// and on matrices via singular values, with subgradients.
//

#include <Eigen/Core>

#include <string>
#include <vector>

namespace nlcap {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

enum class GaugeKind { Lp, LorentzP1, Weights };

/// A permutation- and sign-invariant norm on finite real sequences.
/// Lp(p) is the plain p-norm; LorentzP1(p) pairs the decreasing rearrangement
/// with the weights j^(-1+1/p); Weights(pi) uses an explicit nonincreasing
/// weight sequence with pi[0] == 1 (arguments longer than pi reuse the last
/// weight).
struct NormingFunction {
  GaugeKind kind = GaugeKind::Lp;
  double p = 1.0;
  std::vector<double> pi;

  static NormingFunction lp(double p);
  static NormingFunction lorentz_p1(double p);
  static NormingFunction weights(std::vector<double> pi);

  // Weight paired with the (rank+1)-th largest magnitude. Valid for the
  // weight-style kinds and for Lp(1); Lp(p>1) has no fixed weight sequence.
  double weight_at(Eigen::Index rank) const;

  std::string spec_string() const;
};

/// The sequence (j^(-1+1/p))_{j=1..n}. Throws std::domain_error for p < 1.
std::vector<double> make_lorentz_weights(double p, int n);

/// Gauge value of x (applied to the decreasing rearrangement of |x|).
double evaluate_norm(const NormingFunction& phi, const Vec& x);

/// Gauge value of the singular values of m.
double evaluate_singular_norm(const NormingFunction& phi, const Mat& m);

/// Singular values of m, nonincreasing.
Vec singular_values(const Mat& m);

/// A subgradient g of phi at x: phi(y) >= phi(x) + <g, y-x> for all y and
/// <g, x> = phi(x). Ranks of tied magnitudes are assigned in index order.
Vec subgradient_vector(const NormingFunction& phi, const Vec& x);

/// Matrix subgradient via the singular value decomposition chain rule:
/// G = U diag(w) V^T with w = subgradient_vector(phi, sigma).
Mat subgradient_singular(const NormingFunction& phi, const Mat& m);

}  // namespace nlcap
