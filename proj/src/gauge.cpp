#include "nlcap/gauge.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace nlcap {

namespace {

void require_finite(const Vec& x, const char* what) {
  if (!x.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

void require_finite(const Mat& m, const char* what) {
  if (!m.allFinite()) throw std::invalid_argument(std::string(what) + ": non-finite entries");
}

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// Indices of x sorted by |x| nonincreasing, ties kept in index order.
std::vector<Eigen::Index> decreasing_order(const Vec& x) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(x.size()));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return std::abs(x[a]) > std::abs(x[b]);
  });
  return idx;
}

double lp_norm(const Vec& x, double p) {
  if (x.size() == 0) return 0.0;
  if (p == 1.0) return x.cwiseAbs().sum();
  if (p == 2.0) return x.norm();
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]), p);
  return std::pow(s, 1.0 / p);
}

}  // namespace

NormingFunction NormingFunction::lp(double p) {
  if (!(p >= 1.0)) throw std::domain_error("Lp gauge requires p >= 1");
  NormingFunction f;
  f.kind = GaugeKind::Lp;
  f.p = p;
  return f;
}

NormingFunction NormingFunction::lorentz_p1(double p) {
  if (!(p >= 1.0)) throw std::domain_error("Lorentz (p,1) gauge requires p >= 1");
  NormingFunction f;
  f.kind = GaugeKind::LorentzP1;
  f.p = p;
  return f;
}

NormingFunction NormingFunction::weights(std::vector<double> pi) {
  if (pi.empty()) throw std::invalid_argument("weight gauge: empty weight sequence");
  if (std::abs(pi.front() - 1.0) > 1e-12)
    throw std::invalid_argument("weight gauge: first weight must be 1");
  for (std::size_t j = 0; j < pi.size(); ++j) {
    if (!(pi[j] > 0.0) || !std::isfinite(pi[j]))
      throw std::invalid_argument("weight gauge: weights must be positive and finite");
    if (j > 0 && pi[j] > pi[j - 1] + 1e-15)
      throw std::invalid_argument("weight gauge: weights must be nonincreasing");
  }
  NormingFunction f;
  f.kind = GaugeKind::Weights;
  f.pi = std::move(pi);
  return f;
}

double NormingFunction::weight_at(Eigen::Index rank) const {
  switch (kind) {
    case GaugeKind::Lp:
      if (p == 1.0) return 1.0;
      throw std::logic_error("Lp(p>1) gauge has no weight sequence");
    case GaugeKind::LorentzP1:
      return std::pow(static_cast<double>(rank + 1), -1.0 + 1.0 / p);
    case GaugeKind::Weights: {
      const std::size_t r = static_cast<std::size_t>(rank);
      return pi[std::min(r, pi.size() - 1)];
    }
  }
  throw std::logic_error("unreachable");
}

std::string NormingFunction::spec_string() const {
  std::ostringstream os;
  switch (kind) {
    case GaugeKind::Lp:
      if (p == 1.0) return "l1";
      if (p == 2.0) return "l2";
      os << "lp:" << p;
      return os.str();
    case GaugeKind::LorentzP1:
      os << "lorentz:" << p;
      return os.str();
    case GaugeKind::Weights:
      os << "weights[" << pi.size() << "]";
      return os.str();
  }
  return "?";
}

std::vector<double> make_lorentz_weights(double p, int n) {
  if (!(p >= 1.0)) throw std::domain_error("Lorentz weights require p >= 1");
  if (n < 1) throw std::invalid_argument("Lorentz weights require n >= 1");
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) w[static_cast<std::size_t>(j)] = std::pow(j + 1.0, -1.0 + 1.0 / p);
  return w;
}

double evaluate_norm(const NormingFunction& phi, const Vec& x) {
  if (x.size() == 0) return 0.0;
  require_finite(x, "evaluate_norm");
  if (phi.kind == GaugeKind::Lp) return lp_norm(x, phi.p);
  std::vector<double> mags(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) mags[static_cast<std::size_t>(i)] = std::abs(x[i]);
  std::sort(mags.begin(), mags.end(), std::greater<double>());
  double s = 0.0;
  for (std::size_t r = 0; r < mags.size(); ++r)
    s += phi.weight_at(static_cast<Eigen::Index>(r)) * mags[r];
  return s;
}

Vec singular_values(const Mat& m) {
  require_finite(m, "singular_values");
  if (m.size() == 0) return Vec{};
  Eigen::BDCSVD<Mat> svd(m);
  return svd.singularValues();
}

double evaluate_singular_norm(const NormingFunction& phi, const Mat& m) {
  if (m.size() == 0) return 0.0;
  return evaluate_norm(phi, singular_values(m));
}

Vec subgradient_vector(const NormingFunction& phi, const Vec& x) {
  Vec g = Vec::Zero(x.size());
  if (x.size() == 0) return g;
  require_finite(x, "subgradient_vector");
  if (phi.kind == GaugeKind::Lp && phi.p > 1.0) {
    const double nrm = lp_norm(x, phi.p);
    if (nrm <= 0.0) return g;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      g[i] = sgn(x[i]) * std::pow(std::abs(x[i]) / nrm, phi.p - 1.0);
    return g;
  }
  const auto order = decreasing_order(x);
  for (std::size_t r = 0; r < order.size(); ++r)
    g[order[r]] = sgn(x[order[r]]) * phi.weight_at(static_cast<Eigen::Index>(r));
  return g;
}

Mat subgradient_singular(const NormingFunction& phi, const Mat& m) {
  require_finite(m, "subgradient_singular");
  if (m.size() == 0) return Mat::Zero(m.rows(), m.cols());
  Eigen::BDCSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Vec s = svd.singularValues();
  // Numerical-rank cutoff: values below 1e-12 of the largest rank as zero.
  if (s.size() > 0) {
    const double cut = 1e-12 * s[0];
    for (Eigen::Index i = 0; i < s.size(); ++i)
      if (s[i] < cut) s[i] = 0.0;
  }
  const Vec w = subgradient_vector(phi, s);
  return svd.matrixU() * w.asDiagonal() * svd.matrixV().transpose();
}

}  // namespace nlcap
