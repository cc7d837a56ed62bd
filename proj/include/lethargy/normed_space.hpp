#ifndef LETHARGY_NORMED_SPACE_HPP
#define LETHARGY_NORMED_SPACE_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lethargy/error.hpp"

namespace lethargy {

/// Elements of the ambient space R^dim.
using Point = Eigen::VectorXd;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Absolute-plus-relative comparison used across the numeric stack.
inline bool approx_equal(double a, double b, double tol = 1e-9) {
  return std::abs(a - b) <= tol * (1.0 + std::max(std::abs(a), std::abs(b)));
}

/// Tolerance set shared by solvers, root finders and verification.
///
/// `solve` overrides the per-norm solver defaults when set.
struct Tolerances {
  std::optional<double> solve;
  double root = 1e-10;
  double verify = 1e-6;
  double compare = 1e-9;
};

enum class NormKind { L1, L2, LInf, General };

/// A (weighted) p-norm on R^dim.
///
/// For finite p the norm is (sum_i w_i |x_i|^p)^(1/p). For p = inf the
/// weights act as multipliers, max_i w_i |x_i|. Internally both are
/// represented by per-coordinate scales s_i, so that ||x|| = ||S x||_p with
/// s_i = w_i^(1/p) (finite p) or s_i = w_i (p = inf).
class NormSpec {
public:
  NormSpec() = default;

  explicit NormSpec(double p, std::vector<double> weights = {})
      : p_(p), weights_(std::move(weights)) {
    if (!(p_ >= 1.0))
      throw InvalidArgument("p must be >= 1 or inf");
    for (double w : weights_)
      if (!(w > 0.0) || !std::isfinite(w))
        throw InvalidArgument("weights must be strictly positive");
  }

  static NormSpec inf(std::vector<double> weights = {}) {
    return NormSpec(kInf, std::move(weights));
  }

  double p() const { return p_; }
  bool is_inf() const { return std::isinf(p_); }
  const std::vector<double> &weights() const { return weights_; }
  bool weighted() const { return !weights_.empty(); }

  NormKind kind() const {
    if (is_inf())
      return NormKind::LInf;
    if (p_ == 1.0)
      return NormKind::L1;
    if (p_ == 2.0)
      return NormKind::L2;
    return NormKind::General;
  }

  /// Hölder conjugate exponent.
  double conjugate() const {
    if (is_inf())
      return 1.0;
    if (p_ == 1.0)
      return kInf;
    return p_ / (p_ - 1.0);
  }

  void check_dim(std::size_t dim) const {
    if (weighted() && weights_.size() != dim)
      throw DimensionMismatch(weights_.size(), dim);
  }

  Eigen::VectorXd scales(std::size_t dim) const {
    check_dim(dim);
    Eigen::VectorXd s = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(dim));
    if (!weighted())
      return s;
    for (std::size_t i = 0; i < dim; ++i)
      s(static_cast<Eigen::Index>(i)) =
          is_inf() ? weights_[i] : std::pow(weights_[i], 1.0 / p_);
    return s;
  }

  /// The norm of the dual space under the standard pairing. Its scales are
  /// the reciprocals of ours.
  NormSpec dual() const {
    const double q = conjugate();
    if (!weighted())
      return NormSpec(q);
    std::vector<double> w(weights_.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double s = is_inf() ? weights_[i] : std::pow(weights_[i], 1.0 / p_);
      w[i] = std::isinf(q) ? 1.0 / s : std::pow(s, -q);
    }
    return NormSpec(q, std::move(w));
  }

  std::string describe() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", p_);
    std::string s = is_inf() ? "p=inf" : std::string("p=") + buf;
    if (weighted())
      s += " (weighted)";
    return s;
  }

  friend bool operator==(const NormSpec &a, const NormSpec &b) {
    return a.p_ == b.p_ && a.weights_ == b.weights_;
  }

private:
  double p_ = 2.0;
  std::vector<double> weights_;
};

namespace detail {

/// Unweighted p-norm of y, computed with max-scaling so large exponents do
/// not overflow.
inline double raw_pnorm(const Eigen::VectorXd &y, double p) {
  const double m = y.cwiseAbs().maxCoeff();
  if (std::isinf(p) || m == 0.0)
    return y.size() == 0 ? 0.0 : m;
  if (p == 1.0)
    return y.cwiseAbs().sum();
  if (p == 2.0)
    return y.norm();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i)
    acc += std::pow(std::abs(y(i)) / m, p);
  return m * std::pow(acc, 1.0 / p);
}

inline double sign(double v) { return (v > 0.0) - (v < 0.0); }

} // namespace detail

inline double norm(const NormSpec &space, const Point &x) {
  const Eigen::VectorXd s = space.scales(static_cast<std::size_t>(x.size()));
  return detail::raw_pnorm(s.cwiseProduct(x), space.p());
}

/// A linear functional acting by the standard pairing, with its dual norm.
struct Functional {
  Eigen::VectorXd coeffs;
  double dual_norm = 0.0;

  double operator()(const Point &x) const {
    if (x.size() != coeffs.size())
      throw DimensionMismatch(static_cast<std::size_t>(coeffs.size()),
                              static_cast<std::size_t>(x.size()));
    return coeffs.dot(x);
  }
};

inline double dual_norm(const NormSpec &space, const Eigen::VectorXd &coeffs) {
  const Eigen::VectorXd s =
      space.scales(static_cast<std::size_t>(coeffs.size()));
  return detail::raw_pnorm(coeffs.cwiseQuotient(s), space.conjugate());
}

inline double dual_norm(const NormSpec &space, const Functional &f) {
  return dual_norm(space, f.coeffs);
}

inline Functional make_functional(const NormSpec &space,
                                  Eigen::VectorXd coeffs) {
  const double dn = dual_norm(space, coeffs);
  return Functional{std::move(coeffs), dn};
}

/// Duality map: f with f(x) = ||x|| and ||f|| = 1.
///
/// p = inf picks the lowest-index maximal coordinate; p = 1 uses the full
/// sign vector (zero on zero coordinates).
inline Functional norming_functional(const NormSpec &space, const Point &x) {
  const auto n = x.size();
  const Eigen::VectorXd s = space.scales(static_cast<std::size_t>(n));
  const Eigen::VectorXd y = s.cwiseProduct(x);
  const double ny = detail::raw_pnorm(y, space.p());
  if (!(ny > 0.0))
    throw InvalidArgument("norming functional of the zero vector");

  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  switch (space.kind()) {
  case NormKind::LInf: {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < n; ++i)
      if (std::abs(y(i)) > std::abs(y(best)))
        best = i;
    g(best) = detail::sign(y(best));
    break;
  }
  case NormKind::L1:
    for (Eigen::Index i = 0; i < n; ++i)
      g(i) = detail::sign(y(i));
    break;
  case NormKind::L2:
    g = y / ny;
    break;
  case NormKind::General: {
    const double p = space.p();
    for (Eigen::Index i = 0; i < n; ++i)
      g(i) = detail::sign(y(i)) * std::pow(std::abs(y(i)) / ny, p - 1.0);
    break;
  }
  }
  return make_functional(space, s.cwiseProduct(g));
}

} // namespace lethargy

#endif // LETHARGY_NORMED_SPACE_HPP
