#ifndef LETHARGY_SUBSPACE_HPP
#define LETHARGY_SUBSPACE_HPP

#include <cstddef>
#include <utility>

#include <Eigen/Dense>

#include "lethargy/error.hpp"
#include "lethargy/normed_space.hpp"

namespace lethargy {

/// A linear subspace of R^dim given by an explicit basis (columns).
///
/// The Euclidean orthonormal copy is a representation detail: it spans the
/// same set and its leading j columns span the leading j basis columns.
class Subspace {
public:
  Subspace() = default;

  explicit Subspace(Eigen::MatrixXd basis, double independence_tol = 1e-10)
      : basis_(std::move(basis)) {
    const auto k = basis_.cols();
    if (k == 0) {
      orthonormal_ = Eigen::MatrixXd(basis_.rows(), 0);
      return;
    }
    if (!basis_.allFinite())
      throw InvalidArgument("subspace basis has non-finite entries");
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(basis_);
    const auto &sv = svd.singularValues();
    smallest_sv_ = sv(sv.size() - 1);
    largest_sv_ = sv(0);
    independent_ = k <= basis_.rows() && largest_sv_ > 0.0 &&
                   smallest_sv_ > independence_tol * largest_sv_;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis_);
    orthonormal_ = qr.householderQ() *
                   Eigen::MatrixXd::Identity(basis_.rows(), std::min(k, basis_.rows()));
  }

  static Subspace zero(std::size_t ambient) {
    return Subspace(Eigen::MatrixXd(static_cast<Eigen::Index>(ambient), 0));
  }

  static Subspace whole(std::size_t ambient) {
    const auto n = static_cast<Eigen::Index>(ambient);
    return Subspace(Eigen::MatrixXd::Identity(n, n));
  }

  std::size_t ambient_dim() const {
    return static_cast<std::size_t>(basis_.rows());
  }
  std::size_t dim() const { return static_cast<std::size_t>(basis_.cols()); }
  bool is_zero() const { return basis_.cols() == 0; }
  bool independent() const { return independent_; }
  double condition_number() const {
    return basis_.cols() == 0 ? 1.0 : largest_sv_ / smallest_sv_;
  }

  const Eigen::MatrixXd &basis() const { return basis_; }
  const Eigen::MatrixXd &orthonormal() const { return orthonormal_; }

  /// Euclidean orthogonal projection onto the span.
  Point project(const Point &x) const {
    check(x);
    if (is_zero())
      return Point::Zero(x.size());
    return orthonormal_ * (orthonormal_.transpose() * x);
  }

  /// Euclidean distance to the span (norm independent; used for membership).
  double residual(const Point &x) const { return (x - project(x)).norm(); }

  bool contains(const Point &x, double tol = 1e-10) const {
    return residual(x) <= tol * (1.0 + x.norm());
  }

  /// Orthonormal basis of the Euclidean orthogonal complement; its columns
  /// are the coefficient vectors of functionals vanishing on the span.
  Eigen::MatrixXd annihilator() const {
    const auto n = basis_.rows();
    const auto k = basis_.cols();
    if (k == 0)
      return Eigen::MatrixXd::Identity(n, n);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis_);
    const Eigen::MatrixXd full = qr.householderQ();
    return full.rightCols(n - k);
  }

  void check(const Point &x) const {
    if (x.size() != basis_.rows())
      throw DimensionMismatch(ambient_dim(), static_cast<std::size_t>(x.size()));
  }

  void require_independent() const {
    if (!independent_)
      throw InvalidArgument("subspace basis columns are linearly dependent");
  }

private:
  Eigen::MatrixXd basis_;
  Eigen::MatrixXd orthonormal_;
  double smallest_sv_ = 0.0;
  double largest_sv_ = 0.0;
  bool independent_ = true;
};

/// span(Y) + span(extra columns).
inline Subspace extend(const Subspace &y, const Eigen::MatrixXd &extra) {
  Eigen::MatrixXd b(y.basis().rows(), y.basis().cols() + extra.cols());
  b << y.basis(), extra;
  return Subspace(std::move(b));
}

} // namespace lethargy

#endif // LETHARGY_SUBSPACE_HPP
