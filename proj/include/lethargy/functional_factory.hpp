#ifndef LETHARGY_FUNCTIONAL_FACTORY_HPP
#define LETHARGY_FUNCTIONAL_FACTORY_HPP

#include <optional>

#include <Eigen/Dense>

#include "lethargy/distance_engine.hpp"
#include "lethargy/error.hpp"
#include "lethargy/normed_space.hpp"
#include "lethargy/subspace.hpp"

namespace lethargy {

/// f vanishing on Y with ||f|| = 1 and f(x) = rho(x, Y).
inline Functional annihilator_certificate(const NormSpec &space,
                                          const Subspace &y, const Point &x,
                                          const Tolerances &tol = {}) {
  const DistanceSolution d = distance(space, y, x, tol);
  if (!(d.value > solve_tolerance(space, tol) * (1.0 + norm(space, x))))
    throw InvalidArgument("point lies in the subspace");
  return d.certificate;
}

struct TwoPointResult {
  Functional f;
  double delta = 0.0;
  double target_value = 0.0; ///< prescribed f(x2)
  double rho_x1 = 0.0;      ///< rho(x1, Q)
  double rho_at_delta = 0.0;
  double norm_bound = 0.0;  ///< 1 / rho(x1, Q)
  double achieved_dual_norm = 0.0;
  bool feasible_at_norm = false;
  bool mirrored = false;
  LineSearchResult search;
};

/// Minimum dual norm functional with f = 0 on Q, f(x1) = 1, f(x2) = target.
///
/// Constraints A f = b are solved by f = f0 + N a with f0 the minimum
/// Euclidean norm solution and N an orthonormal null-space basis; minimising
/// ||f0 + N a||_* is a distance problem in the dual space.
inline Functional min_norm_extension(const NormSpec &space, const Subspace &q,
                                     const Point &x1, const Point &x2,
                                     double target, const Tolerances &tol = {}) {
  const Eigen::Index n = x1.size();
  const Eigen::Index k = static_cast<Eigen::Index>(q.dim());
  Eigen::MatrixXd a(k + 2, n);
  if (k > 0)
    a.topRows(k) = q.orthonormal().transpose();
  a.row(k) = x1.transpose();
  a.row(k + 1) = x2.transpose();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(k + 2);
  b(k) = 1.0;
  b(k + 1) = target;

  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
  const Eigen::VectorXd f0 = cod.solve(b);
  if ((a * f0 - b).norm() > 1e-8 * (1.0 + b.norm()))
    throw InvalidArgument("two-point constraints are inconsistent");

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const Eigen::Index rank = svd.rank();
  const Eigen::MatrixXd null = svd.matrixV().rightCols(n - rank);
  if (null.cols() == 0)
    return make_functional(space, f0);
  const Subspace ns(null);
  const DistanceSolution d = distance(space.dual(), ns, f0, tol);
  return make_functional(space, f0 - d.minimizer);
}

/// Two-point Hahn-Banach construction.
///
/// delta is the right end of the minimisers of a -> rho(x2 - a x1, Q) on
/// a >= 0 unless supplied. The functional is asked to satisfy f = 0 on Q,
/// f(x1) = 1 and f(x2) = delta - rho(x2 - delta x1, Q) / rho(x1, Q) while
/// keeping ||f|| = 1 / rho(x1, Q). The norm is not forced: the minimum
/// achievable dual norm is returned with a feasibility flag. `mirrored`
/// replaces x1 by -x1 in the search and flips the sign of the target.
inline TwoPointResult two_point_hahn_banach(const NormSpec &space,
                                            const Subspace &q, const Point &x1,
                                            const Point &x2,
                                            std::optional<double> delta = std::nullopt,
                                            bool mirrored = false,
                                            const Tolerances &tol = {}) {
  q.check(x1);
  q.check(x2);
  if (q.contains(x1, 1e-10))
    throw InvalidArgument("two-point: x1 lies in Q");
  Eigen::MatrixXd ext(x1.size(), 1);
  ext.col(0) = x1;
  if (extend(q, ext).contains(x2, 1e-10))
    throw InvalidArgument("two-point: x2 lies in span(Q, x1)");

  TwoPointResult out;
  out.mirrored = mirrored;
  const Point dir = mirrored ? Point(-x1) : x1;
  out.rho_x1 = distance(space, q, x1, tol).value;
  out.norm_bound = 1.0 / out.rho_x1;
  if (delta) {
    out.delta = *delta;
    out.search = LineSearchResult{*delta, 0.0, *delta, *delta};
  } else {
    out.search = argmin_line_right(space, q, x2, dir, 0.0, kInf, tol);
    out.delta = out.search.delta;
  }
  out.rho_at_delta = distance(space, q, x2 - out.delta * dir, tol).value;
  if (!delta)
    out.search.min_value = out.rho_at_delta;
  const double t = out.delta - out.rho_at_delta / out.rho_x1;
  out.target_value = mirrored ? -t : t;
  out.f = min_norm_extension(space, q, x1, x2, out.target_value, tol);
  out.achieved_dual_norm = out.f.dual_norm;
  out.feasible_at_norm = out.achieved_dual_norm <= out.norm_bound * (1.0 + tol.verify);
  return out;
}

} // namespace lethargy

#endif // LETHARGY_FUNCTIONAL_FACTORY_HPP
