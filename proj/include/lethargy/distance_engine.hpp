#ifndef LETHARGY_DISTANCE_ENGINE_HPP
#define LETHARGY_DISTANCE_ENGINE_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "lethargy/error.hpp"
#include "lethargy/normed_space.hpp"
#include "lethargy/simplex.hpp"
#include "lethargy/subspace.hpp"

namespace lethargy {

/// rho(x, Y) together with a nearest point and a dual certificate.
///
/// The certificate f vanishes on Y and has dual norm 1 (or 0 when Y is the
/// whole space), so f(x) is a certified lower bound and `gap = value - f(x)`
/// is the duality gap.
struct DistanceSolution {
  double value = 0.0;
  Point minimizer;
  Functional certificate;
  double gap = 0.0;
  int iterations = 0;
};

/// Default solver tolerance per norm kind.
inline double solve_tolerance(const NormSpec &space, const Tolerances &tol) {
  if (tol.solve)
    return *tol.solve;
  switch (space.kind()) {
  case NormKind::L2:
    return 1e-10;
  case NormKind::L1:
  case NormKind::LInf:
    return 1e-9;
  case NormKind::General:
    break;
  }
  return 1e-8;
}

namespace detail {

/// Turns raw dual coefficients into a clean certificate: remove the Euclidean
/// component along Y, rescale to dual norm 1.
inline Functional finish_certificate(const NormSpec &space, const Subspace &y,
                                     const Point &x, Eigen::VectorXd g) {
  if (!y.is_zero())
    g -= y.orthonormal() * (y.orthonormal().transpose() * g);
  double dn = dual_norm(space, g);
  if (!(dn > 1e-300)) {
    const Eigen::MatrixXd ann = y.annihilator();
    if (ann.cols() == 0)
      return Functional{Eigen::VectorXd::Zero(x.size()), 0.0};
    g = ann.col(0);
    dn = dual_norm(space, g);
  }
  g /= dn;
  if (g.dot(x) < 0.0)
    g = -g;
  return make_functional(space, std::move(g));
}

inline DistanceSolution finish(const NormSpec &space, const Subspace &y,
                               const Point &x, Point v, Eigen::VectorXd g,
                               int iters) {
  DistanceSolution out;
  out.minimizer = std::move(v);
  out.value = norm(space, x - out.minimizer);
  out.certificate = finish_certificate(space, y, x, std::move(g));
  out.gap = out.value - out.certificate(x);
  out.iterations = iters;
  return out;
}

inline DistanceSolution solve_l2(const NormSpec &space, const Subspace &y,
                                 const Point &x, const Eigen::VectorXd &s) {
  const Eigen::MatrixXd &q = y.orthonormal();
  const Eigen::MatrixXd a = s.asDiagonal() * q;
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(s.cwiseProduct(x));
  Point v = q * c;
  const Eigen::VectorXd r = x - v;
  Eigen::VectorXd g = s.cwiseProduct(s).cwiseProduct(r);
  return finish(space, y, x, std::move(v), std::move(g), 1);
}

/// Polyhedral cases as LPs in standard form.
///
/// p = 1:  min sum s_i (r+_i + r-_i)  s.t.  Q c+ - Q c- + r+ - r- = x.
/// p = inf adds  s_i (r+_i + r-_i) + sigma_i - t = 0  and minimises t.
/// The duals of the first N rows give the certificate.
inline DistanceSolution solve_lp(const NormSpec &space, const Subspace &y,
                                 const Point &x, const Eigen::VectorXd &s,
                                 double tol) {
  const Eigen::MatrixXd &q = y.orthonormal();
  const Eigen::Index n = x.size();
  const Eigen::Index k = q.cols();
  const bool inf = space.kind() == NormKind::LInf;
  const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());

  const Eigen::Index rows = inf ? 2 * n : n;
  const Eigen::Index cols = 2 * k + 2 * n + (inf ? n + 1 : 0);
  lp::Problem prob;
  prob.A = Eigen::MatrixXd::Zero(rows, cols);
  prob.b = Eigen::VectorXd::Zero(rows);
  prob.c = Eigen::VectorXd::Zero(cols);
  prob.A.block(0, 0, n, k) = q;
  prob.A.block(0, k, n, k) = -q;
  prob.A.block(0, 2 * k, n, n).setIdentity();
  prob.A.block(0, 2 * k + n, n, n) = -Eigen::MatrixXd::Identity(n, n);
  prob.b.head(n) = x / scale;
  if (inf) {
    for (Eigen::Index i = 0; i < n; ++i) {
      prob.A(n + i, 2 * k + i) = s(i);
      prob.A(n + i, 2 * k + n + i) = s(i);
      prob.A(n + i, 2 * k + 2 * n + i) = 1.0;
      prob.A(n + i, cols - 1) = -1.0;
    }
    prob.c(cols - 1) = 1.0;
  } else {
    prob.c.segment(2 * k, n) = s;
    prob.c.segment(2 * k + n, n) = s;
  }

  const lp::Solution sol = lp::solve(prob, std::min(1e-11, tol * 1e-2));
  if (sol.status != lp::Status::Optimal)
    throw SolverFailure("distance LP did not reach optimality");
  const Eigen::VectorXd c = sol.x.head(k) - sol.x.segment(k, k);
  Point v = scale * (q * c);
  Eigen::VectorXd g = sol.y.head(n);
  return finish(space, y, x, std::move(v), std::move(g), sol.iterations);
}

/// Damped Newton on phi(c) = sum |s_i (x - Qc)_i|^p for 1 < p < inf, p != 2.
/// x is expected to have norm 1. Returns the best iterate seen.
inline DistanceSolution newton_general(const NormSpec &space, const Subspace &y,
                                       const Point &x, const Eigen::VectorXd &s,
                                       double tol) {
  const double p = space.p();
  const Eigen::MatrixXd &q = y.orthonormal();

  auto phi = [&](const Eigen::VectorXd &c) {
    const Eigen::VectorXd r = s.cwiseProduct(x - q * c);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i)
      acc += std::pow(std::abs(r(i)), p);
    return acc;
  };
  auto dual_map = [&](const Eigen::VectorXd &r) {
    Eigen::VectorXd g(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i)
      g(i) = sign(r(i)) * std::pow(std::abs(r(i)), p - 1.0);
    return g;
  };

  // Weighted least squares start.
  const Eigen::MatrixXd a = s.asDiagonal() * q;
  Eigen::VectorXd c = a.colPivHouseholderQr().solve(s.cwiseProduct(x));
  double f = phi(c);
  DistanceSolution best;
  bool have = false;
  for (int iters = 0; iters < 200; ++iters) {
    const Eigen::VectorXd r = s.cwiseProduct(x - q * c);
    const Eigen::VectorXd jr = dual_map(r);
    DistanceSolution cur = finish(space, y, x, q * c, s.cwiseProduct(jr), iters);
    if (!have || cur.gap < best.gap) {
      best = cur;
      have = true;
    }
    if (best.gap <= tol * std::max(1.0, best.value) * 1e-2)
      break;

    const Eigen::VectorXd grad = -p * (a.transpose() * jr);
    if (grad.norm() < 1e-300)
      break;
    const double rmax = r.cwiseAbs().maxCoeff();
    const double floor = 1e-8 * std::max(rmax, 1e-300);
    Eigen::VectorXd wts(r.size());
    for (Eigen::Index i = 0; i < r.size(); ++i)
      wts(i) = std::pow(std::max(std::abs(r(i)), floor), p - 2.0);
    Eigen::MatrixXd h = p * (p - 1.0) * (a.transpose() * wts.asDiagonal() * a);
    h.diagonal().array() += 1e-14 * (1.0 + h.diagonal().cwiseAbs().maxCoeff());
    const Eigen::VectorXd step = -h.ldlt().solve(grad);

    double t = 1.0;
    bool moved = false;
    for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
      const Eigen::VectorXd trial = c + t * step;
      const double ft = phi(trial);
      if (ft <= f + 1e-4 * t * grad.dot(step) || (ft < f && ls > 30)) {
        c = trial;
        f = ft;
        moved = true;
        break;
      }
    }
    if (!moved)
      break;
  }
  return best;
}

/// The same problem through its dual: rho(x, Y) = 1 / min { ||g||_* : g on
/// Y^perp, g(x) = 1 }. The inner problem is a distance in the conjugate
/// exponent, which is the smooth side when p < 2. x has norm 1.
inline std::optional<DistanceSolution> dual_general(const NormSpec &space,
                                                    const Subspace &y, const Point &x,
                                                    const Eigen::VectorXd &s,
                                                    double tol) {
  const Eigen::MatrixXd ann = y.annihilator();
  const Eigen::VectorXd ax = ann.transpose() * x;
  if (!(ax.norm() > 1e-12))
    return std::nullopt;
  const Eigen::VectorXd g0 = ann * (ax / ax.squaredNorm());
  const NormSpec dual = space.dual();
  Eigen::VectorXd g = g0;
  int iters = 0;
  if (ann.cols() > 1) {
    Eigen::MatrixXd col(ax.size(), 1);
    col.col(0) = ax;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(col);
    const Eigen::MatrixXd full = qr.householderQ();
    const Subspace z(ann * full.rightCols(ax.size() - 1));
    const Eigen::VectorXd ds = dual.scales(static_cast<std::size_t>(x.size()));
    const double gn = norm(dual, g0);
    DistanceSolution inner = newton_general(dual, z, Point(g0 / gn), ds, tol);
    g = gn * (g0 / gn - inner.minimizer);
    iters = inner.iterations;
  }
  const double dn = dual_norm(space, g);
  if (!(dn > 0.0))
    return std::nullopt;
  // Residual aligned with g: u = g / s, r = sign(u) |u|^(q-1) / s.
  const double qexp = space.conjugate();
  Eigen::VectorXd r(x.size());
  for (Eigen::Index i = 0; i < r.size(); ++i) {
    const double u = g(i) / s(i);
    r(i) = sign(u) * std::pow(std::abs(u), qexp - 1.0) / s(i);
  }
  r *= (1.0 / dn) / norm(space, r);
  Point v = y.project(x - r);
  return finish(space, y, x, std::move(v), std::move(g), iters);
}

inline DistanceSolution solve_general(const NormSpec &space, const Subspace &y,
                                      const Point &x0, const Eigen::VectorXd &s,
                                      double tol) {
  const double scale = norm(space, x0);
  const Point x = x0 / scale;
  auto good = [&](const DistanceSolution &d) {
    return d.gap <= tol * std::max(1.0, d.value);
  };
  std::optional<DistanceSolution> best;
  auto keep = [&](std::optional<DistanceSolution> d) {
    if (d && (!best || d->gap < best->gap))
      best = std::move(d);
  };
  if (space.p() < 2.0) {
    keep(dual_general(space, y, x, s, tol));
    if (!best || !good(*best))
      keep(newton_general(space, y, x, s, tol));
  } else {
    keep(newton_general(space, y, x, s, tol));
    if (!good(*best))
      keep(dual_general(space, y, x, s, tol));
  }
  if (!best || !good(*best))
    throw SolverFailure("p-norm distance did not certify within tolerance");
  DistanceSolution out = std::move(*best);
  out.value *= scale;
  out.minimizer *= scale;
  out.gap *= scale;
  return out;
}

} // namespace detail

/// rho(x, Y) = min_{v in Y} ||x - v||, with a nearest point and certificate.
inline DistanceSolution distance(const NormSpec &space, const Subspace &y,
                                 const Point &x, const Tolerances &tol = {}) {
  y.check(x);
  y.require_independent();
  const auto n = static_cast<std::size_t>(x.size());
  const Eigen::VectorXd s = space.scales(n);

  if (y.is_zero() || x.isZero(0.0)) {
    DistanceSolution out;
    out.minimizer = Point::Zero(x.size());
    out.value = norm(space, x);
    if (out.value > 0.0) {
      out.certificate = detail::finish_certificate(
          space, y, x, norming_functional(space, x).coeffs);
    } else {
      out.certificate = detail::finish_certificate(
          space, y, x, Eigen::VectorXd::Zero(x.size()));
    }
    out.gap = out.value - out.certificate(x);
    return out;
  }
  if (y.dim() == n) {
    DistanceSolution out;
    out.minimizer = x;
    out.value = 0.0;
    out.certificate = Functional{Eigen::VectorXd::Zero(x.size()), 0.0};
    return out;
  }

  const double t = solve_tolerance(space, tol);
  switch (space.kind()) {
  case NormKind::L2:
    return detail::solve_l2(space, y, x, s);
  case NormKind::L1:
  case NormKind::LInf:
    return detail::solve_lp(space, y, x, s, t);
  case NormKind::General:
    break;
  }
  return detail::solve_general(space, y, x, s, t);
}

/// a -> rho(base - a * dir, Y).
inline double distance_along_line(const NormSpec &space, const Subspace &y,
                                  const Point &base, const Point &dir, double a,
                                  const Tolerances &tol = {}) {
  return distance(space, y, base - a * dir, tol).value;
}

/// Minimiser set [lo, hi] of a convex function on a half-line or window;
/// `delta` is the right endpoint.
struct LineSearchResult {
  double delta = 0.0;
  double min_value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

namespace detail {

/// Signed-bracket bisection for g(a) = target on [lo, hi].
inline double bisect_root(const std::function<double(double)> &g, double lo,
                          double hi, double target, double root_tol,
                          const std::string &what) {
  double glo = g(lo) - target;
  double ghi = g(hi) - target;
  const double vtol = 1e-14 * (1.0 + std::abs(target));
  // Endpoints that hit the target up to accumulated rounding count as roots.
  const double etol = 1e-10 * (1.0 + std::abs(target));
  if (std::abs(glo) <= etol && std::abs(glo) <= std::abs(ghi))
    return lo;
  if (std::abs(ghi) <= etol)
    return hi;
  if (glo * ghi > 0.0)
    throw BracketError(what + ": bracket does not straddle the target",
                       glo + target, ghi + target);
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (std::abs(hi - lo) <= root_tol || mid == lo || mid == hi)
      return mid;
    const double gm = g(mid) - target;
    if (std::abs(gm) <= vtol)
      return mid;
    if ((gm < 0.0) == (glo < 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
      ghi = gm;
    }
  }
  return 0.5 * (lo + hi);
}

/// Golden-section search for a minimiser of a convex h on [a, b].
inline double golden_min(const std::function<double(double)> &h, double a,
                         double b, double xtol) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a);
  double d = a + r * (b - a);
  double hc = h(c), hd = h(d);
  for (int it = 0; it < 300 && (b - a) > xtol; ++it) {
    if (hc <= hd) {
      b = d;
      d = c;
      hd = hc;
      c = b - r * (b - a);
      hc = h(c);
    } else {
      a = c;
      c = d;
      hc = hd;
      d = a + r * (b - a);
      hd = h(d);
    }
  }
  return 0.5 * (a + b);
}

/// Minimiser interval of a convex h on [lo, hi] (hi finite).
///
/// Piecewise-linear h (polyhedral norms) may be flat at its minimum; the
/// endpoints are then found by bisection on the sign of a one-sided
/// difference quotient. Strictly convex norms have a unique minimiser.
inline LineSearchResult minimize_convex(const std::function<double(double)> &h,
                                        double lo, double hi, bool polyhedral,
                                        double root_tol) {
  const double width = hi - lo;
  const double xtol = std::max(root_tol, 1e-12 * (1.0 + std::abs(hi)));
  double a = golden_min(h, lo, hi, xtol);
  double m = h(a);
  const double hlo = h(lo), hhi = h(hi);
  if (hlo <= m) {
    a = lo;
    m = hlo;
  }
  if (hhi < m) {
    a = hi;
    m = hhi;
  }
  LineSearchResult out{a, m, a, a};
  if (!polyhedral || width <= 0.0)
    return out;

  const double eta = 1e-7 * std::max(1.0, width);
  const double kappa = 1e-6 * eta * (1.0 + std::abs(m));
  // Right endpoint: largest b with h flat on [a, b].
  {
    double l = a, r = hi;
    if (h(std::min(hi, a + eta)) - h(a) > kappa) {
      r = a;
    } else {
      while (r - l > root_tol) {
        const double mid = 0.5 * (l + r);
        const double up = std::min(hi, mid + eta);
        if (h(up) - h(mid) <= kappa)
          l = mid;
        else
          r = mid;
      }
      r = std::min(hi, l + eta);
      if (h(r) > m + kappa)
        r = l;
    }
    out.hi = std::max(a, r);
  }
  {
    double l = lo, r = a;
    if (h(std::max(lo, a - eta)) - h(a) > kappa) {
      l = a;
    } else {
      while (r - l > root_tol) {
        const double mid = 0.5 * (l + r);
        const double dn = std::max(lo, mid - eta);
        if (h(dn) - h(mid) <= kappa)
          r = mid;
        else
          l = mid;
      }
      l = std::max(lo, r - eta);
      if (h(l) > m + kappa)
        l = r;
    }
    out.lo = std::min(a, l);
  }
  out.delta = out.hi;
  out.min_value = h(out.delta);
  return out;
}

} // namespace detail

/// Right endpoint of the minimiser set of a -> rho(base - a*dir, Y) over
/// [window_lo, window_hi] (default [0, inf)).
inline LineSearchResult
argmin_line_right(const NormSpec &space, const Subspace &y, const Point &base,
                  const Point &dir, double window_lo = 0.0,
                  double window_hi = kInf, const Tolerances &tol = {}) {
  const double rd = distance(space, y, dir, tol).value;
  if (!(rd > 0.0))
    throw InvalidArgument("line direction lies in the subspace");
  auto h = [&](double a) { return distance_along_line(space, y, base, dir, a, tol); };
  double lo = window_lo, hi = window_hi;
  if (std::isinf(lo) || std::isinf(hi)) {
    // h(a) >= |a| rho(dir) - rho(base) bounds the minimisers.
    const double rb = distance(space, y, base, tol).value;
    const double anchor = std::isinf(lo) ? (std::isinf(hi) ? 0.0 : hi) : lo;
    const double reach = std::abs(anchor) + (h(anchor) + rb) / rd + 1.0;
    if (std::isinf(lo))
      lo = std::min(anchor, -reach);
    if (std::isinf(hi))
      hi = std::max(anchor, reach);
  }
  if (hi < lo)
    throw InvalidArgument("empty line-search window");
  const bool poly = space.kind() == NormKind::L1 || space.kind() == NormKind::LInf;
  return detail::minimize_convex(h, lo, hi, poly, tol.root);
}

/// a* in [lo, hi] with rho(base + a* dir, Y) = target.
inline double ivt_solve(const NormSpec &space, const Subspace &y,
                        const Point &base, const Point &dir, double lo,
                        double hi, double target, const Tolerances &tol = {}) {
  auto g = [&](double a) { return distance(space, y, base + a * dir, tol).value; };
  return detail::bisect_root(g, lo, hi, target, tol.root, "ivt_solve");
}

} // namespace lethargy

#endif // LETHARGY_DISTANCE_ENGINE_HPP
