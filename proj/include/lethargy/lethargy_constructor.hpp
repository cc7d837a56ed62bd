#ifndef LETHARGY_LETHARGY_CONSTRUCTOR_HPP
#define LETHARGY_LETHARGY_CONSTRUCTOR_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lethargy/distance_engine.hpp"
#include "lethargy/error.hpp"
#include "lethargy/functional_factory.hpp"
#include "lethargy/normed_space.hpp"
#include "lethargy/subspace.hpp"
#include "lethargy/subspace_chain.hpp"

namespace lethargy {

// ---------------------------------------------------------------------------
// Targets

/// Throws unless d is nonempty, finite, nonnegative and non-increasing.
inline void validate_targets(const std::vector<double> &d) {
  if (d.empty())
    throw InvalidArgument("targets are empty");
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!std::isfinite(d[i]) || d[i] < 0.0)
      throw InvalidArgument("targets must be finite and nonnegative");
    if (i > 0 && d[i] > d[i - 1])
      throw InvalidArgument("targets not non-increasing");
  }
}

/// tau_1 = d_1, tau_j = min_{k=2..j} (d_{k-1} - d_k). 0-based storage.
inline std::vector<double> tau_sequence(const std::vector<double> &d) {
  std::vector<double> tau(d.size());
  if (d.empty())
    return tau;
  tau[0] = d[0];
  double run = kInf;
  for (std::size_t j = 1; j < d.size(); ++j) {
    run = std::min(run, d[j - 1] - d[j]);
    tau[j] = run;
  }
  return tau;
}

/// One recorded invariant evaluation. Failures are data, not exceptions.
struct Check {
  std::string name;
  int j = 0;
  int n = 0;
  double value = 0.0;
  double bound = 0.0;
  bool ok = true;
};

// ---------------------------------------------------------------------------
// q-sequence lemma

struct ZW {
  Point z;
  Point w;
  double t = 0.0;
};

/// z = y2/||y2|| + t y1_dir with rho(z, Q1) = 2, and w = t y1_dir.
inline ZW build_zw(const NormSpec &space, const Subspace &q1,
                   const Subspace &q2, const Point &y2, const Point &y1_dir,
                   const Tolerances &tol = {}) {
  const double ny = norm(space, y2);
  if (!(ny > 0.0))
    throw InvalidArgument("build_zw: y2 is zero");
  const double r2 = distance(space, q2, y2, tol).value;
  if (std::abs(r2 - ny) > tol.verify * (1.0 + ny))
    throw InvalidArgument("build_zw: witness property rho(y2, Q2) = ||y2|| fails");
  if (!q2.contains(y1_dir, 1e-9))
    throw InvalidArgument("build_zw: y1_dir must lie in Q2");
  const double r1 = distance(space, q1, y1_dir, tol).value;
  if (!(r1 > 0.0))
    throw InvalidArgument("build_zw: y1_dir lies in Q1");
  const Point yhat = y2 / ny;
  ZW out;
  out.t = ivt_solve(space, q1, yhat, y1_dir, 0.0, 3.0 / r1, 2.0, tol);
  out.w = out.t * y1_dir;
  out.z = yhat + out.w;
  return out;
}

struct QEntry {
  double u = 0.0;
  double v = 0.0;
  double mu = 0.0;
  Point q;
  bool expanded = false;
};

struct QSequenceLevel {
  int j = 0;
  Point z;
  Point w;
  double alpha = 0.0;   ///< levels j >= 2: z_j = z_j' + alpha z_{j-1}
  double rho_w = 0.0;   ///< rho(w, Q1)
  double delta_max = 0.0;
  double delta = 0.0;
  bool delta_from_crossing = false;
  LineSearchResult search;
  TwoPointResult two_point;
  Functional f;
  double f_of_z = 0.0;
  Point x1; ///< (f(z) - delta) w
  Point x2; ///< z - f(z) w
  std::vector<QEntry> entries;
  double c = 0.0;       ///< ||z|| + 2
  std::vector<std::string> warnings;
};

/// z, w, delta, f and the two spanning vectors of the q-sequence lemma.
///
/// delta is the last solution of rho(z - a w, Q1) = 1 in [1, 3/rho(w, Q1)]:
/// the right end of the minimisers when the minimum is 1, otherwise the
/// crossing to the right of the minimisers.
inline QSequenceLevel q_level(const NormSpec &space, const Subspace &q1,
                              const Point &z, const Point &w,
                              const Tolerances &tol = {}) {
  QSequenceLevel L;
  L.z = z;
  L.w = w;
  L.rho_w = distance(space, q1, w, tol).value;
  if (!(L.rho_w > 0.0))
    throw InvalidArgument("q-sequence: w lies in Q1");
  L.delta_max = std::max(1.0, 3.0 / L.rho_w);
  L.search = argmin_line_right(space, q1, z, w, 1.0, L.delta_max, tol);
  const double flat = 1e3 * solve_tolerance(space, tol);
  if (L.search.min_value >= 1.0 - flat) {
    L.delta = L.search.delta;
  } else {
    L.delta = ivt_solve(space, q1, z, Point(-w), L.search.delta, L.delta_max,
                        1.0, tol);
    L.delta_from_crossing = true;
  }
  L.two_point = two_point_hahn_banach(space, q1, w, z, L.delta, false, tol);
  if (!L.two_point.feasible_at_norm)
    L.warnings.push_back("level functional infeasible at norm (ratio " +
                         std::to_string(L.two_point.achieved_dual_norm /
                                        L.two_point.norm_bound) +
                         ")");
  L.f = L.two_point.f;
  L.f_of_z = L.f(z);
  L.x1 = (L.f_of_z - L.delta) * w;
  L.x2 = z - L.f_of_z * w;
  L.c = norm(space, z) + 2.0;
  return L;
}

/// q = v x2 + mu x1 with rho(q, Q1) = u, mu searched in [v, u] first.
inline QEntry q_entry(const NormSpec &space, const Subspace &q1,
                      const QSequenceLevel &L, double u, double v,
                      std::vector<std::string> &warnings,
                      const Tolerances &tol = {}) {
  if (!(u >= v && v >= 0.0))
    throw InvalidArgument("q-sequence needs u >= v >= 0");
  QEntry e;
  e.u = u;
  e.v = v;
  const Point base = v * L.x2;
  auto g = [&](double mu) {
    return distance(space, q1, base + mu * L.x1, tol).value;
  };
  const double slack = 1e-12 * (1.0 + u);
  double lo = v, hi = u;
  if (g(lo) >= u - slack) {
    e.mu = lo;
  } else {
    int grow = 0;
    while (g(hi) < u) {
      if (++grow > 60)
        throw SolverFailure("q-sequence: mu bracket expansion failed");
      hi = v + 2.0 * std::max(hi - v, 0.5);
      e.expanded = true;
    }
    if (e.expanded)
      warnings.push_back("mu bracket expanded beyond [v, u]");
    e.mu = detail::bisect_root(g, lo, hi, u, tol.root, "q-sequence mu");
  }
  e.q = base + e.mu * L.x1;
  return e;
}

/// q-sequence lemma: the level data plus one q per (u_m, v_m) pair.
inline QSequenceLevel q_sequence(const NormSpec &space, const Subspace &q1,
                                 const Subspace &q2, const Point &z,
                                 const Point &w,
                                 const std::vector<std::pair<double, double>> &pairs,
                                 const Tolerances &tol = {}) {
  for (const auto &[u, v] : pairs)
    if (!(u >= v && v >= 0.0))
      throw InvalidArgument("q-sequence needs u_m >= v_m >= 0");
  if (q2.contains(z, 1e-10))
    throw InvalidArgument("q-sequence: z lies in Q2");
  QSequenceLevel L = q_level(space, q1, z, w, tol);
  for (const auto &[u, v] : pairs)
    L.entries.push_back(q_entry(space, q1, L, u, v, L.warnings, tol));
  return L;
}

/// Candidate directions in Q2 for build_zw: +/- each orthonormal column.
/// Returns the first whose level functional is feasible at norm, otherwise
/// the one with the smallest norm excess.
inline std::pair<ZW, QSequenceLevel>
choose_zw(const NormSpec &space, const Subspace &q1, const Subspace &q2,
          const Point &y2, const Tolerances &tol = {}) {
  std::optional<std::pair<ZW, QSequenceLevel>> best;
  double best_ratio = kInf;
  const Eigen::MatrixXd &o = q2.orthonormal();
  for (Eigen::Index c = 0; c < o.cols(); ++c) {
    for (double sgn : {1.0, -1.0}) {
      const Point dir = sgn * o.col(c);
      if (distance(space, q1, dir, tol).value <= 1e-9)
        continue;
      ZW zw = build_zw(space, q1, q2, y2, dir, tol);
      QSequenceLevel L = q_level(space, q1, zw.z, zw.w, tol);
      const double ratio = L.two_point.achieved_dual_norm / L.two_point.norm_bound;
      if (L.two_point.feasible_at_norm)
        return {std::move(zw), std::move(L)};
      if (ratio < best_ratio) {
        best_ratio = ratio;
        best.emplace(std::move(zw), std::move(L));
      }
    }
  }
  if (!best)
    throw InvalidArgument("no admissible direction in Q2 outside Q1");
  return std::move(*best);
}

// ---------------------------------------------------------------------------
// Finite chains

struct FiniteResult {
  Point x;
  double lambda = 0.0;
  double norm_x = 0.0;
  bool norm_bound_ok = false; ///< ||x|| <= d_1 + 1
  double membership_residual = 0.0; ///< Euclidean residual of x - lambda z in Y_n
};

/// Element with rho(x, Y_k) = d_k for a strictly decreasing d and
/// x - lambda z in Y_n, lambda = d_n / rho(z, Y_n).
inline FiniteResult finite_construct(const NormSpec &space,
                                     const std::vector<Subspace> &ys,
                                     const std::vector<double> &d,
                                     const Point &z, const Tolerances &tol = {}) {
  const std::size_t n = ys.size();
  if (n == 0 || d.size() != n)
    throw InvalidArgument("finite_construct: targets and chain lengths differ");
  for (std::size_t k = 0; k < n; ++k) {
    if (!(d[k] >= 0.0) || !std::isfinite(d[k]))
      throw InvalidArgument("finite_construct: targets must be nonnegative");
    if (k > 0 && !(d[k] < d[k - 1]))
      throw InvalidArgument("finite_construct: targets must strictly decrease");
  }
  const double rz = distance(space, ys[n - 1], z, tol).value;
  if (!(rz > 1e-12 * (1.0 + norm(space, z))))
    throw InvalidArgument("finite_construct: z lies in Y_n");

  FiniteResult out;
  out.lambda = d[n - 1] / rz;
  Point x = out.lambda * z;
  for (std::size_t kk = n - 1; kk-- > 0;) {
    // kk is the 0-based index of Y_k; corrections live in Y_{k+1}.
    x -= distance(space, ys[kk + 1], x, tol).minimizer;
    Point y = witness(space, ys[kk], ys[kk + 1], std::nullopt, tol);
    y /= norm(space, y);
    const double hi = d[kk] + norm(space, x) + 1.0;
    const double t = ivt_solve(space, ys[kk], x, y, 0.0, hi, d[kk], tol);
    x += t * y;
  }
  if (n > 1 && !ys[0].is_zero())
    x -= distance(space, ys[0], x, tol).minimizer;
  out.x = x;
  out.norm_x = norm(space, x);
  out.norm_bound_ok = out.norm_x <= d[0] + 1.0 + tol.verify;
  out.membership_residual = ys[n - 1].residual(x - out.lambda * z);
  return out;
}

// ---------------------------------------------------------------------------
// Main construction

struct FunctionalRecord {
  int j = 0;
  int n = 0;
  TwoPointResult chosen;
  std::optional<TwoPointResult> alternative; ///< mirrored variant, if tried
  double at_q_j = 0.0;    ///< f_{j,n}(q_{j,n})
  double at_q_next = 0.0; ///< f_{j,n}(q_{j+1,n})
  double left_target = 0.0; ///< lo - min over the minimiser set [lo, delta]
  double window_lo = 0.0;
  double window_hi = 0.0;
};

struct SweepStep {
  int k = 0;                      ///< solves lambda_{k-1,n}
  double target = 0.0;            ///< d_{k-1}
  double h0 = 0.0;                ///< rho(z_{k,n}, Y_{k-1})
  double endpoint_general = 0.0;  ///< -(d_{k-1} + d_k f_{k-1,n}(q_{k,n}))
  double endpoint_last = 0.0;     ///< -(d_{k-1} + d_k f_{n-1,n}(q_{n,n}))
  double lo = 0.0;
  double hi = 0.0;
  double lambda = 0.0;
  int widenings = 0;
  bool fallback = false;
  bool adapted_q = false;
  bool finite_lemma = false;      ///< step replaced by the finite-chain correction
};

struct Residual {
  std::size_t k = 0;
  double d = 0.0;
  double rho = 0.0;
  double residual = 0.0;
  bool pass = true;
};

struct ConstructionTranscript {
  std::string branch;
  std::size_t n = 0;
  std::vector<double> d;
  std::vector<double> tau;
  std::vector<QSequenceLevel> levels;
  std::vector<Point> q;          ///< q_{k,n}
  std::vector<double> u;         ///< u_n^(k)
  std::vector<FunctionalRecord> functionals;
  std::vector<SweepStep> sweep;
  std::vector<double> lambdas;   ///< lambda_{k,n}
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  std::shared_ptr<ConstructionTranscript> inner;
  std::optional<FiniteResult> patch;
  Point x;
  std::vector<Residual> residuals;

  bool checks_ok() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const Check &c) { return c.ok; });
  }
};

struct ConstructionConfig {
  Tolerances tol;
  bool transcript = true;
  int max_widenings = 60;
  double check_tol = 1e-6;
};

/// Aborted construction: the transcript up to the failing step.
class ConstructionFailure : public SolverFailure {
public:
  ConstructionFailure(const std::string &what, ConstructionTranscript t)
      : SolverFailure(what), transcript(std::move(t)) {}
  ConstructionTranscript transcript;
};

namespace detail {

inline Check make_check(std::string name, int j, int n, double value,
                        double bound, bool ok) {
  return Check{std::move(name), j, n, value, bound, ok};
}

inline Check eq_check(std::string name, int j, int n, double value,
                      double expected, double tol) {
  return make_check(std::move(name), j, n, value, expected,
                    std::abs(value - expected) <= tol);
}

inline Check le_check(std::string name, int j, int n, double value,
                      double bound, double tol) {
  return make_check(std::move(name), j, n, value, bound, value <= bound + tol);
}

} // namespace detail

/// Runs the proof's construction for prefixes Y_1..Y_n of a chain with
/// strictly positive targets. Level data depends only on j, so one builder
/// serves every n (the Cauchy study relies on this).
class LethargyBuilder {
public:
  /// `ys` = Y_1..Y_m, `top` = Y_{m+1}. `given` holds optional witnesses
  /// with given[j] in Y_{j+2} (0-based).
  LethargyBuilder(NormSpec space, std::vector<Subspace> ys, Subspace top,
                  std::vector<double> d, ConstructionConfig cfg,
                  std::vector<Point> given = {})
      : space_(std::move(space)), ys_(std::move(ys)), top_(std::move(top)),
        d_(std::move(d)), cfg_(std::move(cfg)), given_(std::move(given)),
        y0_(Subspace::zero(top_.ambient_dim())) {
    if (ys_.size() != d_.size() || ys_.empty())
      throw InvalidArgument("builder: chain and targets differ in length");
    for (double v : d_)
      if (!(v > 0.0))
        throw InvalidArgument("builder: targets must be positive");
    if (top_.dim() <= ys_.back().dim())
      throw InvalidArgument("top level needs a space strictly larger than Y_m");
    tau_ = tau_sequence(d_);
  }

  std::size_t size() const { return ys_.size(); }
  const std::vector<double> &targets() const { return d_; }

  ConstructionTranscript run(std::size_t n) {
    if (n == 0 || n > ys_.size())
      throw InvalidArgument("builder: prefix length out of range");
    if (ys_[0].is_zero() && n >= 2 && d_[0] > d_[1])
      return run_patched(n);
    return run_direct(n);
  }

private:
  const Tolerances &tol() const { return cfg_.tol; }
  const Subspace &y(std::size_t j) const { return j <= ys_.size() ? ys_[j - 1] : top_; }
  double d(std::size_t j) const { return d_[j - 1]; }
  double tau(std::size_t j) const { return tau_[j - 1]; }
  bool tie() const { return d_.size() >= 2 && d_[0] == d_[1]; }

  /// Unit witness yhat_j in Y_{j+1} with rho(yhat_j, Y_j) = 1.
  const Point &yhat(std::size_t j) {
    auto it = yhat_.find(j);
    if (it != yhat_.end())
      return it->second;
    Point w = (j - 1 < given_.size() && j < ys_.size())
                  ? given_[j - 1]
                  : witness(space_, y(j), y(j + 1), std::nullopt, tol());
    w /= norm(space_, w);
    return yhat_.emplace(j, std::move(w)).first->second;
  }

  /// z_1 and, when Y_1 != {0}, the full level-1 data.
  void ensure_level_one() {
    if (z_.count(1))
      return;
    if (ys_[0].is_zero()) {
      z_[1] = 2.0 * yhat(1);
      return;
    }
    auto [zw, L] = choose_zw(space_, y0_, y(1), yhat(1), tol());
    L.j = 1;
    z_[1] = zw.z;
    levels_.emplace(1, std::move(L));
  }

  const QSequenceLevel &level(std::size_t j) {
    if (j == 1) {
      ensure_level_one();
      return levels_.at(1);
    }
    auto it = levels_.find(j);
    if (it != levels_.end())
      return it->second;
    if (j == 2)
      ensure_level_one();
    else
      level(j - 1);
    const Point &zp = z_.at(j - 1);
    const Point zj1 = yhat(j) + zp;
    const double alpha = ivt_solve(space_, y0_, zj1, zp, -0.5, 0.5, 2.0, tol());
    const Point zj = zj1 + alpha * zp;
    const Point wj = (1.0 + alpha) * zp;
    QSequenceLevel L = q_level(space_, y0_, zj, wj, tol());
    L.j = static_cast<int>(j);
    L.alpha = alpha;
    z_[j] = zj;
    return levels_.emplace(j, std::move(L)).first->second;
  }

  void level_checks(ConstructionTranscript &t, const QSequenceLevel &L) {
    const double ct = cfg_.check_tol;
    const int j = L.j;
    t.checks.push_back(detail::eq_check("level_rho_z_Y0", j, 0, norm(space_, L.z), 2.0, ct));
    t.checks.push_back(detail::eq_check(
        "level_rho_z_Yj", j, 0, distance(space_, y(j), L.z, tol()).value, 1.0, ct));
    t.checks.push_back(detail::eq_check("level_norm_z_minus_w", j, 0,
                                        norm(space_, L.z - L.w), 1.0, ct));
    t.checks.push_back(detail::make_check("level_delta_window", j, 0, L.delta,
                                          L.delta_max,
                                          L.delta >= 1.0 - ct && L.delta <= L.delta_max + ct));
    t.checks.push_back(detail::le_check(
        "level_functional_norm", j, 0, L.two_point.achieved_dual_norm * L.rho_w, 1.0, ct));
    t.checks.push_back(detail::make_check("level_f_of_z_range", j, 0, L.f_of_z, 2.0,
                                          L.f_of_z >= -ct && L.f_of_z <= 2.0 + ct));
  }

  ConstructionTranscript run_direct(std::size_t n) {
    ConstructionTranscript t;
    t.n = n;
    t.d.assign(d_.begin(), d_.begin() + static_cast<std::ptrdiff_t>(n));
    t.tau = tau_sequence(t.d);
    const double ct = cfg_.check_tol;
    const bool special_one = (n >= 2 && tie()) || (n == 1 && ys_[0].is_zero());
    t.branch = special_one ? (n == 1 ? "single-zero" : "tied-first") : "direct";

    // q_{j,n}
    t.q.resize(n);
    t.u.resize(n);
    for (std::size_t j = 1; j <= n; ++j) {
      if (j == 1 && special_one) {
        ensure_level_one();
        if (levels_.count(1))
          t.levels.push_back(levels_.at(1));
        t.q[0] = yhat(1);
        t.u[0] = 1.0;
        continue;
      }
      const QSequenceLevel &L = level(j);
      t.levels.push_back(L);
      level_checks(t, L);
      for (const auto &w : L.warnings)
        t.warnings.push_back("level " + std::to_string(j) + ": " + w);
      const double u = 1.0 + tau(n) / (std::ldexp(1.0, static_cast<int>(j)) * d(j));
      std::vector<std::string> warns;
      QEntry e = q_entry(space_, y0_, L, u, 1.0, warns, tol());
      for (const auto &w : warns)
        t.warnings.push_back("level " + std::to_string(j) + ": " + w);
      t.levels.back().entries.push_back(e);
      t.checks.push_back(detail::make_check("q_mu_range", static_cast<int>(j),
                                            static_cast<int>(n), e.mu, u,
                                            e.mu >= 1.0 - ct && e.mu <= u + ct));
      t.q[j - 1] = e.q;
      t.u[j - 1] = u;
    }
    for (std::size_t j = 1; j <= n; ++j) {
      const int jj = static_cast<int>(j), nn = static_cast<int>(n);
      t.checks.push_back(detail::eq_check("q_rho_Y0", jj, nn, norm(space_, t.q[j - 1]),
                                          t.u[j - 1], ct));
      t.checks.push_back(detail::eq_check(
          "q_rho_Yj", jj, nn, distance(space_, y(j), t.q[j - 1], tol()).value, 1.0, ct));
    }

    for (std::size_t j = 1; j < n; ++j)
      t.functionals.push_back(functional_record(t, j));

    // Backward sweep.
    t.lambdas.assign(n, 0.0);
    t.lambdas[n - 1] = d(n);
    Point acc = d(n) * t.q[n - 1];
    for (std::size_t k = n; k >= 2; --k) {
      SweepStep s;
      s.k = static_cast<int>(k);
      s.target = d(k - 1);
      const Subspace &yk1 = y(k - 1);
      const double slack = 1e-12 * (1.0 + s.target);
      if (k == 2 && special_one &&
          distance(space_, yk1, acc, tol()).value > s.target + slack) {
        // Tied first targets: q_{1,n} is any unit vector of Y_2 \ Y_1. Take
        // it along the nearest point of z_{2,n} in Y_2, so that
        // z_{2,n} + lambda q_{1,n} reaches that nearest point.
        // rho(z - v, Y_1) lies between rho(z, Y_2) and ||z - v||, both d_2.
        const Point v = distance(space_, y(2), acc, tol()).minimizer;
        const double nv = norm(space_, v);
        t.q[0] = -v / nv;
        t.functionals[0] = functional_record(t, 1);
        s.adapted_q = true;
        s.h0 = distance(space_, yk1, acc, tol()).value;
        s.endpoint_general = -(d(1) + d(2) * t.functionals[0].at_q_next);
        s.endpoint_last = -(d(1) + d(2) * t.functionals[n - 2].at_q_next);
        s.lo = s.hi = s.lambda = nv;
        t.lambdas[0] = nv;
        acc += nv * t.q[0];
        t.sweep.push_back(s);
        t.warnings.push_back("tied first targets: q_1 chosen at the last sweep step");
        break;
      }
      const Point &qk1 = t.q[k - 2];
      auto h = [&](double lam) {
        return distance(space_, yk1, acc + lam * qk1, tol()).value;
      };
      s.h0 = h(0.0);
      s.endpoint_general = -(d(k - 1) + d(k) * t.functionals[k - 2].at_q_next);
      s.endpoint_last = -(d(k - 1) + d(k) * t.functionals[n - 2].at_q_next);
      t.checks.push_back(detail::le_check("sweep_upper_estimate", static_cast<int>(k),
                                          static_cast<int>(n), s.h0, s.target, ct));
      if (s.h0 <= s.target + slack) {
        double lo = std::min(s.endpoint_general, 0.0);
        if (lo == 0.0)
          lo = -std::max(s.target, 1e-3);
        while (h(lo) < s.target) {
          if (++s.widenings > cfg_.max_widenings)
            throw ConstructionFailure("sweep bracket widening failed at k=" +
                                          std::to_string(k),
                                      std::move(t));
          lo *= 2.0;
        }
        s.lo = lo;
        s.hi = 0.0;
        s.lambda = detail::bisect_root(h, lo, 0.0, s.target, tol().root, "sweep");
      } else {
        // The upper estimate failed: look for a root between the minimiser
        // of lambda -> rho(acc + lambda q, Y) and 0.
        const LineSearchResult m =
            argmin_line_right(space_, yk1, acc, Point(-qk1), -kInf, kInf, tol());
        if (m.min_value > s.target + slack) {
          // No lambda reaches the target along q_{k-1,n}. Replace that step
          // by the finite-chain correction inside Y_k: strip the nearest
          // point of Y_k, then move along the witness of Y_{k-1} in Y_k.
          finite_step(t, s, k, acc);
          t.sweep.push_back(s);
          continue;
        }
        s.fallback = true;
        s.lo = std::min(m.delta, 0.0);
        s.hi = std::max(m.delta, 0.0);
        s.lambda = detail::bisect_root(h, s.lo, s.hi, s.target, tol().root, "sweep");
        t.warnings.push_back("sweep upper estimate violated at k=" + std::to_string(k) +
                             "; root taken between the minimiser and 0");
      }
      t.lambdas[k - 2] = s.lambda;
      acc += s.lambda * qk1;
      t.sweep.push_back(s);
    }
    for (const auto &r : t.functionals) {
      const double ct2 = cfg_.check_tol;
      t.checks.push_back(detail::eq_check("f_norm", r.j, r.n, r.chosen.achieved_dual_norm, 1.0, ct2));
      t.checks.push_back(detail::eq_check("f_at_q_j", r.j, r.n, r.at_q_j, 1.0, ct2));
      t.checks.push_back(detail::make_check(
          "f_window", r.j, r.n, r.at_q_next, r.window_hi,
          r.at_q_next >= r.window_lo - ct2 && r.at_q_next <= r.window_hi + ct2));
      if (!r.chosen.feasible_at_norm)
        t.warnings.push_back("f_" + std::to_string(r.j) + "," + std::to_string(r.n) +
                             " infeasible at norm");
    }
    t.x = acc;
    lambda_checks(t);
    return t;
  }

  /// Sweep step from the finite-chain lemma. Every correction lies in Y_k,
  /// so the distances to Y_k, Y_{k+1}, ... set by the later steps stay put.
  void finite_step(ConstructionTranscript &t, SweepStep &s, std::size_t k, Point &acc) {
    const Subspace &lo = y(k - 1);
    const Point v = distance(space_, y(k), acc, tol()).minimizer;
    const Point base = acc - v;
    const Point &yh = yhat(k - 1);
    const double slack = 1e-12 * (1.0 + s.target);
    double a = 0.0;
    if (distance(space_, lo, base, tol()).value < s.target - slack)
      a = ivt_solve(space_, lo, base, yh, 0.0, s.target + norm(space_, base) + 1.0, s.target,
                    tol());
    const Point c = a * yh - v;
    const double nc = norm(space_, c);
    if (!(nc > 0.0))
      throw ConstructionFailure("sweep: empty finite-chain correction at k=" +
                                    std::to_string(k),
                                std::move(t));
    t.q[k - 2] = c / nc;
    if (k >= 3)
      t.functionals[k - 3] = functional_record(t, k - 2);
    t.functionals[k - 2] = functional_record(t, k - 1);
    s.finite_lemma = true;
    s.lo = s.hi = s.lambda = nc;
    t.lambdas[k - 2] = nc;
    acc += c;
    t.warnings.push_back("sweep target unreachable along q_" + std::to_string(k - 1) +
                         " at k=" + std::to_string(k) + "; finite-chain correction used");
  }

  /// f_{j,n} from the two-point construction on (Y_j, q_{j,n}, q_{j+1,n});
  /// the mirrored variant is tried when the plain one misses the norm.
  FunctionalRecord functional_record(const ConstructionTranscript &t, std::size_t j) {
    const std::size_t n = t.n;
    FunctionalRecord r;
    r.j = static_cast<int>(j);
    r.n = static_cast<int>(n);
    r.chosen = two_point_hahn_banach(space_, y(j), t.q[j - 1], t.q[j], std::nullopt,
                                     false, tol());
    if (!r.chosen.feasible_at_norm) {
      TwoPointResult alt = two_point_hahn_banach(space_, y(j), t.q[j - 1], t.q[j],
                                                 std::nullopt, true, tol());
      if (alt.feasible_at_norm || alt.achieved_dual_norm < r.chosen.achieved_dual_norm)
        std::swap(alt, r.chosen);
      r.alternative = std::move(alt);
    }
    r.at_q_j = r.chosen.f(t.q[j - 1]);
    r.at_q_next = r.chosen.f(t.q[j]);
    r.left_target = r.chosen.search.lo - r.chosen.search.min_value;
    r.window_lo = -1.0;
    r.window_hi = tau(n) / (std::ldexp(1.0, static_cast<int>(j)) * d(j + 1)) - 1.0;
    return r;
  }

  void lambda_checks(ConstructionTranscript &t) {
    const std::size_t n = t.n;
    const double ct = cfg_.check_tol;
    const int nn = static_cast<int>(n);
    t.checks.push_back(detail::make_check("lambda_last_exact", nn, nn, t.lambdas[n - 1],
                                          t.d[n - 1], t.lambdas[n - 1] == t.d[n - 1]));
    for (std::size_t k = 1; k < n; ++k) {
      const double bound = t.d[k - 1] - t.d[k] * (1.0 - std::ldexp(1.0, -static_cast<int>(k)));
      t.checks.push_back(detail::le_check("lambda_bound", static_cast<int>(k), nn,
                                          std::abs(t.lambdas[k - 1]), bound, ct));
    }
  }

  /// Y_1 = {0} and d_1 > d_2: construct on Y_2..Y_n, then patch level 1.
  ConstructionTranscript run_patched(std::size_t n) {
    if (!inner_) {
      std::vector<Subspace> rest(ys_.begin() + 1, ys_.end());
      std::vector<double> drest(d_.begin() + 1, d_.end());
      std::vector<Point> grest;
      if (given_.size() > 1)
        grest.assign(given_.begin() + 1, given_.end());
      inner_ = std::make_unique<LethargyBuilder>(space_, std::move(rest), top_,
                                                 std::move(drest), cfg_, std::move(grest));
    }
    ConstructionTranscript in = inner_->run(n - 1);
    ConstructionTranscript t;
    t.branch = "zero-first-patched";
    t.n = n;
    t.d.assign(d_.begin(), d_.begin() + static_cast<std::ptrdiff_t>(n));
    t.tau = tau_sequence(t.d);
    FiniteResult fr = finite_construct(space_, {ys_[0], ys_[1]}, {d_[0], d_[1]}, in.x, tol());
    t.x = fr.x;
    t.checks.push_back(detail::eq_check("patch_lambda_one", 1, static_cast<int>(n),
                                        fr.lambda, 1.0, cfg_.check_tol));
    t.q.push_back(fr.x - in.x);
    t.lambdas.push_back(1.0);
    for (std::size_t k = 0; k < in.q.size(); ++k) {
      t.q.push_back(in.q[k]);
      t.lambdas.push_back(in.lambdas[k]);
    }
    t.warnings = in.warnings;
    t.patch = fr;
    t.inner = std::make_shared<ConstructionTranscript>(std::move(in));
    return t;
  }

  NormSpec space_;
  std::vector<Subspace> ys_;
  Subspace top_;
  std::vector<double> d_;
  ConstructionConfig cfg_;
  std::vector<Point> given_;
  Subspace y0_;
  std::vector<double> tau_;
  std::map<std::size_t, Point> yhat_;
  std::map<std::size_t, Point> z_;
  std::map<std::size_t, QSequenceLevel> levels_;
  std::unique_ptr<LethargyBuilder> inner_;
};

struct ConstructionResult {
  Point x;
  std::vector<Residual> residuals;
  bool pass = false;
  double max_residual = 0.0;
  double zero_tail_membership = 0.0;
  ConstructionTranscript transcript;
};

/// Residual table of x against the targets.
inline std::vector<Residual> residual_table(const NormSpec &space, const Chain &chain,
                                            const Point &x, const std::vector<double> &d,
                                            double tol, const Tolerances &t = {}) {
  std::vector<Residual> out;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    Residual r;
    r.k = k + 1;
    r.d = d[k];
    r.rho = distance(space, chain[k], x, t).value;
    r.residual = std::abs(r.rho - r.d);
    r.pass = r.residual <= tol;
    out.push_back(r);
  }
  return out;
}

/// Element x with rho(x, Y_k) = d_k for every link of the chain.
inline ConstructionResult theorem_construct(const NormSpec &space, const Chain &chain,
                                            const std::vector<double> &d,
                                            const ConstructionConfig &cfg = {}) {
  const ChainReport rep = validate_chain(space, chain, cfg.tol);
  if (!rep.ok)
    throw InvalidArgument("chain validation failed: link " +
                          std::to_string(rep.issues.front().link) + ": " +
                          rep.issues.front().message);
  validate_targets(d);
  if (d.size() != chain.size())
    throw InvalidArgument("targets and chain lengths differ");

  const std::size_t m = chain.size();
  std::size_t r = 0;
  while (r < m && d[r] > 0.0)
    ++r;

  ConstructionResult out;
  if (r == 0) {
    out.x = Point::Zero(static_cast<Eigen::Index>(chain.ambient_dim));
    out.transcript.branch = "all-zero";
    out.transcript.n = 0;
    out.transcript.d = d;
  } else {
    Subspace top = r < m ? chain[r] : Subspace::whole(chain.ambient_dim);
    std::vector<Subspace> ys(chain.spaces.begin(),
                             chain.spaces.begin() + static_cast<std::ptrdiff_t>(r));
    std::vector<double> dd(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(r));
    std::vector<Point> given;
    for (std::size_t j = 0; j < chain.witnesses.size() && j + 1 < r; ++j)
      given.push_back(chain.witnesses[j]);
    LethargyBuilder b(space, std::move(ys), top, std::move(dd), cfg, std::move(given));
    out.transcript = b.run(r);
    out.x = out.transcript.x;
    if (r < m) {
      out.transcript.branch += "+zero-tail";
      out.zero_tail_membership = chain[r].residual(out.x) / (1.0 + out.x.norm());
      out.transcript.checks.push_back(detail::le_check(
          "zero_tail_membership", static_cast<int>(r + 1), static_cast<int>(m),
          out.zero_tail_membership, 0.0, 1e-8));
    }
  }
  const double vt = cfg.tol.verify * (1.0 + d[0]);
  out.residuals = residual_table(space, chain, out.x, d, vt, cfg.tol);
  out.pass = true;
  for (const auto &row : out.residuals) {
    out.max_residual = std::max(out.max_residual, row.residual);
    out.pass = out.pass && row.pass;
  }
  out.transcript.x = out.x;
  out.transcript.residuals = out.residuals;
  if (!cfg.transcript) {
    out.transcript.levels.clear();
    out.transcript.functionals.clear();
    out.transcript.sweep.clear();
    out.transcript.inner.reset();
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cauchy study

struct CauchyReport {
  std::size_t n_min = 0;
  std::size_t n_max = 0;
  std::vector<Point> x;                     ///< x_{n,n}, index n - n_min
  std::vector<std::vector<double>> gaps;    ///< gaps[a][b] = ||x_{n_a} - x_{n_b}||
  std::vector<Check> q_difference;          ///< ||q_{j,m} - q_{j,n}|| <= 4 tau_m/(2^j d_j)
  std::vector<Check> tail;                  ///< sum_{k=m}^n |lambda_k| ||q_{k,n}|| <= d_{m-1}
  std::vector<double> max_residual;         ///< per n
  std::vector<ConstructionTranscript> transcripts;
  std::vector<std::string> warnings;
};

inline CauchyReport cauchy_study(const NormSpec &space, const Chain &chain,
                                 const std::vector<double> &d, std::size_t n_min,
                                 std::size_t n_max, const ConstructionConfig &cfg = {}) {
  const ChainReport rep = validate_chain(space, chain, cfg.tol);
  if (!rep.ok)
    throw InvalidArgument("chain validation failed");
  validate_targets(d);
  if (n_min < 1 || n_min > n_max || n_max > chain.size() || d.size() < n_max)
    throw InvalidArgument("cauchy_study: bad range");
  for (std::size_t k = 0; k < n_max; ++k)
    if (!(d[k] > 0.0))
      throw InvalidArgument("cauchy_study: targets must be positive on the range");

  std::vector<Subspace> ys(chain.spaces.begin(),
                           chain.spaces.begin() + static_cast<std::ptrdiff_t>(n_max));
  Subspace top = n_max < chain.size() ? chain[n_max] : Subspace::whole(chain.ambient_dim);
  std::vector<double> dd(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(n_max));
  LethargyBuilder b(space, std::move(ys), top, dd, cfg);

  CauchyReport out;
  out.n_min = n_min;
  out.n_max = n_max;
  const std::vector<double> tau = tau_sequence(dd);
  for (std::size_t n = n_min; n <= n_max; ++n) {
    ConstructionTranscript t = b.run(n);
    double worst = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      worst = std::max(worst, std::abs(distance(space, chain[k], t.x, cfg.tol).value - d[k]));
    out.max_residual.push_back(worst);
    for (std::size_t m = 2; m <= n; ++m) {
      double s = 0.0;
      for (std::size_t k = m; k <= n; ++k)
        s += std::abs(t.lambdas[k - 1]) * norm(space, t.q[k - 1]);
      out.tail.push_back(detail::le_check("tail_estimate", static_cast<int>(m),
                                          static_cast<int>(n), s, d[m - 2], cfg.check_tol));
    }
    out.x.push_back(t.x);
    for (const auto &w : t.warnings)
      out.warnings.push_back("n=" + std::to_string(n) + ": " + w);
    out.transcripts.push_back(std::move(t));
  }
  const std::size_t cnt = out.x.size();
  out.gaps.assign(cnt, std::vector<double>(cnt, 0.0));
  for (std::size_t a = 0; a < cnt; ++a)
    for (std::size_t c = 0; c < cnt; ++c)
      out.gaps[a][c] = norm(space, out.x[a] - out.x[c]);
  for (std::size_t a = 0; a < cnt; ++a) {
    const std::size_t m = n_min + a;
    for (std::size_t c = a + 1; c < cnt; ++c) {
      const std::size_t n = n_min + c;
      const auto &qm = out.transcripts[a].q;
      const auto &qn = out.transcripts[c].q;
      for (std::size_t j = 1; j <= m; ++j) {
        const double diff = norm(space, qm[j - 1] - qn[j - 1]);
        const double bound = 4.0 * tau[m - 1] / (std::ldexp(1.0, static_cast<int>(j)) * d[j - 1]);
        out.q_difference.push_back(detail::le_check("q_difference", static_cast<int>(j),
                                                    static_cast<int>(m * 100 + n), diff,
                                                    bound, cfg.check_tol));
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Norm attainment demo

struct JamesReport {
  Point x;
  double norm_x = 0.0;
  double f_ratio = 0.0;   ///< f(x) / ||f||
  double rho_kernel = 0.0; ///< rho(x, ker f)
  bool pass = false;
  std::vector<std::string> warnings;
  ConstructionResult construction;
};

/// Basis of ker f from the null space of the normalised coefficient row.
inline Subspace kernel_subspace(const Eigen::VectorXd &f) {
  const double nf = f.norm();
  if (!(nf > 0.0))
    throw InvalidArgument("zero functional");
  Eigen::MatrixXd row(f.size(), 1);
  row.col(0) = f / nf;
  return Subspace(Subspace(row).annihilator());
}

inline JamesReport james_demo(const NormSpec &space, const Eigen::VectorXd &f,
                              const std::vector<double> &d_tail,
                              const ConstructionConfig &cfg = {}) {
  const auto n = static_cast<std::size_t>(f.size());
  Chain chain;
  chain.ambient_dim = n;
  chain.spaces.push_back(Subspace::zero(n));
  chain.spaces.push_back(kernel_subspace(f));

  JamesReport out;
  if (!d_tail.empty()) {
    std::vector<double> full{1.0, 1.0};
    full.insert(full.end(), d_tail.begin(), d_tail.end());
    validate_targets(full);
    out.warnings.push_back("ker f is a hyperplane; the tail targets have no room "
                           "in the chain and are not used");
  }
  out.construction = theorem_construct(space, chain, {1.0, 1.0}, cfg);
  Point x = out.construction.x;
  const Functional fn = make_functional(space, f);
  if (fn(x) < 0.0) {
    x = -x;
    out.warnings.push_back("sign of x flipped so that f(x) > 0");
  }
  out.x = x;
  out.norm_x = norm(space, x);
  out.f_ratio = fn(x) / fn.dual_norm;
  out.rho_kernel = distance(space, chain[1], x, cfg.tol).value;
  const double t = cfg.tol.verify;
  out.pass = std::abs(out.norm_x - 1.0) <= t && std::abs(out.f_ratio - 1.0) <= t &&
             std::abs(out.rho_kernel - out.f_ratio) <= t;
  return out;
}

} // namespace lethargy

#endif // LETHARGY_LETHARGY_CONSTRUCTOR_HPP
