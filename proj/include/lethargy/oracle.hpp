#ifndef LETHARGY_ORACLE_HPP
#define LETHARGY_ORACLE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "lethargy/distance_engine.hpp"
#include "lethargy/error.hpp"
#include "lethargy/functional_factory.hpp"
#include "lethargy/lethargy_constructor.hpp"
#include "lethargy/normed_space.hpp"
#include "lethargy/subspace.hpp"
#include "lethargy/subspace_chain.hpp"

namespace lethargy {

// ---------------------------------------------------------------------------
// Reference distance

/// Search effort for brute_distance. `grid` = 0 picks a per-dimension size.
struct OracleBudget {
  int grid = 0;
  int refine_passes = 2;
  int starts = 4;
  int golden_iters = 60;
  std::uint64_t seed = 0x5eedULL;
};

namespace oracle_detail {

/// Weighted p-norm straight from the definition.
inline double direct_norm(double p, const std::vector<double> &w,
                          const Eigen::VectorXd &v) {
  const bool weighted = !w.empty();
  if (std::isinf(p)) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i)
      m = std::max(m, (weighted ? w[static_cast<std::size_t>(i)] : 1.0) * std::abs(v(i)));
    return m;
  }
  double big = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    big = std::max(big, std::abs(v(i)));
  if (big == 0.0)
    return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    acc += (weighted ? w[static_cast<std::size_t>(i)] : 1.0) * std::pow(std::abs(v(i)) / big, p);
  return big * std::pow(acc, 1.0 / p);
}

/// Modified Gram-Schmidt, applied twice.
inline Eigen::MatrixXd gram_schmidt(const Eigen::MatrixXd &a) {
  Eigen::MatrixXd q = a;
  for (Eigen::Index j = 0; j < q.cols(); ++j) {
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index i = 0; i < j; ++i)
        q.col(j) -= q.col(i).dot(q.col(j)) * q.col(i);
    const double nj = q.col(j).norm();
    if (!(nj > 1e-12))
      throw InvalidArgument("brute_distance: dependent basis");
    q.col(j) /= nj;
  }
  return q;
}

/// Golden-section minimum of a convex function on [lo, hi].
inline std::pair<double, double> golden(const std::function<double(double)> &f,
                                        double lo, double hi, int iters) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? std::make_pair(c, fc) : std::make_pair(d, fd);
}

} // namespace oracle_detail

/// Reference value of rho(x, Y) for dim Y <= 3.
///
/// Coefficients of an orthonormal basis of Y are searched in a box that
/// holds every coefficient vector of norm value at most 2||x||: a uniform
/// grid with shrinking refinement passes, compass polishing from random
/// starts, and nested golden-section minimisation (partial minima of a
/// convex function stay convex). Returns the best value seen.
inline double brute_distance(const NormSpec &space, const Subspace &y, const Point &x,
                             const OracleBudget &budget = {}) {
  y.check(x);
  const auto n = x.size();
  const double p = space.p();
  const std::vector<double> &w = space.weights();
  space.check_dim(static_cast<std::size_t>(n));
  auto nrm = [&](const Eigen::VectorXd &v) { return oracle_detail::direct_norm(p, w, v); };
  const double nx = nrm(x);
  const auto k = static_cast<Eigen::Index>(y.dim());
  if (k > 3)
    throw InvalidArgument("brute_distance: subspace dimension above 3");
  if (k == 0 || nx == 0.0)
    return nx;

  const Eigen::MatrixXd e = oracle_detail::gram_schmidt(y.basis());
  auto cost = [&](const Eigen::VectorXd &a) { return nrm(x - e * a); };

  // ||v|| >= c ||v||_2 with c = min scale * n^(min(0, 1/p - 1/2)).
  double smin = kInf;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = w.empty() ? 1.0
                     : std::isinf(p) ? w[static_cast<std::size_t>(i)]
                                     : std::pow(w[static_cast<std::size_t>(i)], 1.0 / p);
    smin = std::min(smin, s);
  }
  const double expo = std::isinf(p) ? -0.5 : std::min(0.0, 1.0 / p - 0.5);
  const double c = smin * std::pow(static_cast<double>(n), expo);
  const double radius = 2.0 * nx / c;

  Eigen::VectorXd best_a = Eigen::VectorXd::Zero(k);
  double best = nx;
  auto consider = [&](const Eigen::VectorXd &a) {
    const double v = cost(a);
    if (v < best) {
      best = v;
      best_a = a;
    }
  };

  // Grid passes.
  const int g = budget.grid > 0 ? budget.grid : (k == 1 ? 201 : k == 2 ? 41 : 17);
  Eigen::VectorXd centre = Eigen::VectorXd::Zero(k);
  double half = radius;
  Eigen::VectorXd a(k);
  for (int pass = 0; pass <= budget.refine_passes; ++pass) {
    const double step = 2.0 * half / (g - 1);
    long total = 1;
    for (Eigen::Index i = 0; i < k; ++i)
      total *= g;
    for (long idx = 0; idx < total; ++idx) {
      long r = idx;
      for (Eigen::Index i = 0; i < k; ++i) {
        a(i) = centre(i) - half + step * static_cast<double>(r % g);
        r /= g;
      }
      consider(a);
    }
    centre = best_a;
    half = 2.0 * step;
  }

  // Compass polish from the grid optimum and random starts.
  std::mt19937_64 rng(budget.seed);
  std::uniform_real_distribution<double> unif(-radius, radius);
  for (int s = 0; s <= budget.starts; ++s) {
    Eigen::VectorXd cur(k);
    if (s == 0)
      cur = best_a;
    else
      for (Eigen::Index i = 0; i < k; ++i)
        cur(i) = unif(rng);
    double fc = cost(cur);
    double h = s == 0 ? 2.0 * radius / (g - 1) : 0.25 * radius;
    while (h > 1e-12 * (1.0 + radius)) {
      bool moved = false;
      for (Eigen::Index i = 0; i < k && !moved; ++i)
        for (double sgn : {1.0, -1.0}) {
          Eigen::VectorXd t = cur;
          t(i) += sgn * h;
          const double ft = cost(t);
          if (ft < fc) {
            cur = t;
            fc = ft;
            moved = true;
            break;
          }
        }
      if (!moved)
        h *= 0.5;
    }
    consider(cur);
  }

  // Nested golden section over the whole box.
  std::function<std::pair<double, double>(Eigen::VectorXd &, Eigen::Index)> nested =
      [&](Eigen::VectorXd &aa, Eigen::Index level) -> std::pair<double, double> {
    auto f = [&](double t) {
      aa(level) = t;
      if (level + 1 == k)
        return cost(aa);
      return nested(aa, level + 1).second;
    };
    auto res = oracle_detail::golden(f, -radius, radius, budget.golden_iters);
    aa(level) = res.first;
    if (level + 1 < k)
      nested(aa, level + 1);
    return res;
  };
  Eigen::VectorXd ga = Eigen::VectorXd::Zero(k);
  nested(ga, 0);
  consider(ga);
  return best;
}

// ---------------------------------------------------------------------------
// Verification

struct VerifyRow {
  std::size_t k = 0;
  double d = 0.0;
  double rho = 0.0;
  double residual = 0.0;
  bool pass = true;
  std::optional<double> oracle; ///< brute_distance on links of dim <= 3
  bool oracle_agrees = true;
};

struct VerifyReport {
  std::vector<VerifyRow> rows;
  bool pass = true;
  bool oracle_consistent = true;
  double max_residual = 0.0;
};

/// Residual table of x against d, with brute-force spot checks on the
/// low-dimensional links.
inline VerifyReport verify_construction(const NormSpec &space, const Chain &chain,
                                        const Point &x, const std::vector<double> &d,
                                        double tol, const Tolerances &t = {},
                                        std::size_t oracle_links = 2) {
  if (d.size() != chain.size())
    throw InvalidArgument("verify: targets and chain lengths differ");
  VerifyReport rep;
  std::size_t spot = 0;
  for (std::size_t k = 0; k < chain.size(); ++k) {
    VerifyRow row;
    row.k = k + 1;
    row.d = d[k];
    row.rho = distance(space, chain[k], x, t).value;
    row.residual = std::abs(row.rho - row.d);
    row.pass = row.residual <= tol;
    if (chain[k].dim() <= 3 && spot < oracle_links) {
      ++spot;
      row.oracle = brute_distance(space, chain[k], x);
      row.oracle_agrees = *row.oracle >= row.rho - 1e-4 * (1.0 + row.rho) &&
                          *row.oracle <= row.rho + 1e-3 * (1.0 + row.rho);
    }
    rep.pass = rep.pass && row.pass;
    rep.oracle_consistent = rep.oracle_consistent && row.oracle_agrees;
    rep.max_residual = std::max(rep.max_residual, row.residual);
    rep.rows.push_back(row);
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Lemma audits

/// Configuration space sampled by an audit. dim and q_dim are drawn per
/// trial when left at 0 / -1.
struct AuditFamily {
  double p = 2.0;
  std::size_t dim_min = 3;
  std::size_t dim_max = 6;
  int q_dim = -1;
};

/// Named numeric data describing one trial, enough to rebuild it.
using AuditConfig = std::vector<std::pair<std::string, std::vector<double>>>;

struct AuditTrial {
  bool pass = false;
  std::uint64_t seed = 0;
  AuditConfig config;
  double observed = 0.0;
  double claimed = 0.0;
  std::string detail;
};

struct AuditReport {
  std::string lemma;
  std::size_t trials = 0;
  std::size_t passes = 0;
  std::vector<AuditTrial> failures;
};

inline const std::vector<std::string> &audit_ids() {
  static const std::vector<std::string> ids{"kernel_identity", "two_point_in_context",
                                            "two_point_free", "q_sequence", "finite"};
  return ids;
}

namespace oracle_detail {

inline std::uint64_t splitmix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::vector<double> to_vec(const Eigen::VectorXd &v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

inline std::vector<double> to_vec(const Eigen::MatrixXd &m) {
  return std::vector<double>(m.data(), m.data() + m.size());
}

struct Rng {
  explicit Rng(std::uint64_t s) : gen(s) {}
  std::mt19937_64 gen;
  std::size_t pick(std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(gen() % (hi - lo + 1));
  }
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * static_cast<double>(gen() >> 11) * 0x1.0p-53;
  }
  std::uint64_t next() { return gen(); }
};

inline bool near(double a, double b, double tol) {
  return std::abs(a - b) <= tol * (1.0 + std::abs(b));
}

/// Random Q1 < Q2 < Q3 with Q3 the whole space.
struct Triple {
  std::size_t dim;
  Chain chain; // Q1, Q2
  Point y2;
  Point y1_dir;
};

inline Triple random_triple(const NormSpec &space, const AuditFamily &fam, Rng &rng,
                            std::size_t min_dim, const Tolerances &tol) {
  Triple t;
  t.dim = rng.pick(std::max(fam.dim_min, min_dim), std::max(fam.dim_max, min_dim));
  const std::size_t k1 =
      fam.q_dim >= 0 ? static_cast<std::size_t>(fam.q_dim) : rng.pick(0, t.dim - 2);
  const std::size_t k2 = rng.pick(k1 + 1, t.dim - 1);
  const std::uint64_t cs = rng.next();
  t.chain = random_chain(t.dim, {k2}, cs);
  const Subspace q2 = t.chain.spaces[0];
  t.chain.spaces.insert(t.chain.spaces.begin(),
                        k1 == 0 ? Subspace::zero(t.dim)
                                : Subspace(q2.basis().leftCols(static_cast<Eigen::Index>(k1))));
  const Subspace &q1 = t.chain.spaces[0];
  t.y2 = witness(space, q2, Subspace::whole(t.dim), std::nullopt, tol);
  const Eigen::MatrixXd c = random_matrix(k2, 1, rng.next());
  t.y1_dir = q2.basis() * c.col(0);
  if (q1.contains(t.y1_dir, 1e-6))
    t.y1_dir += q2.basis().col(static_cast<Eigen::Index>(k2 - 1));
  return t;
}

inline AuditTrial kernel_identity_trial(const NormSpec &space, const AuditFamily &fam,
                                        std::uint64_t seed, const Tolerances &tol) {
  Rng rng(seed);
  const std::size_t n = rng.pick(std::max<std::size_t>(fam.dim_min, 2), fam.dim_max);
  const Eigen::MatrixXd m = random_matrix(n, 2, rng.next());
  const Eigen::VectorXd f = m.col(0);
  const Point x = 3.0 * m.col(1);
  const Subspace ker = kernel_subspace(f);
  AuditTrial t;
  t.seed = seed;
  t.config = {{"p", {space.p()}}, {"f", to_vec(f)}, {"x", to_vec(x)}};
  t.observed = distance(space, ker, x, tol).value;
  t.claimed = std::abs(f.dot(x)) / dual_norm(space, f);
  t.pass = near(t.observed, t.claimed, 1e-6);
  if (!t.pass)
    t.detail = "rho(x, ker f) differs from |f(x)|/||f||";
  return t;
}

inline AuditTrial two_point_in_context_trial(const NormSpec &space, const AuditFamily &fam,
                                             std::uint64_t seed, const Tolerances &tol) {
  Rng rng(seed);
  Triple tr = random_triple(space, fam, rng, 2, tol);
  const Subspace &q1 = tr.chain.spaces[0];
  const Subspace &q2 = tr.chain.spaces[1];
  const ZW zw = build_zw(space, q1, q2, tr.y2, tr.y1_dir, tol);
  const QSequenceLevel L = q_level(space, q1, zw.z, zw.w, tol);
  const TwoPointResult &r = L.two_point;
  AuditTrial t;
  t.seed = seed;
  t.config = {{"p", {space.p()}},
              {"dim", {static_cast<double>(tr.dim)}},
              {"Q1", to_vec(q1.basis())},
              {"Q2", to_vec(q2.basis())},
              {"z", to_vec(zw.z)},
              {"w", to_vec(zw.w)},
              {"delta", {L.delta}}};
  t.observed = r.achieved_dual_norm;
  t.claimed = r.norm_bound;
  const bool values = near(r.f(zw.w), 1.0, 1e-6) && near(r.f(zw.z), r.target_value, 1e-6);
  t.pass = r.feasible_at_norm && values;
  if (!t.pass)
    t.detail = values ? "claimed norm 1/rho(x1, Q) not attainable"
                      : "prescribed values not met";
  return t;
}

inline AuditTrial two_point_free_trial(const NormSpec &space, const AuditFamily &fam,
                                       std::uint64_t seed, std::size_t index,
                                       const Tolerances &tol) {
  Rng rng(seed);
  AuditTrial t;
  t.seed = seed;
  Point x1, x2;
  Subspace q;
  std::optional<double> delta;
  if (index == 0 && (fam.q_dim <= 0)) {
    // The documented configuration: Q = {0}, x1 = e1, x2 = e2, delta = 0.
    x1 = Point::Unit(2, 0);
    x2 = Point::Unit(2, 1);
    q = Subspace::zero(2);
    delta = 0.0;
  } else {
    const std::size_t n = rng.pick(std::max<std::size_t>(fam.dim_min, 2), fam.dim_max);
    const std::size_t k =
        fam.q_dim >= 0 ? static_cast<std::size_t>(fam.q_dim) : rng.pick(0, n - 2);
    const Eigen::MatrixXd m = random_matrix(n, k + 2, rng.next());
    q = Subspace(m.leftCols(static_cast<Eigen::Index>(k)));
    x1 = m.col(static_cast<Eigen::Index>(k));
    x2 = m.col(static_cast<Eigen::Index>(k + 1));
    if (rng.pick(0, 1))
      delta = rng.uniform(0.0, 2.0);
  }
  const TwoPointResult r = two_point_hahn_banach(space, q, x1, x2, delta, false, tol);
  t.config = {{"p", {space.p()}}, {"Q", to_vec(q.basis())}, {"x1", to_vec(x1)},
              {"x2", to_vec(x2)}, {"delta", {r.delta}}};
  t.observed = r.achieved_dual_norm;
  t.claimed = r.norm_bound;
  t.pass = r.feasible_at_norm;
  if (!t.pass)
    t.detail = "claimed norm 1/rho(x1, Q) not attainable";
  return t;
}

inline AuditTrial q_sequence_trial(const NormSpec &space, const AuditFamily &fam,
                                   std::uint64_t seed, const Tolerances &tol) {
  Rng rng(seed);
  Triple tr = random_triple(space, fam, rng, 2, tol);
  const Subspace &q1 = tr.chain.spaces[0];
  const Subspace &q2 = tr.chain.spaces[1];
  const ZW zw = build_zw(space, q1, q2, tr.y2, tr.y1_dir, tol);
  std::vector<std::pair<double, double>> pairs;
  const std::size_t m = rng.pick(2, 5);
  for (std::size_t i = 0; i < m; ++i) {
    const double v = rng.uniform(0.0, 2.0);
    pairs.emplace_back(v + rng.uniform(0.0, 1.0), v);
  }
  const QSequenceLevel L = q_sequence(space, q1, q2, zw.z, zw.w, pairs, tol);

  AuditTrial t;
  t.seed = seed;
  std::vector<double> us, vs;
  for (const auto &[u, v] : pairs) {
    us.push_back(u);
    vs.push_back(v);
  }
  t.config = {{"p", {space.p()}},     {"dim", {static_cast<double>(tr.dim)}},
              {"Q1", to_vec(q1.basis())}, {"Q2", to_vec(q2.basis())},
              {"z", to_vec(zw.z)},     {"w", to_vec(zw.w)},
              {"u", us},               {"v", vs}};
  std::string bad;
  double worst_obs = 0.0, worst_claim = 0.0;
  auto expect = [&](bool ok, const std::string &what, double obs, double claim) {
    if (!ok && bad.empty()) {
      bad = what;
      worst_obs = obs;
      worst_claim = claim;
    }
  };
  const double ct = 1e-6;
  const double rz1 = distance(space, q1, zw.z, tol).value;
  const double rz2 = distance(space, q2, zw.z, tol).value;
  const double nzw = norm(space, zw.z - zw.w);
  expect(std::abs(rz1 - 2.0) <= ct, "rho(z, Q1) = 2", rz1, 2.0);
  expect(std::abs(rz2 - 1.0) <= ct, "rho(z, Q2) = 1", rz2, 1.0);
  expect(std::abs(nzw - 1.0) <= ct, "||z - w|| = 1", nzw, 1.0);
  expect(L.delta >= 1.0 - ct && L.delta <= 3.0 / L.rho_w + ct, "delta in [1, 3/rho(w, Q1)]",
         L.delta, 3.0 / L.rho_w);
  for (const QEntry &e : L.entries) {
    const double a = distance(space, q1, e.q, tol).value;
    const double b = distance(space, q2, e.q, tol).value;
    expect(std::abs(a - e.u) <= ct, "rho(q_m, Q1) = u_m", a, e.u);
    expect(std::abs(b - e.v) <= ct, "rho(q_m, Q2) = v_m", b, e.v);
  }
  const double c = norm(space, zw.z) + 2.0;
  for (std::size_t i = 0; i < L.entries.size(); ++i)
    for (std::size_t j = i + 1; j < L.entries.size(); ++j) {
      const auto &a = L.entries[i];
      const auto &b = L.entries[j];
      const double diff = norm(space, a.q - b.q);
      const double bound = c * (std::max(a.u, b.u) - std::min(a.v, b.v));
      expect(diff <= bound + ct, "||q_m - q_n|| <= (||z|| + 2)(max u - min v)", diff, bound);
    }
  t.pass = bad.empty();
  t.detail = bad;
  t.observed = worst_obs;
  t.claimed = worst_claim;
  return t;
}

inline AuditTrial finite_trial(const NormSpec &space, const AuditFamily &fam,
                               std::uint64_t seed, const Tolerances &tol) {
  Rng rng(seed);
  const std::size_t n = rng.pick(std::max<std::size_t>(fam.dim_min, 3), fam.dim_max);
  const std::size_t links = rng.pick(1, n - 1);
  const std::size_t k0 = fam.q_dim >= 0 ? static_cast<std::size_t>(fam.q_dim) : rng.pick(0, 1);
  std::vector<std::size_t> dims;
  for (std::size_t i = 0; i < links; ++i)
    if (k0 + i > 0)
      dims.push_back(k0 + i);
  std::vector<Subspace> ys;
  if (k0 == 0)
    ys.push_back(Subspace::zero(n));
  if (!dims.empty())
    for (const auto &sp : random_chain(n, dims, rng.next()).spaces)
      ys.push_back(sp);
  std::vector<double> d;
  double cur = rng.uniform(1.0, 3.0);
  for (std::size_t i = 0; i < ys.size(); ++i) {
    d.push_back(cur);
    cur *= rng.uniform(0.2, 0.9);
  }
  const Point z = random_matrix(n, 1, rng.next()).col(0);
  const FiniteResult fr = finite_construct(space, ys, d, z, tol);

  AuditTrial t;
  t.seed = seed;
  t.config = {{"p", {space.p()}}, {"dim", {static_cast<double>(n)}}, {"d", d},
              {"z", to_vec(z)}};
  double worst = 0.0;
  for (std::size_t k = 0; k < ys.size(); ++k)
    worst = std::max(worst, std::abs(distance(space, ys[k], fr.x, tol).value - d[k]));
  const double member = fr.membership_residual / (1.0 + fr.x.norm());
  t.observed = worst;
  t.claimed = 0.0;
  t.pass = worst <= 1e-6 * (1.0 + d[0]) && member <= 1e-8 && fr.lambda > 0.0;
  if (!t.pass)
    t.detail = worst > 1e-6 * (1.0 + d[0]) ? "rho(x, Y_k) differs from d_k"
               : member > 1e-8              ? "x - lambda z not in Y_n"
                                            : "lambda not positive";
  return t;
}

} // namespace oracle_detail

/// Seed of trial `index` in an audit seeded with `seed`.
inline std::uint64_t audit_trial_seed(std::uint64_t seed, std::size_t index) {
  return oracle_detail::splitmix(seed ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
}

/// Rebuilds and evaluates one trial from its seed.
inline AuditTrial audit_trial(const std::string &lemma, const AuditFamily &fam,
                              std::uint64_t trial_seed, std::size_t index = 1,
                              const Tolerances &tol = {}) {
  const NormSpec space(fam.p);
  if (lemma == "kernel_identity")
    return oracle_detail::kernel_identity_trial(space, fam, trial_seed, tol);
  if (lemma == "two_point_in_context")
    return oracle_detail::two_point_in_context_trial(space, fam, trial_seed, tol);
  if (lemma == "two_point_free")
    return oracle_detail::two_point_free_trial(space, fam, trial_seed, index, tol);
  if (lemma == "q_sequence")
    return oracle_detail::q_sequence_trial(space, fam, trial_seed, tol);
  if (lemma == "finite")
    return oracle_detail::finite_trial(space, fam, trial_seed, tol);
  throw InvalidArgument("unknown lemma id: " + lemma);
}

/// Samples `trials` configurations and tabulates the lemma's conclusions.
/// Solver exceptions inside a trial count as failures.
inline AuditReport lemma_audit(const std::string &lemma, const AuditFamily &fam,
                               std::size_t trials, std::uint64_t seed,
                               const Tolerances &tol = {}) {
  const auto &ids = audit_ids();
  if (std::find(ids.begin(), ids.end(), lemma) == ids.end())
    throw InvalidArgument("unknown lemma id: " + lemma);
  if (trials < 1)
    throw InvalidArgument("audit needs at least one trial");
  AuditReport rep;
  rep.lemma = lemma;
  rep.trials = trials;
  for (std::size_t i = 0; i < trials; ++i) {
    const std::uint64_t s = audit_trial_seed(seed, i);
    AuditTrial t;
    try {
      t = audit_trial(lemma, fam, s, i, tol);
    } catch (const Error &e) {
      t.seed = s;
      t.pass = false;
      t.detail = std::string("solver error: ") + e.what();
    }
    if (t.pass)
      ++rep.passes;
    else
      rep.failures.push_back(std::move(t));
  }
  return rep;
}

} // namespace lethargy

#endif // LETHARGY_ORACLE_HPP
