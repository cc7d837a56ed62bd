#ifndef LETHARGY_SIMPLEX_HPP
#define LETHARGY_SIMPLEX_HPP

#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace lethargy::lp {

/// min c^T x  subject to  A x = b, x >= 0.
struct Problem {
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

enum class Status { Optimal, Infeasible, Unbounded, IterationLimit };

struct Solution {
  Status status = Status::IterationLimit;
  Eigen::VectorXd x; ///< primal solution
  Eigen::VectorXd y; ///< dual solution, A^T y <= c, b^T y = c^T x at optimum
  double objective = 0.0;
  int iterations = 0;
};

namespace detail {

class Tableau {
public:
  Tableau(const Problem &prob, double eps)
      : m_(prob.A.rows()), n_(prob.A.cols()), eps_(eps),
        T_(Eigen::MatrixXd::Zero(m_ + 1, n_ + m_ + 1)), basis_(m_),
        active_(m_, true) {
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double sgn = prob.b(i) < 0.0 ? -1.0 : 1.0;
      T_.row(i).head(n_) = sgn * prob.A.row(i);
      T_(i, n_ + i) = 1.0;
      T_(i, rhs()) = sgn * prob.b(i);
      basis_[i] = n_ + i;
    }
  }

  Eigen::Index rhs() const { return n_ + m_; }

  void set_objective(const Eigen::VectorXd &cost) {
    T_.row(m_).setZero();
    T_.row(m_).head(cost.size()) = cost.transpose();
    for (Eigen::Index i = 0; i < m_; ++i) {
      const double cb = basis_[i] < cost.size() ? cost(basis_[i]) : 0.0;
      if (cb != 0.0)
        T_.row(m_) -= cb * T_.row(i);
    }
  }

  /// Bland's rule simplex over columns [0, ncols).
  ///
  /// A column without a pivot row whose reduced cost is negative only at
  /// rounding level (free variables split into +/- pairs produce these) is
  /// skipped instead of reported as an unbounded ray.
  Status run(Eigen::Index ncols, int max_iter, int &iters) {
    const double ray_tol = 1e-8 * (1.0 + T_.row(m_).head(ncols).cwiseAbs().maxCoeff());
    while (iters < max_iter) {
      Eigen::Index enter = -1, leave = -1;
      for (Eigen::Index j = 0; j < ncols; ++j) {
        if (T_(m_, j) >= -eps_)
          continue;
        leave = ratio_test(j);
        if (leave >= 0) {
          enter = j;
          break;
        }
        if (T_(m_, j) < -ray_tol)
          return Status::Unbounded;
      }
      if (enter < 0)
        return Status::Optimal;
      pivot(leave, enter);
      ++iters;
    }
    return Status::IterationLimit;
  }

  Eigen::Index ratio_test(Eigen::Index enter) const {
    Eigen::Index leave = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (!active_[i] || T_(i, enter) <= eps_)
        continue;
      const double ratio = T_(i, rhs()) / T_(i, enter);
      const bool tie = leave >= 0 && ratio <= best + eps_;
      if (leave < 0 || ratio < best - eps_ || (tie && basis_[i] < basis_[leave])) {
        leave = i;
        best = std::min(best, ratio);
      }
    }
    return leave;
  }

  void pivot(Eigen::Index r, Eigen::Index c) {
    T_.row(r) /= T_(r, c);
    for (Eigen::Index i = 0; i <= m_; ++i)
      if (i != r && T_(i, c) != 0.0)
        T_.row(i) -= T_(i, c) * T_.row(r);
    basis_[r] = c;
  }

  /// Pivot remaining artificial variables out of the basis; rows where that
  /// is impossible are linearly dependent and get deactivated.
  void expel_artificials() {
    for (Eigen::Index i = 0; i < m_; ++i) {
      if (basis_[i] < n_)
        continue;
      Eigen::Index col = -1;
      double best = eps_ * 100.0;
      for (Eigen::Index j = 0; j < n_; ++j)
        if (std::abs(T_(i, j)) > best) {
          best = std::abs(T_(i, j));
          col = j;
        }
      if (col >= 0)
        pivot(i, col);
      else
        active_[i] = false;
    }
  }

  double objective_value() const { return -T_(m_, rhs()); }
  const std::vector<Eigen::Index> &basis() const { return basis_; }
  const std::vector<bool> &active() const { return active_; }

private:
  Eigen::Index m_, n_;
  double eps_;
  Eigen::MatrixXd T_;
  std::vector<Eigen::Index> basis_;
  std::vector<bool> active_;
};

} // namespace detail

/// Dense two-phase simplex with Bland's anti-cycling rule. Primal and dual
/// values are recomputed from the final basis with an LU solve.
inline Solution solve(const Problem &prob, double eps = 1e-11,
                      int max_iter = 20000) {
  const Eigen::Index m = prob.A.rows();
  const Eigen::Index n = prob.A.cols();
  Solution sol;
  detail::Tableau tab(prob, eps);

  Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
  phase1.tail(m).setOnes();
  tab.set_objective(phase1);
  sol.status = tab.run(n + m, max_iter, sol.iterations);
  if (sol.status != Status::Optimal)
    return sol;
  const double scale = 1.0 + prob.b.cwiseAbs().maxCoeff();
  if (tab.objective_value() > 1e-9 * scale) {
    sol.status = Status::Infeasible;
    return sol;
  }
  tab.expel_artificials();

  tab.set_objective(prob.c);
  sol.status = tab.run(n, max_iter, sol.iterations);
  if (sol.status != Status::Optimal)
    return sol;

  std::vector<Eigen::Index> rows, cols;
  for (Eigen::Index i = 0; i < m; ++i)
    if (tab.active()[i]) {
      rows.push_back(i);
      cols.push_back(tab.basis()[i]);
    }
  const auto k = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd B(k, k);
  Eigen::VectorXd bb(k), cb(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    bb(i) = prob.b(rows[i]);
    cb(i) = prob.c(cols[i]);
    for (Eigen::Index j = 0; j < k; ++j)
      B(i, j) = prob.A(rows[i], cols[j]);
  }
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  const Eigen::VectorXd xb = lu.solve(bb);
  const Eigen::VectorXd yk = lu.transpose().solve(cb);

  sol.x = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 0; j < k; ++j)
    sol.x(cols[j]) = std::max(0.0, xb(j));
  sol.y = Eigen::VectorXd::Zero(m);
  for (Eigen::Index i = 0; i < k; ++i)
    sol.y(rows[i]) = yk(i);
  sol.objective = prob.c.dot(sol.x);
  return sol;
}

} // namespace lethargy::lp

#endif // LETHARGY_SIMPLEX_HPP
