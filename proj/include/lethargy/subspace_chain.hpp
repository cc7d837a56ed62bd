#ifndef LETHARGY_SUBSPACE_CHAIN_HPP
#define LETHARGY_SUBSPACE_CHAIN_HPP

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lethargy/distance_engine.hpp"
#include "lethargy/error.hpp"
#include "lethargy/normed_space.hpp"
#include "lethargy/subspace.hpp"

namespace lethargy {

/// Strictly increasing subspaces Y_1 < Y_2 < ... < Y_m of R^dim.
///
/// `witnesses[j]`, when present, is an element of Y_{j+2} realising its norm
/// as distance to Y_{j+1} (0-based storage of the 1-based math).
struct Chain {
  std::size_t ambient_dim = 0;
  std::vector<Subspace> spaces;
  std::vector<Point> witnesses;

  std::size_t size() const { return spaces.size(); }
  const Subspace &operator[](std::size_t j) const { return spaces.at(j); }
};

struct ChainIssue {
  std::size_t link; ///< 1-based index of the offending subspace
  std::string message;
};

struct ChainReport {
  bool ok = true;
  std::vector<std::size_t> dims;
  std::vector<ChainIssue> issues;
};

/// Structural checks plus witness checks when witnesses are supplied.
inline ChainReport validate_chain(const NormSpec &space, const Chain &chain,
                                  const Tolerances &tol = {}) {
  ChainReport rep;
  auto fail = [&](std::size_t link, std::string msg) {
    rep.ok = false;
    rep.issues.push_back({link, std::move(msg)});
  };
  if (chain.spaces.empty())
    fail(0, "chain is empty");
  try {
    space.check_dim(chain.ambient_dim);
  } catch (const DimensionMismatch &e) {
    fail(0, e.what());
  }
  for (std::size_t j = 0; j < chain.size(); ++j) {
    const Subspace &y = chain[j];
    rep.dims.push_back(y.dim());
    if (y.ambient_dim() != chain.ambient_dim) {
      fail(j + 1, "basis vectors have the wrong dimension");
      continue;
    }
    if (!y.independent())
      fail(j + 1, "basis vectors are linearly dependent");
    if (j == 0)
      continue;
    const Subspace &prev = chain[j - 1];
    if (prev.ambient_dim() != chain.ambient_dim)
      continue;
    if (y.dim() <= prev.dim())
      fail(j + 1, "dimension does not strictly increase");
    for (Eigen::Index c = 0; c < prev.basis().cols(); ++c)
      if (!y.contains(prev.basis().col(c), 1e-10)) {
        fail(j + 1, "does not contain the previous subspace");
        break;
      }
  }
  if (!rep.ok)
    return rep;
  for (std::size_t j = 0; j < chain.witnesses.size(); ++j) {
    if (j + 1 >= chain.size()) {
      fail(j + 1, "witness beyond the last link");
      break;
    }
    const Point &w = chain.witnesses[j];
    if (w.size() != static_cast<Eigen::Index>(chain.ambient_dim)) {
      fail(j + 1, "witness has the wrong dimension");
      continue;
    }
    if (!chain[j + 1].contains(w, 1e-9))
      fail(j + 1, "witness not in the next subspace");
    const double nw = norm(space, w);
    const double d = distance(space, chain[j], w, tol).value;
    if (!(d > 0.0) || std::abs(d - nw) > tol.verify * (1.0 + nw))
      fail(j + 1, "witness distance does not equal its norm");
  }
  return rep;
}

/// Basis column of `hi` farthest (Euclidean) from `lo`.
inline Point completion_vector(const Subspace &lo, const Subspace &hi) {
  Eigen::Index best = -1;
  double best_r = 0.0;
  for (Eigen::Index c = 0; c < hi.basis().cols(); ++c) {
    const double r = lo.residual(hi.basis().col(c));
    if (r > best_r * (1.0 + 1e-12)) {
      best_r = r;
      best = c;
    }
  }
  if (best < 0 || best_r <= 1e-12 * (1.0 + hi.basis().norm()))
    throw InvalidArgument("no completion vector: subspaces are not nested strictly");
  return hi.basis().col(best);
}

/// y in hi with rho(y, lo) = ||y||: x minus a nearest point of lo.
inline Point witness(const NormSpec &space, const Subspace &lo,
                     const Subspace &hi,
                     const std::optional<Point> &completion = std::nullopt,
                     const Tolerances &tol = {}) {
  if (lo.dim() >= hi.dim())
    throw InvalidArgument("witness needs lo strictly inside hi");
  for (Eigen::Index c = 0; c < lo.basis().cols(); ++c)
    if (!hi.contains(lo.basis().col(c), 1e-9))
      throw InvalidArgument("witness needs lo contained in hi");
  Point x = completion ? *completion : completion_vector(lo, hi);
  if (!hi.contains(x, 1e-9) || lo.contains(x, 1e-12))
    throw InvalidArgument("completion vector must lie in hi but not in lo");
  return x - distance(space, lo, x, tol).minimizer;
}

/// Deterministic uniform(-1, 1) entries from a 64-bit Mersenne twister.
inline Eigen::MatrixXd random_matrix(std::size_t rows, std::size_t cols,
                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows),
                    static_cast<Eigen::Index>(cols));
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      m(i, j) = 2.0 * static_cast<double>(rng() >> 11) * 0x1.0p-53 - 1.0;
  return m;
}

/// Random nested chain: orthonormalised random matrix, leading-column prefixes.
inline Chain random_chain(std::size_t dim, const std::vector<std::size_t> &dims,
                          std::uint64_t seed) {
  if (dims.empty())
    throw InvalidArgument("random chain needs at least one dimension");
  for (std::size_t j = 0; j < dims.size(); ++j) {
    if (dims[j] > dim)
      throw InvalidArgument("subspace dimension exceeds ambient dimension");
    if (j > 0 && dims[j] <= dims[j - 1])
      throw InvalidArgument("chain dimensions must strictly increase");
  }
  const Eigen::MatrixXd raw = random_matrix(dim, dim, seed);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(raw);
  const Eigen::MatrixXd q = qr.householderQ();
  Chain chain;
  chain.ambient_dim = dim;
  for (std::size_t k : dims)
    chain.spaces.emplace_back(q.leftCols(static_cast<Eigen::Index>(k)));
  return chain;
}

/// Chain from explicit per-subspace bases.
inline Chain explicit_chain(std::size_t dim,
                            const std::vector<Eigen::MatrixXd> &bases) {
  Chain chain;
  chain.ambient_dim = dim;
  for (const auto &b : bases)
    chain.spaces.emplace_back(b);
  return chain;
}

} // namespace lethargy

#endif // LETHARGY_SUBSPACE_CHAIN_HPP
