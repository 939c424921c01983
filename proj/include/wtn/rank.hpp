#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <optional>
#include <vector>

#include "wtn/errors.hpp"
#include "wtn/registry.hpp"

namespace wtn {

struct PageRankOptions {
  double tol = 1e-12;
  std::size_t max_iter = 10000;
};

/// Stationary probability vector plus solver metadata.
template <typename Scalar>
struct BasicRankVector {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> probabilities;
  std::size_t iterations = 0;
  /// ||G P - P||_1 measured on the last iterate before the final step.
  Scalar residual = 0;
};
using RankVector = BasicRankVector<double>;

/// Permutation of ids sorted by decreasing probability, ties by ascending id.
struct RankIndex {
  std::vector<Index> order;     // order[k] = id at 0-based rank position k
  std::vector<Index> position;  // position[id] = 0-based rank position of id

  Index size() const { return static_cast<Index>(order.size()); }
  /// 1-based rank index K of an id, as printed in rank tables.
  Index rank_of(Index id) const { return position[static_cast<std::size_t>(id)] + 1; }
};

enum class TraceAxis { country, product };

namespace detail {

template <typename Scalar, typename MatVec>
BasicRankVector<Scalar> power_iterate(Index n, MatVec&& matvec, const PageRankOptions& opts,
                                      const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* start) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (!(opts.tol > 0)) throw ArgumentError("pagerank: tol must be positive");
  if (opts.max_iter < 1) throw ArgumentError("pagerank: max_iter must be >= 1");
  if (n == 0) throw ArgumentError("pagerank: empty matrix");

  Vector x;
  if (start != nullptr) {
    if (start->size() != n) throw ArgumentError("pagerank: start vector size mismatch");
    if ((start->array() < 0).any() || !(start->sum() > 0))
      throw ArgumentError("pagerank: start vector must be nonnegative with positive sum");
    x = *start / start->sum();
  } else {
    x = Vector::Constant(n, Scalar(1) / Scalar(n));
  }

  Scalar residual = 0;
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    Vector y = matvec(x);
    residual = (y - x).template lpNorm<1>();
    y /= y.sum();
    x.swap(y);
    if (residual < Scalar(opts.tol)) return {std::move(x), it, residual};
  }
  throw ConvergenceError("pagerank did not converge", static_cast<double>(residual),
                         opts.max_iter);
}

}  // namespace detail

/// Power iteration on a dense column-stochastic matrix.
template <typename Derived>
BasicRankVector<typename Derived::Scalar> pagerank(
    const Eigen::MatrixBase<Derived>& G, const PageRankOptions& opts = {},
    const Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1>* start = nullptr) {
  using Scalar = typename Derived::Scalar;
  if (G.rows() != G.cols()) throw ArgumentError("pagerank: matrix must be square");
  const auto& m = G.derived();
  return detail::power_iterate<Scalar>(
      G.rows(), [&m](const auto& x) { return Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(m * x); },
      opts, start);
}

/// Sums a node vector over products (country axis, length N_c) or over countries
/// (product axis, length N_p).
Eigen::VectorXd trace(const Eigen::Ref<const Eigen::VectorXd>& node_values, TraceAxis axis,
                      const Registry& registry);

/// Stable decreasing ordering; ties broken by ascending id.
RankIndex order_indices(const Eigen::Ref<const Eigen::VectorXd>& values);

/// Ordering of countries by their node value at a fixed product ("local" product ranking).
RankIndex local_order(const Eigen::Ref<const Eigen::VectorXd>& node_values, Index product,
                      const Registry& registry);

}  // namespace wtn
