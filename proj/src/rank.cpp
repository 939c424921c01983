#include "wtn/rank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace wtn {

Eigen::VectorXd trace(const Eigen::Ref<const Eigen::VectorXd>& node_values, TraceAxis axis,
                      const Registry& registry) {
  if (node_values.size() != registry.n_nodes())
    throw ArgumentError("trace: vector size does not match registry");
  // Country-major layout: row c of the (N_c x N_p) view holds country c's products.
  const Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
      grid(node_values.data(), registry.n_countries(), registry.n_products());
  if (axis == TraceAxis::country) return grid.rowwise().sum();
  return grid.colwise().sum().transpose();
}

RankIndex order_indices(const Eigen::Ref<const Eigen::VectorXd>& values) {
  const auto n = static_cast<std::size_t>(values.size());
  for (Index i = 0; i < values.size(); ++i)
    if (!std::isfinite(values[i])) throw ArgumentError("order_indices: non-finite entry");

  RankIndex index;
  index.order.resize(n);
  std::iota(index.order.begin(), index.order.end(), Index{0});
  std::stable_sort(index.order.begin(), index.order.end(),
                   [&values](Index a, Index b) { return values[a] > values[b]; });
  index.position.resize(n);
  for (std::size_t k = 0; k < n; ++k)
    index.position[static_cast<std::size_t>(index.order[k])] = static_cast<Index>(k);
  return index;
}

RankIndex local_order(const Eigen::Ref<const Eigen::VectorXd>& node_values, Index product,
                      const Registry& registry) {
  if (node_values.size() != registry.n_nodes())
    throw ArgumentError("local_order: vector size does not match registry");
  if (product < 0 || product >= registry.n_products())
    throw ArgumentError("local_order: product out of range");
  Eigen::VectorXd local(registry.n_countries());
  for (Index c = 0; c < registry.n_countries(); ++c) local[c] = node_values[registry.node(c, product)];
  return order_indices(local);
}

}  // namespace wtn
