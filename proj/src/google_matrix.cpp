#include "wtn/google_matrix.hpp"

#include <cmath>

#include "wtn/log.hpp"

namespace wtn {

template class BasicStochasticMatrix<double>;
template class BasicPersonalizationVector<double>;
template class BasicGoogleMatrix<double>;

StochasticMatrix build_stochastic(const MoneyTensor& tensor, Direction direction) {
  const auto& reg = tensor.registry();
  const Index n = reg.n_nodes();
  const VolumeTable vt = volumes(tensor);
  // Source volume of column (c', p): exports of c' (direct) or imports of c' (inverted).
  const Eigen::VectorXd source_volume =
      direction == Direction::direct ? vt.node_exports() : vt.node_imports();

  std::vector<Eigen::Triplet<double, Index>> triplets;
  triplets.reserve(tensor.flows().size());
  for (const auto& f : tensor.flows()) {
    const Index row_country = direction == Direction::direct ? f.importer : f.exporter;
    const Index col_country = direction == Direction::direct ? f.exporter : f.importer;
    const Index col = reg.node(col_country, f.product);
    triplets.emplace_back(reg.node(row_country, f.product), col, f.value / source_volume[col]);
  }
  StochasticMatrix::Sparse columns(n, n);
  columns.setFromTriplets(triplets.begin(), triplets.end());

  std::vector<bool> dangling(static_cast<std::size_t>(n));
  for (Index j = 0; j < n; ++j) dangling[static_cast<std::size_t>(j)] = source_volume[j] == 0.0;
  return StochasticMatrix(direction, std::move(columns), std::move(dangling));
}

PersonalizationVector personalization_volume(const MoneyTensor& tensor, Direction direction) {
  const auto& reg = tensor.registry();
  const VolumeTable vt = volumes(tensor);
  const RowMajorMatrix& vol = direction == Direction::direct ? vt.imports : vt.exports;
  const Eigen::VectorXd& country_total =
      direction == Direction::direct ? vt.country_imports : vt.country_exports;

  const auto n_c = static_cast<double>(reg.n_countries());
  Eigen::VectorXd v(reg.n_nodes());
  Index empty_countries = 0;
  for (Index c = 0; c < reg.n_countries(); ++c) {
    for (Index p = 0; p < reg.n_products(); ++p) {
      v[reg.node(c, p)] = country_total[c] > 0
                              ? vol(c, p) / (n_c * country_total[c])
                              : 1.0 / static_cast<double>(reg.n_nodes());
    }
    if (!(country_total[c] > 0)) ++empty_countries;
  }
  if (empty_countries > 0)
    logger().warn("{} country block(s) with zero {} volume set uniform in personalization",
                  empty_countries, direction == Direction::direct ? "import" : "export");
  return PersonalizationVector(std::move(v));
}

PersonalizationVector personalization_rank(const Eigen::Ref<const Eigen::VectorXd>& product_marginal,
                                           const Registry& registry) {
  if (product_marginal.size() != registry.n_products())
    throw ArgumentError("personalization_rank: marginal size does not match product count");
  if (!product_marginal.allFinite() || (product_marginal.array() < 0).any())
    throw ArgumentError("personalization_rank: marginal must be finite and nonnegative");
  if (std::abs(product_marginal.sum() - 1.0) > 1e-10)
    throw ArgumentError("personalization_rank: product marginal must sum to 1");

  Eigen::VectorXd v(registry.n_nodes());
  const auto n_c = static_cast<double>(registry.n_countries());
  for (Index c = 0; c < registry.n_countries(); ++c)
    v.segment(c * registry.n_products(), registry.n_products()) = product_marginal / n_c;
  return PersonalizationVector(std::move(v));
}

GoogleMatrix assemble_google(StochasticMatrix S, PersonalizationVector v, double alpha) {
  return GoogleMatrix(std::move(S), std::move(v), alpha);
}

WtnPair build_wtn_pair(const MoneyTensor& tensor, double alpha, const PageRankOptions& opts) {
  if (!(tensor.total() > 0)) throw DomainError("build_wtn_pair: total trade volume is zero");
  const auto& reg = tensor.registry();

  StochasticMatrix S = build_stochastic(tensor, Direction::direct);
  StochasticMatrix S_star = build_stochastic(tensor, Direction::inverted);

  const GoogleMatrix first(S, personalization_volume(tensor, Direction::direct), alpha);
  const GoogleMatrix first_star(S_star, personalization_volume(tensor, Direction::inverted), alpha);
  const RankVector P = pagerank(first, opts);
  const RankVector P_star = pagerank(first_star, opts);
  logger().debug("first iteration: PageRank {} iterations, CheiRank {} iterations", P.iterations,
                 P_star.iterations);

  const Eigen::VectorXd P_p = trace(P.probabilities, TraceAxis::product, reg);
  const Eigen::VectorXd P_star_p = trace(P_star.probabilities, TraceAxis::product, reg);

  return {GoogleMatrix(std::move(S), personalization_rank(P_p, reg), alpha),
          GoogleMatrix(std::move(S_star), personalization_rank(P_star_p, reg), alpha)};
}

}  // namespace wtn
