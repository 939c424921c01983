#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "wtn/rank.hpp"
#include "wtn/registry.hpp"

namespace wtn {

/// One bilateral flow: `exporter` sends product `product` worth `value` USD to `importer`.
struct TradeFlow {
  Index product = 0;
  Index importer = 0;
  Index exporter = 0;
  double value = 0.0;

  friend bool operator==(const TradeFlow&, const TradeFlow&) = default;
};

/// Per-product money matrices M^p_{importer, exporter}.
///
/// Flows are kept sorted by (product, importer, exporter), one entry per triple,
/// with strictly positive values. Self-trade is dropped on construction.
class MoneyTensor {
 public:
  MoneyTensor(int year, Registry registry, std::vector<TradeFlow> flows);

  int year() const { return year_; }
  const Registry& registry() const { return registry_; }
  const std::vector<TradeFlow>& flows() const { return flows_; }

  double value(Index product, Index importer, Index exporter) const;
  double total() const;

  /// Copy with every flow value multiplied by `factor(flow)`.
  MoneyTensor scaled(const std::function<double(const TradeFlow&)>& factor) const;

  friend bool operator==(const MoneyTensor& a, const MoneyTensor& b) {
    return a.year_ == b.year_ && a.registry_ == b.registry_ && a.flows_ == b.flows_;
  }

 private:
  int year_;
  Registry registry_;
  std::vector<TradeFlow> flows_;
};

using RowMajorMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Import/export volumes per (country, product); row c, column p.
struct VolumeTable {
  RowMajorMatrix imports;  // V^p_c
  RowMajorMatrix exports;  // V*^p_c
  Eigen::VectorXd country_imports;  // V_c
  Eigen::VectorXd country_exports;  // V*_c
  Eigen::VectorXd product_imports;
  Eigen::VectorXd product_exports;
  double total = 0.0;

  /// Node-indexed view (country-major) of the import/export volumes.
  Eigen::VectorXd node_imports() const { return imports.reshaped<Eigen::RowMajor>(); }
  Eigen::VectorXd node_exports() const { return exports.reshaped<Eigen::RowMajor>(); }
};

/// ImportRank / ExportRank probabilities and their traced variants and rank indices.
struct HatRankTable {
  Eigen::VectorXd p;       // ImportRank per node
  Eigen::VectorXd p_star;  // ExportRank per node
  Eigen::VectorXd p_country, p_star_country;
  Eigen::VectorXd p_product, p_star_product;
  RankIndex k, k_star, k_country, k_star_country, k_product, k_star_product;
};

/// Reads `year,product,exporter,importer,value_usd` records for `year`.
/// Without an explicit registry, codes are collected from the records and sorted.
MoneyTensor load_money_tensor(const std::filesystem::path& path, int year,
                              const std::optional<Registry>& registry = std::nullopt);

/// Largest year present in a trade CSV; throws ParseError("no records") for an empty file.
int latest_year(const std::filesystem::path& path);

/// Writes the tensor in the same CSV format load_money_tensor reads.
void write_money_tensor(const MoneyTensor& tensor, const std::filesystem::path& path);

/// Deterministic synthetic tensor with log-uniform values.
MoneyTensor synth_tensor(std::uint64_t seed, Index n_countries, Index n_products, double density);

VolumeTable volumes(const MoneyTensor& tensor);

HatRankTable hat_ranks(const VolumeTable& volumes);

}  // namespace wtn
