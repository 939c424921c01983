#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace wtn {

using Index = Eigen::Index;

/// Ordered country (ISO alpha-2) and product (2-digit SITC) codes.
///
/// Nodes are (country, product) pairs laid out country-major:
/// node = country * n_products + product, all indices 0-based.
class Registry {
 public:
  Registry() = default;
  Registry(std::vector<std::string> countries, std::vector<std::string> products);

  /// Reads a registry file with `[countries]` and `[products]` sections, one code per line.
  static Registry from_file(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;

  Index n_countries() const { return static_cast<Index>(countries_.size()); }
  Index n_products() const { return static_cast<Index>(products_.size()); }
  Index n_nodes() const { return n_countries() * n_products(); }

  Index node(Index country, Index product) const { return country * n_products() + product; }
  Index country_of(Index node) const { return node / n_products(); }
  Index product_of(Index node) const { return node % n_products(); }

  std::optional<Index> country_index(std::string_view code) const;
  std::optional<Index> product_index(std::string_view code) const;
  /// Like country_index but throws ValidationError for unknown codes.
  Index require_country(std::string_view code) const;
  Index require_product(std::string_view code) const;

  const std::vector<std::string>& countries() const { return countries_; }
  const std::vector<std::string>& products() const { return products_; }
  const std::string& country(Index c) const { return countries_[static_cast<std::size_t>(c)]; }
  const std::string& product(Index p) const { return products_[static_cast<std::size_t>(p)]; }

  /// "country:product", e.g. "RU:33".
  std::string node_label(Index node) const;

  friend bool operator==(const Registry& a, const Registry& b) {
    return a.countries_ == b.countries_ && a.products_ == b.products_;
  }

 private:
  std::vector<std::string> countries_;
  std::vector<std::string> products_;
  std::unordered_map<std::string, Index> country_lookup_;
  std::unordered_map<std::string, Index> product_lookup_;
};

}  // namespace wtn
