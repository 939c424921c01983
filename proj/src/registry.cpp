#include "wtn/registry.hpp"

#include <fstream>

#include "text.hpp"
#include "wtn/errors.hpp"

namespace wtn {

namespace {

std::unordered_map<std::string, Index> build_lookup(const std::vector<std::string>& codes,
                                                    const char* kind) {
  std::unordered_map<std::string, Index> lookup;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (codes[i].empty()) throw ValidationError(std::string("empty ") + kind + " code");
    if (!lookup.emplace(codes[i], static_cast<Index>(i)).second)
      throw ValidationError(std::string("duplicate ") + kind + " code '" + codes[i] + "'");
  }
  return lookup;
}

}  // namespace

Registry::Registry(std::vector<std::string> countries, std::vector<std::string> products)
    : countries_(std::move(countries)),
      products_(std::move(products)),
      country_lookup_(build_lookup(countries_, "country")),
      product_lookup_(build_lookup(products_, "product")) {}

Registry Registry::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open registry file " + path.string());

  std::vector<std::string> countries, products;
  std::vector<std::string>* section = nullptr;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (text == "[countries]") {
      section = &countries;
    } else if (text == "[products]") {
      section = &products;
    } else if (section == nullptr) {
      throw ParseError("code outside of a [countries]/[products] section", line_no);
    } else {
      section->emplace_back(text);
    }
  }
  if (countries.empty() || products.empty())
    throw ParseError("registry needs nonempty [countries] and [products] sections", 0);
  return Registry(std::move(countries), std::move(products));
}

void Registry::write(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write registry file " + path.string());
  out << "[countries]\n";
  for (const auto& c : countries_) out << c << '\n';
  out << "[products]\n";
  for (const auto& p : products_) out << p << '\n';
}

std::optional<Index> Registry::country_index(std::string_view code) const {
  auto it = country_lookup_.find(std::string(code));
  if (it == country_lookup_.end()) return std::nullopt;
  return it->second;
}

std::optional<Index> Registry::product_index(std::string_view code) const {
  auto it = product_lookup_.find(std::string(code));
  if (it == product_lookup_.end()) return std::nullopt;
  return it->second;
}

Index Registry::require_country(std::string_view code) const {
  if (auto c = country_index(code)) return *c;
  throw ValidationError("unknown country code '" + std::string(code) + "'");
}

Index Registry::require_product(std::string_view code) const {
  if (auto p = product_index(code)) return *p;
  throw ValidationError("unknown product code '" + std::string(code) + "'");
}

std::string Registry::node_label(Index node) const {
  return country(country_of(node)) + ":" + product(product_of(node));
}

}  // namespace wtn
