#include "wtn/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <spdlog/sinks/stdout_sinks.h>

#include "text.hpp"
#include "wtn/errors.hpp"
#include "wtn/log.hpp"

namespace wtn {

spdlog::logger& logger() {
  static auto instance = [] {
    auto l = spdlog::stderr_logger_mt("wtn");
    l->set_pattern("[%l] %v");
    return l;
  }();
  return *instance;
}

namespace {

constexpr int kSynthYear = 2016;
constexpr std::string_view kHeader = "year,product,exporter,importer,value_usd";

bool flow_less(const TradeFlow& a, const TradeFlow& b) {
  return std::tie(a.product, a.importer, a.exporter) < std::tie(b.product, b.importer, b.exporter);
}

}  // namespace

MoneyTensor::MoneyTensor(int year, Registry registry, std::vector<TradeFlow> flows)
    : year_(year), registry_(std::move(registry)) {
  std::size_t self_trade = 0;
  for (const auto& f : flows) {
    if (f.product < 0 || f.product >= registry_.n_products() || f.importer < 0 ||
        f.importer >= registry_.n_countries() || f.exporter < 0 ||
        f.exporter >= registry_.n_countries())
      throw ValidationError("trade flow index outside registry bounds");
    if (!std::isfinite(f.value) || f.value < 0)
      throw ValidationError("trade flow value must be finite and nonnegative");
    if (f.importer == f.exporter) ++self_trade;
  }
  if (self_trade > 0) logger().warn("dropped {} self-trade record(s)", self_trade);

  std::erase_if(flows, [](const TradeFlow& f) { return f.importer == f.exporter; });
  std::stable_sort(flows.begin(), flows.end(), flow_less);
  // Duplicate triples are summed.
  for (auto& f : flows) {
    if (!flows_.empty() && !flow_less(flows_.back(), f)) {
      flows_.back().value += f.value;
    } else {
      flows_.push_back(f);
    }
  }
  std::erase_if(flows_, [](const TradeFlow& f) { return f.value == 0.0; });
}

double MoneyTensor::value(Index product, Index importer, Index exporter) const {
  const TradeFlow key{product, importer, exporter, 0.0};
  auto it = std::lower_bound(flows_.begin(), flows_.end(), key, flow_less);
  if (it == flows_.end() || flow_less(key, *it)) return 0.0;
  return it->value;
}

double MoneyTensor::total() const {
  double sum = 0.0;
  for (const auto& f : flows_) sum += f.value;
  return sum;
}

MoneyTensor MoneyTensor::scaled(const std::function<double(const TradeFlow&)>& factor) const {
  std::vector<TradeFlow> out = flows_;
  for (auto& f : out) f.value *= factor(f);
  return MoneyTensor(year_, registry_, std::move(out));
}

MoneyTensor load_money_tensor(const std::filesystem::path& path, int year,
                              const std::optional<Registry>& registry) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file " + path.string());

  struct Record {
    std::string product, exporter, importer;
    double value;
  };
  std::vector<Record> records;

  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (!seen_header) {
      if (text != kHeader)
        throw ParseError("expected header '" + std::string(kHeader) + "'", line_no);
      seen_header = true;
      continue;
    }
    const auto cols = detail::split(text, ',');
    if (cols.size() != 5)
      throw ParseError("expected 5 columns, found " + std::to_string(cols.size()), line_no);
    const auto row_year = detail::parse_double(cols[0]);
    if (!row_year || *row_year != std::floor(*row_year))
      throw ParseError("non-integer year '" + std::string(cols[0]) + "'", line_no);
    const auto value = detail::parse_double(cols[4]);
    if (!value || !std::isfinite(*value))
      throw ParseError("non-numeric value '" + std::string(cols[4]) + "'", line_no);
    if (*value < 0) throw ParseError("negative value", line_no);
    for (std::size_t k = 1; k <= 3; ++k)
      if (cols[k].empty()) throw ParseError("empty code in column " + std::to_string(k + 1), line_no);
    if (static_cast<int>(*row_year) != year) continue;
    records.push_back({std::string(cols[1]), std::string(cols[2]), std::string(cols[3]), *value});
  }
  if (!seen_header) throw ParseError("no records", 0);
  if (records.empty()) throw ParseError("no records for year " + std::to_string(year), 0);

  Registry reg;
  if (registry) {
    reg = *registry;
  } else {
    std::set<std::string> countries, products;
    for (const auto& r : records) {
      countries.insert(r.exporter);
      countries.insert(r.importer);
      products.insert(r.product);
    }
    reg = Registry({countries.begin(), countries.end()}, {products.begin(), products.end()});
  }

  std::vector<TradeFlow> flows;
  flows.reserve(records.size());
  for (const auto& r : records)
    flows.push_back({reg.require_product(r.product), reg.require_country(r.importer),
                     reg.require_country(r.exporter), r.value});
  return MoneyTensor(year, std::move(reg), std::move(flows));
}

int latest_year(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open input file " + path.string());
  std::string line;
  std::size_t line_no = 0;
  bool seen_header = false;
  std::optional<int> latest;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty() || text.front() == '#') continue;
    if (!seen_header) {
      if (text != kHeader)
        throw ParseError("expected header '" + std::string(kHeader) + "'", line_no);
      seen_header = true;
      continue;
    }
    const auto cols = detail::split(text, ',');
    const auto year = detail::parse_double(cols.front());
    if (!year || *year != std::floor(*year))
      throw ParseError("non-integer year '" + std::string(cols.front()) + "'", line_no);
    latest = std::max(latest.value_or(static_cast<int>(*year)), static_cast<int>(*year));
  }
  if (!latest) throw ParseError("no records", 0);
  return *latest;
}

void write_money_tensor(const MoneyTensor& tensor, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  const auto& reg = tensor.registry();
  out << kHeader << '\n';
  for (const auto& f : tensor.flows())
    out << tensor.year() << ',' << reg.product(f.product) << ',' << reg.country(f.exporter) << ','
        << reg.country(f.importer) << ',' << detail::format_double(f.value) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

MoneyTensor synth_tensor(std::uint64_t seed, Index n_countries, Index n_products, double density) {
  if (n_countries < 2) throw ArgumentError("synth_tensor: need at least 2 countries");
  if (n_countries > 26 * 26) throw ArgumentError("synth_tensor: at most 676 countries");
  if (n_products < 1 || n_products > 100) throw ArgumentError("synth_tensor: need 1..100 products");
  if (!(density > 0.0 && density <= 1.0)) throw ArgumentError("synth_tensor: density must be in (0,1]");

  std::vector<std::string> countries, products;
  for (Index c = 0; c < n_countries; ++c)
    countries.push_back({static_cast<char>('A' + c / 26), static_cast<char>('A' + c % 26)});
  for (Index p = 0; p < n_products; ++p)
    products.push_back({static_cast<char>('0' + p / 10), static_cast<char>('0' + p % 10)});

  // Raw engine output mapped to [0,1) by hand so the stream is identical across standard libraries.
  std::mt19937_64 engine(seed);
  auto uniform = [&engine] { return static_cast<double>(engine() >> 11) * 0x1.0p-53; };

  std::vector<TradeFlow> flows;
  for (Index p = 0; p < n_products; ++p)
    for (Index imp = 0; imp < n_countries; ++imp)
      for (Index exp = 0; exp < n_countries; ++exp) {
        if (imp == exp) continue;
        const double keep = uniform();
        const double magnitude = uniform();
        if (keep < density) flows.push_back({p, imp, exp, std::round(std::pow(10.0, 3.0 + 6.0 * magnitude))});
      }

  if (n_countries >= 3) {
    const auto dangling_country = static_cast<Index>(engine() % static_cast<std::uint64_t>(n_countries));
    const auto dangling_product = static_cast<Index>(engine() % static_cast<std::uint64_t>(n_products));
    std::erase_if(flows, [&](const TradeFlow& f) {
      return f.exporter == dangling_country && f.product == dangling_product;
    });
  }
  return MoneyTensor(kSynthYear, Registry(std::move(countries), std::move(products)), std::move(flows));
}

VolumeTable volumes(const MoneyTensor& tensor) {
  const auto& reg = tensor.registry();
  VolumeTable vt;
  vt.imports = RowMajorMatrix::Zero(reg.n_countries(), reg.n_products());
  vt.exports = RowMajorMatrix::Zero(reg.n_countries(), reg.n_products());
  for (const auto& f : tensor.flows()) {
    vt.imports(f.importer, f.product) += f.value;
    vt.exports(f.exporter, f.product) += f.value;
  }
  vt.country_imports = vt.imports.rowwise().sum();
  vt.country_exports = vt.exports.rowwise().sum();
  vt.product_imports = vt.imports.colwise().sum().transpose();
  vt.product_exports = vt.exports.colwise().sum().transpose();
  vt.total = vt.imports.sum();
  return vt;
}

HatRankTable hat_ranks(const VolumeTable& vt) {
  if (!(vt.total > 0)) throw DomainError("hat_ranks: total trade volume is zero");
  HatRankTable t;
  t.p = vt.node_imports() / vt.total;
  t.p_star = vt.node_exports() / vt.total;
  t.p_country = vt.country_imports / vt.total;
  t.p_star_country = vt.country_exports / vt.total;
  t.p_product = vt.product_imports / vt.total;
  t.p_star_product = vt.product_exports / vt.total;
  t.k = order_indices(t.p);
  t.k_star = order_indices(t.p_star);
  t.k_country = order_indices(t.p_country);
  t.k_star_country = order_indices(t.p_star_country);
  t.k_product = order_indices(t.p_product);
  t.k_star_product = order_indices(t.p_star_product);
  return t;
}

}  // namespace wtn
