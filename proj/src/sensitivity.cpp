#include "wtn/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>

#include "text.hpp"
#include "wtn/errors.hpp"

namespace wtn {

namespace {

// delta = 0 is the identity shock and yields a zero derivative.
void check_delta(double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) throw ArgumentError("delta must satisfy 0 <= delta < 1");
}

struct BalancePoint {
  Eigen::VectorXd balance, p, p_star;
};

/// Central differences of `evaluate` at delta and delta/2, plus the baseline point.
SensitivityReport differentiate(const std::function<BalancePoint(double)>& evaluate, double delta) {
  SensitivityReport report;
  const BalancePoint base = evaluate(0.0);
  report.balance = base.balance;
  report.p = base.p;
  report.p_star = base.p_star;
  auto central = [&](double h) {
    if (h == 0.0) return Eigen::VectorXd(Eigen::VectorXd::Zero(base.balance.size()));
    return Eigen::VectorXd((evaluate(h).balance - evaluate(-h).balance) / (2.0 * h));
  };
  report.derivative = central(delta);
  report.derivative_half = central(delta / 2.0);
  report.richardson_error = (report.derivative - report.derivative_half).cwiseAbs() / 3.0;
  report.delta = delta;
  return report;
}

std::vector<std::string> group_codes(const std::vector<Index>& group, const Registry& registry) {
  std::vector<std::string> codes;
  for (Index c : group) codes.push_back(registry.country(c));
  return codes;
}

}  // namespace

void validate(const ShockSpec& spec, const Registry& registry) {
  if (spec.group.empty()) throw ArgumentError("shock group is empty");
  if (spec.source_country < 0 || spec.source_country >= registry.n_countries())
    throw ArgumentError("shock source country out of range");
  if (spec.source_product < 0 || spec.source_product >= registry.n_products())
    throw ArgumentError("shock source product out of range");
  std::vector<Index> sorted = spec.group;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw ArgumentError("shock group countries must be distinct");
  for (Index c : sorted) {
    if (c < 0 || c >= registry.n_countries()) throw ArgumentError("shock group country out of range");
    if (c == spec.source_country) throw ArgumentError("shock source country must not be in the group");
  }
  check_delta(spec.delta);
}

Selection shock_selection(const ShockSpec& spec, const Registry& registry) {
  std::vector<Index> nodes;
  nodes.reserve(spec.group.size() * static_cast<std::size_t>(registry.n_products()) + 1);
  for (Index c : spec.group)
    for (Index p = 0; p < registry.n_products(); ++p) nodes.push_back(registry.node(c, p));
  nodes.push_back(registry.node(spec.source_country, spec.source_product));
  return Selection(std::move(nodes), registry.n_nodes());
}

ShockBaseline shock_baseline(const MoneyTensor& tensor, double alpha, const ShockSpec& spec,
                             const ReduceOptions& reduce_opts, const PageRankOptions& rank_opts) {
  validate(spec, tensor.registry());
  const WtnPair pair = build_wtn_pair(tensor, alpha, rank_opts);
  Selection sel = shock_selection(spec, tensor.registry());
  ReducedSet direct = reduce(pair.direct, sel, reduce_opts);
  ReducedSet inverted = reduce(pair.inverted, sel, reduce_opts);
  return {std::move(sel), std::move(direct), std::move(inverted)};
}

ShockedPair apply_shock(const Eigen::MatrixXd& direct, const Eigen::MatrixXd& inverted,
                        Index source_position, double delta) {
  const Index n = direct.rows();
  if (direct.cols() != n || inverted.rows() != n || inverted.cols() != n)
    throw ArgumentError("apply_shock: reduced matrices must be square and of equal size");
  if (source_position < 0 || source_position >= n)
    throw ArgumentError("apply_shock: source position out of range");
  if (!(1.0 + delta > 0.0)) throw ArgumentError("apply_shock: 1 + delta must be positive");

  ShockedPair out{direct, inverted};
  if (delta == 0.0) return out;
  const double factor = 1.0 + delta;

  auto source_col = out.direct.col(source_position);
  for (Index i = 0; i < n; ++i)
    if (i != source_position) source_col[i] *= factor;
  source_col /= source_col.sum();

  for (Index j = 0; j < n; ++j) {
    if (j == source_position) continue;
    out.inverted(source_position, j) *= factor;
    out.inverted.col(j) /= out.inverted.col(j).sum();
  }
  return out;
}

ShockedPair build_shock_matrices(const MoneyTensor& tensor, double alpha, const ShockSpec& spec,
                                 double delta, const ReduceOptions& reduce_opts) {
  const ShockBaseline baseline = shock_baseline(tensor, alpha, spec, reduce_opts);
  return apply_shock(baseline.direct.G_R, baseline.inverted.G_R, baseline.selection.size() - 1,
                     delta);
}

Eigen::VectorXd balance(const Eigen::Ref<const Eigen::VectorXd>& p_star,
                        const Eigen::Ref<const Eigen::VectorXd>& p) {
  if (p_star.size() != p.size()) throw ArgumentError("balance: marginal sizes differ");
  if ((p_star.array() < 0).any() || (p.array() < 0).any())
    throw ArgumentError("balance: marginals must be nonnegative");
  Eigen::VectorXd b(p.size());
  for (Index c = 0; c < p.size(); ++c) {
    const double denom = p_star[c] + p[c];
    if (!(denom > 0))
      throw DomainError("balance undefined for entry " + std::to_string(c) + ": P*_c + P_c = 0");
    b[c] = (p_star[c] - p[c]) / denom;
  }
  return b;
}

std::string to_string(SensitivityMethod method) {
  switch (method) {
    case SensitivityMethod::regomax: return "regomax";
    case SensitivityMethod::hat: return "hat";
    case SensitivityMethod::global_price: return "global-price";
  }
  return "unknown";
}

SensitivityReport reduced_balance_sensitivity(const ShockBaseline& baseline, const Registry& registry,
                                              const ShockSpec& spec,
                                              const PageRankOptions& rank_opts) {
  validate(spec, registry);
  const Index n_p = registry.n_products();
  const auto n_group = static_cast<Index>(spec.group.size());
  const Index source_position = baseline.selection.size() - 1;
  if (baseline.selection.size() != n_group * n_p + 1)
    throw ArgumentError("reduced_balance_sensitivity: baseline does not match shock spec");

  auto group_marginal = [&](const Eigen::VectorXd& reduced_rank) {
    Eigen::VectorXd m(n_group);
    for (Index g = 0; g < n_group; ++g) m[g] = reduced_rank.segment(g * n_p, n_p).sum();
    return m;
  };
  auto evaluate = [&](double d) {
    const ShockedPair shocked =
        apply_shock(baseline.direct.G_R, baseline.inverted.G_R, source_position, d);
    BalancePoint point;
    point.p = group_marginal(pagerank(shocked.direct, rank_opts).probabilities);
    point.p_star = group_marginal(pagerank(shocked.inverted, rank_opts).probabilities);
    point.balance = balance(point.p_star, point.p);
    return point;
  };

  SensitivityReport report = differentiate(evaluate, spec.delta);
  report.method = SensitivityMethod::regomax;
  report.countries = group_codes(spec.group, registry);
  report.source = registry.node_label(registry.node(spec.source_country, spec.source_product));
  return report;
}

SensitivityReport reduced_balance_sensitivity(const MoneyTensor& tensor, double alpha,
                                              const ShockSpec& spec,
                                              const ReduceOptions& reduce_opts,
                                              const PageRankOptions& rank_opts) {
  const ShockBaseline baseline = shock_baseline(tensor, alpha, spec, reduce_opts, rank_opts);
  return reduced_balance_sensitivity(baseline, tensor.registry(), spec, rank_opts);
}

SensitivityReport hat_balance_sensitivity(const MoneyTensor& tensor, const ShockSpec& spec) {
  const auto& reg = tensor.registry();
  validate(spec, reg);
  std::vector<char> in_group(static_cast<std::size_t>(reg.n_countries()), 0);
  for (Index c : spec.group) in_group[static_cast<std::size_t>(c)] = 1;

  auto evaluate = [&](double d) {
    const MoneyTensor shocked = tensor.scaled([&](const TradeFlow& f) {
      return f.exporter == spec.source_country && f.product == spec.source_product &&
                     in_group[static_cast<std::size_t>(f.importer)]
                 ? 1.0 + d
                 : 1.0;
    });
    const VolumeTable vol = volumes(shocked);
    const HatRankTable hat = hat_ranks(vol);
    BalancePoint point;
    const auto n_group = static_cast<Index>(spec.group.size());
    point.p.resize(n_group);
    point.p_star.resize(n_group);
    Eigen::VectorXd imports(n_group), exports(n_group);
    for (Index g = 0; g < n_group; ++g) {
      const Index c = spec.group[static_cast<std::size_t>(g)];
      point.p[g] = hat.p_country[c];
      point.p_star[g] = hat.p_star_country[c];
      imports[g] = vol.country_imports[c];
      exports[g] = vol.country_exports[c];
    }
    // The common 1/V factor cancels; raw volumes keep untouched countries bit-identical.
    point.balance = balance(exports, imports);
    return point;
  };

  SensitivityReport report = differentiate(evaluate, spec.delta);
  report.method = SensitivityMethod::hat;
  report.countries = group_codes(spec.group, reg);
  report.source = reg.node_label(reg.node(spec.source_country, spec.source_product));
  return report;
}

SensitivityReport global_price_sensitivity(const MoneyTensor& tensor, double alpha, Index product,
                                           const std::vector<Index>& group, double delta,
                                           const PageRankOptions& rank_opts) {
  const auto& reg = tensor.registry();
  if (product < 0 || product >= reg.n_products())
    throw ArgumentError("global_price_sensitivity: product out of range");
  if (group.empty()) throw ArgumentError("global_price_sensitivity: group is empty");
  for (Index c : group)
    if (c < 0 || c >= reg.n_countries())
      throw ArgumentError("global_price_sensitivity: group country out of range");
  check_delta(delta);

  auto evaluate = [&](double d) {
    const MoneyTensor shocked =
        tensor.scaled([&](const TradeFlow& f) { return f.product == product ? 1.0 + d : 1.0; });
    const WtnPair pair = build_wtn_pair(shocked, alpha, rank_opts);
    const Eigen::VectorXd p_c = trace(pagerank(pair.direct, rank_opts).probabilities,
                                      TraceAxis::country, reg);
    const Eigen::VectorXd p_star_c = trace(pagerank(pair.inverted, rank_opts).probabilities,
                                           TraceAxis::country, reg);
    BalancePoint point;
    point.p.resize(static_cast<Index>(group.size()));
    point.p_star.resize(point.p.size());
    for (std::size_t g = 0; g < group.size(); ++g) {
      point.p[static_cast<Index>(g)] = p_c[group[g]];
      point.p_star[static_cast<Index>(g)] = p_star_c[group[g]];
    }
    point.balance = balance(point.p_star, point.p);
    return point;
  };

  SensitivityReport report = differentiate(evaluate, delta);
  report.method = SensitivityMethod::global_price;
  report.countries = group_codes(group, reg);
  report.source = "*:" + reg.product(product);
  return report;
}

void write_report_csv(const SensitivityReport& report, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "country,balance,dB_ddelta,method,source,delta\n";
  for (std::size_t g = 0; g < report.countries.size(); ++g) {
    const auto k = static_cast<Index>(g);
    out << report.countries[g] << ',' << detail::format_double(report.balance[k]) << ','
        << detail::format_double(report.derivative[k]) << ',' << to_string(report.method) << ','
        << report.source << ',' << detail::format_double(report.delta) << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace wtn
