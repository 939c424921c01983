#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "wtn/errors.hpp"
#include "wtn/ingest.hpp"
#include "wtn/log.hpp"
#include "wtn/matrix_io.hpp"
#include "wtn/netexport.hpp"

namespace wtn::cli {

namespace {

MoneyTensor load_input(const RunConfig& config) {
  std::optional<Registry> registry;
  if (config.registry) registry = Registry::from_file(*config.registry);
  const int year = config.year ? *config.year : latest_year(config.input);
  MoneyTensor tensor = load_money_tensor(config.input, year, registry);
  logger().info("loaded {} flows for {} ({} countries x {} products)", tensor.flows().size(), year,
                tensor.registry().n_countries(), tensor.registry().n_products());
  return tensor;
}

void prepare_out_dir(const RunConfig& config) {
  std::error_code ec;
  std::filesystem::create_directories(config.out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + config.out_dir.string());
}

PageRankOptions rank_options(const RunConfig& config) { return {config.tol, PageRankOptions{}.max_iter}; }

ReduceOptions reduce_options(const RunConfig& config) {
  ReduceOptions opts;
  opts.series_tol = config.series_tol;
  return opts;
}

ShockSpec shock_spec(const RunConfig& config, const Registry& registry) {
  if (config.group.empty()) throw ArgumentError("--group is required");
  if (config.source_country.empty()) throw ArgumentError("--source-country is required");
  if (config.source_product.empty()) throw ArgumentError("--source-product is required");
  ShockSpec spec;
  spec.source_country = registry.require_country(config.source_country);
  spec.source_product = registry.require_product(config.source_product);
  for (const auto& code : config.group) spec.group.push_back(registry.require_country(code));
  spec.delta = config.delta;
  validate(spec, registry);
  return spec;
}

Selection make_selection(const RunConfig& config, const Registry& registry) {
  if (config.selection == SelectionKind::all) return Selection::all(registry.n_nodes());
  const ShockSpec spec = shock_spec(config, registry);
  if (config.selection == SelectionKind::group) return shock_selection(spec, registry);
  std::vector<Index> nodes;
  for (Index c : spec.group) nodes.push_back(registry.node(c, spec.source_product));
  nodes.push_back(registry.node(spec.source_country, spec.source_product));
  return Selection(std::move(nodes), registry.n_nodes());
}

std::vector<std::string> selection_labels(const Selection& sel, const Registry& registry) {
  std::vector<std::string> labels;
  for (Index node : sel.nodes()) labels.push_back(registry.node_label(node));
  return labels;
}

/// Table-style local ranking at one product: one row per position, one column per rank kind.
void write_local_table(const std::vector<RankIndex>& orders, const std::vector<Index>& countries,
                       const Registry& registry, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "position,pagerank,cheirank,importrank,exportrank\n";
  for (std::size_t k = 0; k < countries.size(); ++k) {
    out << k + 1;
    for (const auto& order : orders)
      out << ',' << registry.country(countries[static_cast<std::size_t>(order.order[k])]);
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void RunConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ArgumentError("--alpha must lie in (0,1]");
  if (!(tol > 0.0)) throw ArgumentError("--tol must be positive");
  if (!(series_tol > 0.0)) throw ArgumentError("--series-tol must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw ArgumentError("--delta must satisfy 0 < delta < 1");
  if (k < 1) throw ArgumentError("--k must be >= 1");
  if (table_extra < 0) throw ArgumentError("--table-extra must be >= 0");
}

void cmd_rank(const RunConfig& config) {
  config.validate();
  const MoneyTensor tensor = load_input(config);
  const auto& reg = tensor.registry();
  prepare_out_dir(config);

  const WtnPair pair = build_wtn_pair(tensor, config.alpha, rank_options(config));
  const RankVector P = pagerank(pair.direct, rank_options(config));
  const RankVector P_star = pagerank(pair.inverted, rank_options(config));
  logger().info("PageRank: {} iterations, CheiRank: {} iterations", P.iterations, P_star.iterations);
  const HatRankTable hat = hat_ranks(volumes(tensor));

  const std::pair<const char*, const Eigen::VectorXd*> kinds[] = {
      {"pagerank", &P.probabilities},
      {"cheirank", &P_star.probabilities},
      {"importrank", &hat.p},
      {"exportrank", &hat.p_star}};
  const auto& dir = config.out_dir;
  for (const auto& [name, values] : kinds) {
    const std::string stem = name;
    write_rank_csv(*values, reg, dir / (stem + "_nodes.csv"));
    write_marginal_csv(trace(*values, TraceAxis::country, reg), reg.countries(), "country",
                       dir / (stem + "_countries.csv"));
    write_marginal_csv(trace(*values, TraceAxis::product, reg), reg.products(), "product",
                       dir / (stem + "_products.csv"));
  }

  if (!config.source_product.empty()) {
    const Index product = reg.require_product(config.source_product);
    std::vector<Index> all(static_cast<std::size_t>(reg.n_countries()));
    std::iota(all.begin(), all.end(), Index{0});

    // Local orderings over a country subset, ranking by node values at `product`.
    auto orders_over = [&](const std::vector<Index>& countries) {
      std::vector<RankIndex> orders;
      for (const auto& [name, values] : kinds) {
        Eigen::VectorXd local(static_cast<Index>(countries.size()));
        for (std::size_t i = 0; i < countries.size(); ++i)
          local[static_cast<Index>(i)] = (*values)[reg.node(countries[i], product)];
        orders.push_back(order_indices(local));
      }
      return orders;
    };
    write_local_table(orders_over(all), all, reg, dir / ("local_ranks_" + reg.product(product) + ".csv"));

    if (!config.group.empty()) {
      // Group countries plus the best non-group exporters of the product.
      std::vector<Index> table;
      std::set<Index> in_group;
      for (const auto& code : config.group) {
        table.push_back(reg.require_country(code));
        in_group.insert(table.back());
      }
      const RankIndex exporters = local_order(hat.p_star, product, reg);
      Index added = 0;
      for (Index c : exporters.order) {
        if (added >= config.table_extra) break;
        if (in_group.count(c)) continue;
        table.push_back(c);
        ++added;
      }
      write_local_table(orders_over(table), table, reg,
                        dir / ("table_" + reg.product(product) + ".csv"));
    }
  }
}

void cmd_reduce(const RunConfig& config) {
  config.validate();
  const MoneyTensor tensor = load_input(config);
  const auto& reg = tensor.registry();
  prepare_out_dir(config);

  const Selection sel = make_selection(config, reg);
  const auto labels = selection_labels(sel, reg);
  const WtnPair pair = build_wtn_pair(tensor, config.alpha, rank_options(config));
  const ReducedSet direct = reduce(pair.direct, sel, reduce_options(config));
  const ReducedSet inverted = reduce(pair.inverted, sel, reduce_options(config));
  write_reduced_set(direct, labels, config.out_dir, "direct");
  write_reduced_set(inverted, labels, config.out_dir, "inverted");
  logger().info("W_pr={:.6f} W_rr={:.6f} W_qr={:.6f} W_qrnd={:.6f}", direct.weights.pr,
                direct.weights.rr, direct.weights.qr, direct.weights.qrnd);
  logger().info("W*_pr={:.6f} W*_rr={:.6f} W*_qr={:.6f} W*_qrnd={:.6f}", inverted.weights.pr,
                inverted.weights.rr, inverted.weights.qr, inverted.weights.qrnd);
}

void cmd_sensitivity(const RunConfig& config) {
  config.validate();
  const MoneyTensor tensor = load_input(config);
  const auto& reg = tensor.registry();
  prepare_out_dir(config);
  const ShockSpec spec = shock_spec(config, reg);

  const ShockBaseline baseline =
      shock_baseline(tensor, config.alpha, spec, reduce_options(config), rank_options(config));
  write_report_csv(reduced_balance_sensitivity(baseline, reg, spec, rank_options(config)),
                   config.out_dir / "sensitivity_regomax.csv");
  write_report_csv(hat_balance_sensitivity(tensor, spec), config.out_dir / "sensitivity_hat.csv");
  if (config.global_price)
    write_report_csv(global_price_sensitivity(tensor, config.alpha, spec.source_product, spec.group,
                                              spec.delta, rank_options(config)),
                     config.out_dir / "sensitivity_global.csv");
}

void cmd_network(const RunConfig& config) {
  config.validate();
  const MoneyTensor tensor = load_input(config);
  const auto& reg = tensor.registry();
  prepare_out_dir(config);

  const Selection sel = make_selection(config, reg);
  const auto labels = selection_labels(sel, reg);
  const WtnPair pair = build_wtn_pair(tensor, config.alpha, rank_options(config));
  const std::pair<const char*, TradeEdgeList> views[] = {
      {"network_import",
       top_links(reduce(pair.direct, sel, reduce_options(config)).G_R, labels, config.k,
                 LinkView::import_view)},
      {"network_export",
       top_links(reduce(pair.inverted, sel, reduce_options(config)).G_R, labels, config.k,
                 LinkView::export_view)}};
  for (const auto& [stem, edges] : views) {
    const std::string name = stem;
    if (config.format != NetworkFormat::csv)
      serialize_graph(edges, GraphFormat::dot, config.out_dir / (name + ".dot"));
    if (config.format != NetworkFormat::dot)
      serialize_graph(edges, GraphFormat::edge_csv, config.out_dir / (name + ".csv"));
  }
}

void cmd_synth(const RunConfig& config) {
  prepare_out_dir(config);
  const MoneyTensor tensor = synth_tensor(config.seed, config.countries, config.products, config.density);
  write_money_tensor(tensor, config.out_dir / "trade.csv");
  tensor.registry().write(config.out_dir / "registry.txt");
  logger().info("wrote {} flows to {}", tensor.flows().size(), (config.out_dir / "trade.csv").string());
}

int run(int argc, char** argv) {
  CLI::App app{"Multiproduct world trade network: Google matrices, reduced matrices and "
               "trade-balance sensitivity"};
  app.set_config("--config", "", "Key-value config file; command-line flags take precedence");
  app.require_subcommand(1);

  RunConfig config;
  std::string group_list;
  bool verbose = false;
  app.add_option("--input", config.input, "Trade CSV (year,product,exporter,importer,value_usd)");
  app.add_option("--registry", config.registry, "Registry file fixing country/product order");
  app.add_option("--year", config.year, "Year to load (default: latest in the input)");
  app.add_option("--alpha", config.alpha, "Damping factor")->capture_default_str();
  app.add_option("--tol", config.tol, "PageRank L1 residual tolerance")->capture_default_str();
  app.add_option("--series-tol", config.series_tol, "Reduced-matrix series tolerance")
      ->capture_default_str();
  app.add_option("--group", group_list, "Comma-separated ISO country codes");
  app.add_option("--source-country", config.source_country, "Shock source country code");
  app.add_option("--source-product", config.source_product, "Shock source product code");
  app.add_option("--delta", config.delta, "Price increment for sensitivities")->capture_default_str();
  app.add_option("--k", config.k, "Links per node in extracted networks")->capture_default_str();
  app.add_option("--out-dir", config.out_dir, "Output directory")->capture_default_str();
  app.add_option("--seed", config.seed, "Synthetic data seed")->capture_default_str();
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  auto* rank = app.add_subcommand("rank", "PageRank, CheiRank, ImportRank and ExportRank tables");
  rank->add_option("--table-extra", config.table_extra,
                   "Non-group exporters added to the local rank table")
      ->capture_default_str();

  const std::map<std::string, SelectionKind> selections{
      {"product", SelectionKind::product}, {"group", SelectionKind::group}, {"all", SelectionKind::all}};
  auto* reduce_cmd = app.add_subcommand("reduce", "Reduced Google matrices and their components");
  auto* network = app.add_subcommand("network", "Top-k trade links of the reduced matrices");
  for (auto* sub : {reduce_cmd, network})
    sub->add_option("--selection", config.selection,
                    "product: group at the source product + source; group: group x all products "
                    "+ source; all: every node")
        ->transform(CLI::CheckedTransformer(selections, CLI::ignore_case));
  const std::map<std::string, NetworkFormat> formats{
      {"dot", NetworkFormat::dot}, {"csv", NetworkFormat::csv}, {"both", NetworkFormat::both}};
  network->add_option("--format", config.format, "dot, csv or both")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case));

  auto* sensitivity = app.add_subcommand("sensitivity", "Trade-balance sensitivity to a price shock");
  sensitivity->add_flag("--global-price", config.global_price,
                        "Also compute the global product price variant");

  auto* synth = app.add_subcommand("synth", "Write a synthetic trade fixture");
  synth->add_option("--countries", config.countries)->capture_default_str();
  synth->add_option("--products", config.products)->capture_default_str();
  synth->add_option("--density", config.density)->capture_default_str();

  for (auto* sub : {rank, reduce_cmd, network, sensitivity, synth}) sub->fallthrough();
  for (auto* sub : {rank, reduce_cmd, network, sensitivity})
    sub->callback([&config] {
      if (config.input.empty()) throw CLI::RequiredError("--input");
    });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kUsageError;
  }

  logger().set_level(verbose ? spdlog::level::debug : spdlog::level::info);
  if (!group_list.empty()) {
    std::stringstream ss(group_list);
    std::string code;
    while (std::getline(ss, code, ','))
      if (!code.empty()) config.group.push_back(code);
  }

  try {
    if (*rank) cmd_rank(config);
    else if (*reduce_cmd) cmd_reduce(config);
    else if (*sensitivity) cmd_sensitivity(config);
    else if (*network) cmd_network(config);
    else if (*synth) cmd_synth(config);
    return kSuccess;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumericalFailure;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
  }
  return kUsageError;
}

}  // namespace wtn::cli
