#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "wtn/google_matrix.hpp"
#include "wtn/regomax.hpp"
#include "wtn/sensitivity.hpp"

namespace wtn::cli {

enum class SelectionKind { product, group, all };
enum class NetworkFormat { dot, csv, both };

/// Every tunable of a run; defaults match the library defaults.
struct RunConfig {
  std::filesystem::path input;
  std::optional<std::filesystem::path> registry;
  std::optional<int> year;  // latest year in the input when unset
  double alpha = kDefaultAlpha;
  double tol = PageRankOptions{}.tol;
  double series_tol = ReduceOptions{}.series_tol;
  std::vector<std::string> group;
  std::string source_country;
  std::string source_product;
  double delta = kDefaultDelta;
  Index k = 4;
  std::filesystem::path out_dir = ".";
  SelectionKind selection = SelectionKind::product;
  NetworkFormat format = NetworkFormat::both;
  bool global_price = false;
  Index table_extra = 10;

  // synth
  std::uint64_t seed = 1;
  Index countries = 10;
  Index products = 3;
  double density = 0.5;

  /// Throws ArgumentError on inconsistent values.
  void validate() const;
};

enum ExitCode : int { kSuccess = 0, kNumericalFailure = 1, kUsageError = 2 };

void cmd_rank(const RunConfig& config);
void cmd_reduce(const RunConfig& config);
void cmd_sensitivity(const RunConfig& config);
void cmd_network(const RunConfig& config);
void cmd_synth(const RunConfig& config);

/// Parses arguments, runs the subcommand and maps failures to exit codes.
int run(int argc, char** argv);

}  // namespace wtn::cli
