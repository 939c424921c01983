#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "wtn/google_matrix.hpp"
#include "wtn/ingest.hpp"
#include "wtn/regomax.hpp"

namespace wtn {

inline constexpr double kDefaultDelta = 1e-3;

/// Price shock on the flows of one exporter node (source country, source product) into a
/// group of countries.
struct ShockSpec {
  Index source_country = 0;
  Index source_product = 0;
  std::vector<Index> group;  // country indices
  double delta = kDefaultDelta;
};

/// Throws ArgumentError unless the group is nonempty and distinct, excludes the source country,
/// indices are in range and 0 <= delta < 1 (delta = 0 is the identity shock).
void validate(const ShockSpec& spec, const Registry& registry);

/// Group countries x all products (group order, products ascending), then the source node last.
Selection shock_selection(const ShockSpec& spec, const Registry& registry);

/// Unshocked reduced matrices on the shock selection; computed once and reused across delta.
struct ShockBaseline {
  Selection selection;
  ReducedSet direct;
  ReducedSet inverted;
};

ShockBaseline shock_baseline(const MoneyTensor& tensor, double alpha, const ShockSpec& spec,
                             const ReduceOptions& reduce_opts = {},
                             const PageRankOptions& rank_opts = {});

struct ShockedPair {
  Eigen::MatrixXd direct;
  Eigen::MatrixXd inverted;
};

/// Scales by (1 + delta) the source column's entries in the rows of every other node (direct) and
/// the source row's entries in the columns of every other node (inverted), then renormalizes each
/// touched column. The source's own diagonal entry is not scaled.
ShockedPair apply_shock(const Eigen::MatrixXd& direct, const Eigen::MatrixXd& inverted,
                        Index source_position, double delta);

/// Baseline reduction followed by apply_shock at `delta`.
ShockedPair build_shock_matrices(const MoneyTensor& tensor, double alpha, const ShockSpec& spec,
                                 double delta, const ReduceOptions& reduce_opts = {});

/// B_c = (P*_c - P_c) / (P*_c + P_c) per entry.
Eigen::VectorXd balance(const Eigen::Ref<const Eigen::VectorXd>& p_star,
                        const Eigen::Ref<const Eigen::VectorXd>& p);

enum class SensitivityMethod { regomax, hat, global_price };
std::string to_string(SensitivityMethod method);

struct SensitivityReport {
  SensitivityMethod method = SensitivityMethod::regomax;
  std::vector<std::string> countries;  // group country codes, in group order
  Eigen::VectorXd balance;             // B_c at delta = 0
  Eigen::VectorXd derivative;          // central difference at delta
  Eigen::VectorXd derivative_half;     // central difference at delta / 2
  Eigen::VectorXd richardson_error;    // |D(delta) - D(delta/2)| / 3
  Eigen::VectorXd p;                   // baseline marginals used for balance
  Eigen::VectorXd p_star;
  std::string source;  // "RU:33" or "*:33" for a global product price change
  double delta = kDefaultDelta;
};

SensitivityReport reduced_balance_sensitivity(const MoneyTensor& tensor, double alpha,
                                              const ShockSpec& spec,
                                              const ReduceOptions& reduce_opts = {},
                                              const PageRankOptions& rank_opts = {});

/// Same as above on a precomputed baseline.
SensitivityReport reduced_balance_sensitivity(const ShockBaseline& baseline, const Registry& registry,
                                              const ShockSpec& spec,
                                              const PageRankOptions& rank_opts = {});

SensitivityReport hat_balance_sensitivity(const MoneyTensor& tensor, const ShockSpec& spec);

SensitivityReport global_price_sensitivity(const MoneyTensor& tensor, double alpha, Index product,
                                           const std::vector<Index>& group,
                                           double delta = kDefaultDelta,
                                           const PageRankOptions& rank_opts = {});

/// `country,balance,dB_ddelta,method,source,delta`, one row per group country.
void write_report_csv(const SensitivityReport& report, const std::filesystem::path& path);

}  // namespace wtn
