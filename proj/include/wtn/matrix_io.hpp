#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <string>
#include <vector>

#include "wtn/google_matrix.hpp"
#include "wtn/regomax.hpp"

namespace wtn {

/// `<stem>.csv` holds `row,col,value` triples of the stochastic part (dangling columns expanded);
/// `<stem>.meta` holds alpha on the first line followed by the personalization vector, one
/// value per line.
void dump_google_matrix(const GoogleMatrix& G, const std::filesystem::path& stem);

/// Header of labels, then one row of values per matrix row.
void write_dense_csv(const Eigen::Ref<const Eigen::MatrixXd>& M, const std::vector<std::string>& labels,
                     const std::filesystem::path& path);

struct LabeledMatrix {
  std::vector<std::string> labels;
  Eigen::MatrixXd values;
};
LabeledMatrix read_dense_csv(const std::filesystem::path& path);

/// Writes `<prefix>_{GR,Grr,Gpr,Gqr,Gqrd,Gqrnd}.csv` and `<prefix>_diagnostics.txt` into `dir`.
void write_reduced_set(const ReducedSet& set, const std::vector<std::string>& labels,
                       const std::filesystem::path& dir, const std::string& prefix);

/// `node,country,product,probability,rank_index` (node 0-based, rank_index 1-based).
void write_rank_csv(const Eigen::Ref<const Eigen::VectorXd>& node_values, const Registry& registry,
                    const std::filesystem::path& path);

/// `<key>,probability,rank_index`.
void write_marginal_csv(const Eigen::Ref<const Eigen::VectorXd>& values,
                        const std::vector<std::string>& codes, const std::string& key,
                        const std::filesystem::path& path);

}  // namespace wtn
