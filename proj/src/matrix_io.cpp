#include "wtn/matrix_io.hpp"

#include <fstream>

#include "text.hpp"
#include "wtn/errors.hpp"

namespace wtn {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

void dump_google_matrix(const GoogleMatrix& G, const std::filesystem::path& stem) {
  auto csv_path = stem;
  csv_path += ".csv";
  auto meta_path = stem;
  meta_path += ".meta";

  auto csv = open_out(csv_path);
  csv << "row,col,value\n";
  const auto& S = G.stochastic();
  for (Index j = 0; j < G.size(); ++j) {
    if (S.is_dangling(j)) {
      const auto uniform = detail::format_double(1.0 / static_cast<double>(G.size()));
      for (Index i = 0; i < G.size(); ++i) csv << i << ',' << j << ',' << uniform << '\n';
      continue;
    }
    for (StochasticMatrix::Sparse::InnerIterator it(S.sparse_part(), j); it; ++it)
      csv << it.row() << ',' << j << ',' << detail::format_double(it.value()) << '\n';
  }
  finish(csv, csv_path);

  auto meta = open_out(meta_path);
  meta << detail::format_double(G.alpha()) << '\n';
  for (Index i = 0; i < G.size(); ++i)
    meta << detail::format_double(G.personalization()[i]) << '\n';
  finish(meta, meta_path);
}

void write_dense_csv(const Eigen::Ref<const Eigen::MatrixXd>& M, const std::vector<std::string>& labels,
                     const std::filesystem::path& path) {
  if (static_cast<Index>(labels.size()) != M.cols())
    throw ArgumentError("write_dense_csv: one label per column required");
  auto out = open_out(path);
  for (std::size_t j = 0; j < labels.size(); ++j) out << (j ? "," : "") << labels[j];
  out << '\n';
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) out << (j ? "," : "") << detail::format_double(M(i, j));
    out << '\n';
  }
  finish(out, path);
}

LabeledMatrix read_dense_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  LabeledMatrix result;
  std::string line;
  if (!std::getline(in, line)) throw ParseError("missing header", 1);
  for (auto label : detail::split(detail::trim(line), ',')) result.labels.emplace_back(label);

  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (text.empty()) continue;
    const auto cols = detail::split(text, ',');
    if (cols.size() != result.labels.size()) throw ParseError("column count mismatch", line_no);
    auto& row = rows.emplace_back();
    for (auto c : cols) {
      const auto v = detail::parse_double(c);
      if (!v) throw ParseError("non-numeric value '" + std::string(c) + "'", line_no);
      row.push_back(*v);
    }
  }
  result.values.resize(static_cast<Index>(rows.size()), static_cast<Index>(result.labels.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      result.values(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return result;
}

void write_reduced_set(const ReducedSet& set, const std::vector<std::string>& labels,
                       const std::filesystem::path& dir, const std::string& prefix) {
  const std::pair<const char*, const Eigen::MatrixXd*> parts[] = {
      {"GR", &set.G_R},   {"Grr", &set.G_rr}, {"Gpr", &set.G_pr},
      {"Gqr", &set.G_qr}, {"Gqrd", &set.G_qrd}, {"Gqrnd", &set.G_qrnd}};
  for (const auto& [name, matrix] : parts)
    write_dense_csv(*matrix, labels, dir / (prefix + "_" + name + ".csv"));

  const auto path = dir / (prefix + "_diagnostics.txt");
  auto out = open_out(path);
  const auto& d = set.diagnostics;
  const auto& w = set.weights;
  out << "n_r=" << labels.size() << '\n'
      << "lambda_c=" << detail::format_double(d.lambda_c) << '\n'
      << "eigen_iterations=" << d.eigen_iterations << '\n'
      << "dense_eigen_fallback=" << (d.dense_eigen_fallback ? 1 : 0) << '\n'
      << "series_terms=" << d.series_terms << '\n'
      << "residual=" << detail::format_double(d.series_residual) << '\n'
      << "clamped_entries=" << d.clamped_entries << '\n'
      << "pagerank_column_distance=" << detail::format_double(d.pagerank_column_distance) << '\n'
      << "W_R=" << detail::format_double(w.R) << '\n'
      << "W_rr=" << detail::format_double(w.rr) << '\n'
      << "W_pr=" << detail::format_double(w.pr) << '\n'
      << "W_qr=" << detail::format_double(w.qr) << '\n'
      << "W_qrd=" << detail::format_double(w.qrd) << '\n'
      << "W_qrnd=" << detail::format_double(w.qrnd) << '\n';
  finish(out, path);
}

void write_rank_csv(const Eigen::Ref<const Eigen::VectorXd>& node_values, const Registry& registry,
                    const std::filesystem::path& path) {
  if (node_values.size() != registry.n_nodes())
    throw ArgumentError("write_rank_csv: vector size does not match registry");
  const RankIndex index = order_indices(node_values);
  auto out = open_out(path);
  out << "node,country,product,probability,rank_index\n";
  for (Index i = 0; i < node_values.size(); ++i)
    out << i << ',' << registry.country(registry.country_of(i)) << ','
        << registry.product(registry.product_of(i)) << ','
        << detail::format_double(node_values[i]) << ',' << index.rank_of(i) << '\n';
  finish(out, path);
}

void write_marginal_csv(const Eigen::Ref<const Eigen::VectorXd>& values,
                        const std::vector<std::string>& codes, const std::string& key,
                        const std::filesystem::path& path) {
  if (static_cast<Index>(codes.size()) != values.size())
    throw ArgumentError("write_marginal_csv: one code per value required");
  const RankIndex index = order_indices(values);
  auto out = open_out(path);
  out << key << ",probability,rank_index\n";
  for (Index i = 0; i < values.size(); ++i)
    out << codes[static_cast<std::size_t>(i)] << ',' << detail::format_double(values[i]) << ','
        << index.rank_of(i) << '\n';
  finish(out, path);
}

}  // namespace wtn
