#include "wtn/netexport.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <unordered_map>

#include "text.hpp"
#include "wtn/errors.hpp"

namespace wtn {

TradeEdgeList top_links(const Eigen::Ref<const Eigen::MatrixXd>& reduced,
                        const std::vector<std::string>& labels, Index k, LinkView view) {
  const Index n = reduced.rows();
  if (reduced.cols() != n) throw ArgumentError("top_links: matrix must be square");
  if (static_cast<Index>(labels.size()) != n) throw ArgumentError("top_links: one label per node");
  if (k < 1) throw ArgumentError("top_links: k must be >= 1");
  if (k >= n) throw ArgumentError("top_links: k must be smaller than the matrix size");

  TradeEdgeList list{labels, {}, view, k};
  std::vector<Index> partners;
  for (Index col = 0; col < n; ++col) {
    partners.clear();
    for (Index row = 0; row < n; ++row)
      if (row != col) partners.push_back(row);
    std::stable_sort(partners.begin(), partners.end(), [&](Index a, Index b) {
      return reduced(a, col) > reduced(b, col);
    });
    for (Index m = 0; m < k; ++m) {
      const Index partner = partners[static_cast<std::size_t>(m)];
      const double w = reduced(partner, col);
      if (view == LinkView::import_view) {
        list.edges.push_back({col, partner, w});
      } else {
        list.edges.push_back({partner, col, w});
      }
    }
  }
  return list;
}

void write_dot(const TradeEdgeList& list, std::ostream& out) {
  out << "digraph trade {\n";
  out << "  // view: " << (list.view == LinkView::import_view ? "import" : "export")
      << ", k = " << list.k << "\n";
  for (const auto& label : list.labels) out << "  \"" << label << "\";\n";
  for (const auto& e : list.edges) {
    const auto w = detail::format_double(e.weight);
    out << "  \"" << list.labels[static_cast<std::size_t>(e.from)] << "\" -> \""
        << list.labels[static_cast<std::size_t>(e.to)] << "\" [label=\"" << w << "\", weight=" << w
        << "];\n";
  }
  out << "}\n";
}

void write_edge_csv(const TradeEdgeList& list, std::ostream& out) {
  out << "from,to,weight\n";
  for (const auto& e : list.edges)
    out << list.labels[static_cast<std::size_t>(e.from)] << ','
        << list.labels[static_cast<std::size_t>(e.to)] << ',' << detail::format_double(e.weight)
        << '\n';
}

void serialize_graph(const TradeEdgeList& edges, GraphFormat format,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  if (format == GraphFormat::dot) {
    write_dot(edges, out);
  } else {
    write_edge_csv(edges, out);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<TradeEdge> read_edge_csv(const std::filesystem::path& path,
                                     const std::vector<std::string>& labels) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::unordered_map<std::string, Index> lookup;
  for (std::size_t i = 0; i < labels.size(); ++i) lookup.emplace(labels[i], static_cast<Index>(i));

  std::vector<TradeEdge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto text = detail::trim(line);
    if (line_no == 1) {
      if (text != "from,to,weight") throw ParseError("expected header 'from,to,weight'", line_no);
      continue;
    }
    if (text.empty()) continue;
    const auto cols = detail::split(text, ',');
    if (cols.size() != 3) throw ParseError("expected 3 columns", line_no);
    const auto from = lookup.find(std::string(cols[0]));
    const auto to = lookup.find(std::string(cols[1]));
    const auto weight = detail::parse_double(cols[2]);
    if (from == lookup.end() || to == lookup.end()) throw ParseError("unknown node label", line_no);
    if (!weight) throw ParseError("non-numeric weight", line_no);
    edges.push_back({from->second, to->second, *weight});
  }
  return edges;
}

}  // namespace wtn
