#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "wtn/registry.hpp"

namespace wtn {

/// import: columns of the direct reduction list importers from the column node.
/// export: columns of the inverted reduction list exporters to the column node.
enum class LinkView { import_view, export_view };

struct TradeEdge {
  Index from = 0;  // exporting node (position in the reduced matrix)
  Index to = 0;    // importing node
  double weight = 0.0;

  friend bool operator==(const TradeEdge&, const TradeEdge&) = default;
};

struct TradeEdgeList {
  std::vector<std::string> labels;
  std::vector<TradeEdge> edges;
  LinkView view = LinkView::import_view;
  Index k = 0;
};

/// For every column, the k largest off-diagonal entries (ties by ascending partner index),
/// emitted as edges oriented along the trade flow.
TradeEdgeList top_links(const Eigen::Ref<const Eigen::MatrixXd>& reduced,
                        const std::vector<std::string>& labels, Index k, LinkView view);

enum class GraphFormat { dot, edge_csv };

void write_dot(const TradeEdgeList& edges, std::ostream& out);
void write_edge_csv(const TradeEdgeList& edges, std::ostream& out);
void serialize_graph(const TradeEdgeList& edges, GraphFormat format,
                     const std::filesystem::path& path);

/// Parses `from,to,weight` rows back into edges, resolving labels against `labels`.
std::vector<TradeEdge> read_edge_csv(const std::filesystem::path& path,
                                     const std::vector<std::string>& labels);

}  // namespace wtn
