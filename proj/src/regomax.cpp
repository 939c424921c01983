#include "wtn/regomax.hpp"

#include <numeric>

namespace wtn {

Selection::Selection(std::vector<Index> nodes, Index n_total)
    : nodes_(std::move(nodes)), n_total_(n_total) {
  if (nodes_.empty()) throw ArgumentError("selection is empty");
  std::vector<char> taken(static_cast<std::size_t>(std::max<Index>(n_total_, 0)), 0);
  for (Index node : nodes_) {
    if (node < 0 || node >= n_total_) throw ArgumentError("selection node out of range");
    auto& flag = taken[static_cast<std::size_t>(node)];
    if (flag) throw ArgumentError("selection nodes must be distinct");
    flag = 1;
  }
  for (Index i = 0; i < n_total_; ++i)
    if (!taken[static_cast<std::size_t>(i)]) complement_.push_back(i);
}

Selection Selection::all(Index n_total) {
  std::vector<Index> nodes(static_cast<std::size_t>(n_total));
  std::iota(nodes.begin(), nodes.end(), Index{0});
  return Selection(std::move(nodes), n_total);
}

template BasicReducedSet<double> reduce(const BasicGoogleMatrix<double>&, const Selection&,
                                        const ReduceOptions&);
template Eigen::MatrixXd reduce_dense_oracle(const BasicGoogleMatrix<double>&, const Selection&,
                                             Index);

}  // namespace wtn
