#pragma once

// Test-only reference implementations. Nothing here calls the library's matrix builders,
// solvers or reduction; they start from the raw tensor and use dense linear algebra.

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "wtn/ingest.hpp"

namespace wtn::oracle {

/// Dense S (direct) or S* (inverted) written entry by entry from the money matrices.
Eigen::MatrixXd dense_stochastic(const MoneyTensor& tensor, bool inverted);

/// Dense alpha S + (1 - alpha) v 1^T.
Eigen::MatrixXd dense_google(const Eigen::MatrixXd& S, const Eigen::VectorXd& v, double alpha);

/// Eigenvector of a column-stochastic matrix for the eigenvalue closest to 1, L1-normalized
/// and made nonnegative.
Eigen::VectorXd stationary(const Eigen::MatrixXd& G);

/// Two-iteration construction from scratch with dense eigen-solves. Returns (G, G*).
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> dense_wtn_pair(const MoneyTensor& tensor, double alpha);

/// Brute-force reduced matrix: G_rr + G_rs (1 - G_ss)^{-1} G_sr with a fresh full-pivot solve.
Eigen::MatrixXd brute_force_reduce(const Eigen::MatrixXd& G, const std::vector<Index>& selection);

/// Balances of `group` nodes after the (1 + delta) source shock applied to the dense full G and G*:
/// off-diagonal entries of the source column of G and of the source row of G* are scaled and the
/// touched columns renormalized; stationary vectors from dense eigen-solves.
Eigen::VectorXd full_network_shock_balance(const Eigen::MatrixXd& G, const Eigen::MatrixXd& G_star,
                                           Index source, const std::vector<Index>& group,
                                           double delta);
/// Tensor from (product, importer, exporter, value) rows on a fixed registry.
MoneyTensor make_tensor(std::vector<std::string> countries, std::vector<std::string> products,
                        const std::vector<TradeFlow>& flows, int year = 2016);

}  // namespace wtn::oracle
