#pragma once

#include <Eigen/Core>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>
#include <utility>
#include <vector>

#include "wtn/errors.hpp"
#include "wtn/google_matrix.hpp"
#include "wtn/log.hpp"
#include "wtn/rank.hpp"

namespace wtn {

/// Ordered set of N_r distinct nodes out of N; the order fixes rows/columns of reduced matrices.
class Selection {
 public:
  Selection(std::vector<Index> nodes, Index n_total);

  static Selection all(Index n_total);

  const std::vector<Index>& nodes() const { return nodes_; }
  /// Complement nodes in ascending order.
  const std::vector<Index>& complement() const { return complement_; }
  Index size() const { return static_cast<Index>(nodes_.size()); }
  Index complement_size() const { return static_cast<Index>(complement_.size()); }
  Index n_total() const { return n_total_; }

 private:
  std::vector<Index> nodes_;
  std::vector<Index> complement_;
  Index n_total_;
};

struct ReduceOptions {
  double series_tol = 1e-14;
  std::size_t max_terms = 10000;
  double eigen_tol = 1e-13;
  std::size_t eigen_max_iter = 200000;
  /// Complement sizes up to this bound fall back to a dense eigensolver when power iteration stalls.
  Index dense_eigen_cap = 2000;
  /// Worker threads for the series; 0 picks std::thread::hardware_concurrency().
  unsigned threads = 0;
};

struct ComponentWeights {
  double R = 0, rr = 0, pr = 0, qr = 0, qrd = 0, qrnd = 0;
};

/// Reduced Google matrix and its decomposition G_R = G_rr + G_pr + G_qr, G_qr = G_qrd + G_qrnd.
template <typename Scalar>
struct BasicReducedSet {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix G_R, G_rr, G_pr, G_qr, G_qrd, G_qrnd;
  ComponentWeights weights;

  struct Diagnostics {
    Scalar lambda_c = 0;  // leading eigenvalue of the complement block G_ss
    Vector psi_right;     // over complement nodes, ||psi_right||_1 = 1
    Vector psi_left;      // over complement nodes, psi_left . psi_right = 1
    std::size_t eigen_iterations = 0;
    bool dense_eigen_fallback = false;
    std::size_t series_terms = 0;
    Scalar series_residual = 0;           // max-norm of the last series term
    std::vector<Scalar> term_norms;       // max-norm of term l, maximized over columns
    Scalar pagerank_column_distance = 0;  // max_ij |G_pr(i,j) - P_R(i)|
    Index clamped_entries = 0;
  } diagnostics;
};
using ReducedSet = BasicReducedSet<double>;

/// (sum of all entries) / N_r.
template <typename Derived>
typename Derived::Scalar component_weight(const Eigen::MatrixBase<Derived>& M) {
  if (M.rows() == 0) return 0;
  return M.sum() / static_cast<typename Derived::Scalar>(M.rows());
}

/// Diagonal and off-diagonal parts; their sum restores the input exactly.
template <typename Derived>
std::pair<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>,
          Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>>
split_qr(const Eigen::MatrixBase<Derived>& G_qr) {
  using Matrix = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (G_qr.rows() != G_qr.cols()) throw ArgumentError("split_qr: matrix must be square");
  Matrix diag = Matrix::Zero(G_qr.rows(), G_qr.cols());
  diag.diagonal() = G_qr.diagonal();
  Matrix off = G_qr;
  off.diagonal().setZero();
  return {std::move(diag), std::move(off)};
}

namespace detail {

template <typename Scalar>
struct ComplementEigenpair {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  Scalar lambda = 0;
  Vector right;  // full-length, zero on selected nodes
  Vector left;   // full-length, zero on selected nodes
  std::size_t iterations = 0;
  bool dense = false;
};

/// Leading eigenpair of G_ss by power iteration; `step` applies G_ss or its transpose.
template <typename Scalar, typename Step>
bool complement_power_iteration(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& mask, Step&& step,
                                const ReduceOptions& opts,
                                Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x, Scalar& lambda,
                                std::size_t& iterations) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  x = mask / mask.sum();
  for (std::size_t it = 1; it <= opts.eigen_max_iter; ++it) {
    Vector y = step(x).cwiseProduct(mask);
    lambda = y.sum();
    if (!(lambda > 0)) return false;
    const Scalar residual = (y - lambda * x).template lpNorm<1>();
    x = y / lambda;
    iterations += 1;
    if (residual < Scalar(opts.eigen_tol)) return true;
  }
  return false;
}

template <typename Scalar>
ComplementEigenpair<Scalar> complement_eigenpair(const BasicGoogleMatrix<Scalar>& G,
                                                 const Selection& sel,
                                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& mask,
                                                 const ReduceOptions& opts) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  ComplementEigenpair<Scalar> pair;
  Scalar lambda_left = 0;
  const bool right_ok = complement_power_iteration<Scalar>(
      mask, [&G](const Vector& x) { return Vector(G.apply(x)); }, opts, pair.right, pair.lambda,
      pair.iterations);
  const bool left_ok = right_ok && complement_power_iteration<Scalar>(
      mask, [&G](const Vector& x) { return Vector(G.apply_transpose(x)); }, opts, pair.left,
      lambda_left, pair.iterations);

  if (!left_ok) {
    const Index n_s = sel.complement_size();
    if (n_s > opts.dense_eigen_cap)
      throw ConvergenceError("complement eigenvector power iteration did not converge",
                             std::numeric_limits<double>::quiet_NaN(), pair.iterations);
    logger().debug("complement eigenpair: dense fallback for N_s = {}", n_s);
    Matrix G_ss(n_s, n_s);
    const auto& comp = sel.complement();
    for (Index j = 0; j < n_s; ++j) {
      const Vector col = G.column(comp[static_cast<std::size_t>(j)]);
      for (Index i = 0; i < n_s; ++i) G_ss(i, j) = col[comp[static_cast<std::size_t>(i)]];
    }
    auto perron = [](const Matrix& m, Scalar& value) {
      Eigen::EigenSolver<Matrix> solver(m);
      if (solver.info() != Eigen::Success) throw NumericalError("dense eigensolver failed");
      Index best = 0;
      for (Index k = 1; k < m.rows(); ++k)
        if (solver.eigenvalues()[k].real() > solver.eigenvalues()[best].real()) best = k;
      value = solver.eigenvalues()[best].real();
      Vector v = solver.eigenvectors().col(best).real();
      if (v.sum() < 0) v = -v;
      return Vector(v.cwiseMax(Scalar(0)));
    };
    Vector right = perron(G_ss, pair.lambda);
    Vector left = perron(Matrix(G_ss.transpose()), lambda_left);
    pair.right = Vector::Zero(sel.n_total());
    pair.left = Vector::Zero(sel.n_total());
    for (Index i = 0; i < n_s; ++i) {
      pair.right[comp[static_cast<std::size_t>(i)]] = right[i];
      pair.left[comp[static_cast<std::size_t>(i)]] = left[i];
    }
    pair.right /= pair.right.sum();
    pair.dense = true;
  }
  const Scalar overlap = pair.left.dot(pair.right);
  if (!(overlap > 0)) throw NumericalError("complement eigenvectors are orthogonal");
  pair.left /= overlap;
  return pair;
}

template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gather_rows(
    const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& full, const std::vector<Index>& rows) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(static_cast<Index>(rows.size()), full.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = full.row(rows[i]);
  return out;
}

}  // namespace detail

/// Reduced Google matrix of G on `sel`:
/// G_R = G_rr + G_rs (1 - G_ss)^{-1} G_sr, split through the leading eigenpair of G_ss into the
/// projector part G_pr and the deflated geometric-series part G_qr.
template <typename Scalar>
BasicReducedSet<Scalar> reduce(const BasicGoogleMatrix<Scalar>& G, const Selection& sel,
                               const ReduceOptions& opts = {}) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (sel.n_total() != G.size()) throw ArgumentError("reduce: selection does not match matrix size");

  const Index n = G.size();
  const Index n_r = sel.size();
  const auto& r_nodes = sel.nodes();

  BasicReducedSet<Scalar> out;

  // Columns of G at the selected nodes, full length.
  Matrix cols(n, n_r);
  for (Index j = 0; j < n_r; ++j) cols.col(j) = G.column(r_nodes[static_cast<std::size_t>(j)]);
  out.G_rr = detail::gather_rows<Scalar>(cols, r_nodes);

  if (sel.complement_size() == 0) {
    out.G_R = out.G_rr;
    out.G_pr = Matrix::Zero(n_r, n_r);
    out.G_qr = Matrix::Zero(n_r, n_r);
  } else {
    Vector mask = Vector::Ones(n);
    for (Index i : r_nodes) mask[i] = 0;
    // G_sr embedded in full space.
    for (Index i : r_nodes) cols.row(i).setZero();

    const auto eig = detail::complement_eigenpair<Scalar>(G, sel, mask, opts);
    auto& diag = out.diagnostics;
    diag.lambda_c = eig.lambda;
    diag.eigen_iterations = eig.iterations;
    diag.dense_eigen_fallback = eig.dense;
    diag.psi_right.resize(sel.complement_size());
    diag.psi_left.resize(sel.complement_size());
    for (Index k = 0; k < sel.complement_size(); ++k) {
      diag.psi_right[k] = eig.right[sel.complement()[static_cast<std::size_t>(k)]];
      diag.psi_left[k] = eig.left[sel.complement()[static_cast<std::size_t>(k)]];
    }

    // G_pr = (G_rs psi_R)(psi_L^T G_sr) / (1 - lambda_c).
    const Vector image = detail::gather_rows<Scalar>(Matrix(G.apply(eig.right)), r_nodes).col(0);
    const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> weights_left = eig.left.transpose() * cols;
    out.G_pr = (image * weights_left) / (Scalar(1) - eig.lambda);

    // Q x = x - psi_R (psi_L . x)
    auto project = [&eig](Matrix& x) { x.noalias() -= eig.right * (eig.left.transpose() * x); };

    // G_qr = G_rs Q sum_l (Q G_ss Q)^l Q G_sr, evaluated over fixed column chunks so results do
    // not depend on the thread count.
    constexpr Index kChunk = 64;
    const Index n_chunks = (n_r + kChunk - 1) / kChunk;
    out.G_qr.resize(n_r, n_r);
    std::vector<std::vector<Scalar>> chunk_norms(static_cast<std::size_t>(n_chunks));
    std::vector<char> chunk_failed(static_cast<std::size_t>(n_chunks), 0);

    auto run_chunk = [&](Index chunk) {
      const Index first = chunk * kChunk;
      const Index width = std::min(kChunk, n_r - first);
      Matrix term = cols.middleCols(first, width);
      project(term);
      Matrix sum = term;
      auto& norms = chunk_norms[static_cast<std::size_t>(chunk)];
      norms.push_back(term.cwiseAbs().maxCoeff());
      bool converged = norms.back() < Scalar(opts.series_tol);
      while (!converged && norms.size() < opts.max_terms) {
        project(term);
        Matrix next = G.apply(term);
        for (Index i : r_nodes) next.row(i).setZero();
        project(next);
        term.swap(next);
        sum += term;
        norms.push_back(term.cwiseAbs().maxCoeff());
        converged = norms.back() < Scalar(opts.series_tol);
      }
      if (!converged) chunk_failed[static_cast<std::size_t>(chunk)] = 1;
      project(sum);
      out.G_qr.middleCols(first, width) = detail::gather_rows<Scalar>(Matrix(G.apply(sum)), r_nodes);
    };

    unsigned n_threads = opts.threads != 0 ? opts.threads : std::thread::hardware_concurrency();
    n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(n_chunks)));
    if (n_threads == 1) {
      for (Index c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
      std::vector<std::thread> workers;
      for (unsigned t = 0; t < n_threads; ++t)
        workers.emplace_back([&, t] {
          for (Index c = t; c < n_chunks; c += n_threads) run_chunk(c);
        });
      for (auto& w : workers) w.join();
    }

    for (const auto& norms : chunk_norms) {
      if (norms.size() > diag.term_norms.size()) diag.term_norms.resize(norms.size(), Scalar(0));
      for (std::size_t l = 0; l < norms.size(); ++l)
        diag.term_norms[l] = std::max(diag.term_norms[l], norms[l]);
    }
    diag.series_terms = diag.term_norms.size();
    diag.series_residual = diag.term_norms.empty() ? Scalar(0) : diag.term_norms.back();
    if (std::any_of(chunk_failed.begin(), chunk_failed.end(), [](char f) { return f != 0; }))
      throw ConvergenceError("reduce: resolvent series did not converge",
                             static_cast<double>(diag.series_residual), diag.series_terms);

    out.G_R = out.G_rr + out.G_pr + out.G_qr;

    // Truncation can leave tiny negatives; clamp those and renormalize the column.
    for (Index j = 0; j < n_r; ++j) {
      bool touched = false;
      for (Index i = 0; i < n_r; ++i) {
        const Scalar value = out.G_R(i, j);
        if (value >= 0) continue;
        if (value >= Scalar(-1e-12)) {
          out.G_R(i, j) = 0;
          touched = true;
          ++diag.clamped_entries;
        } else {
          logger().warn("reduced matrix entry ({}, {}) = {:.3e} is negative", i, j,
                        static_cast<double>(value));
        }
      }
      if (touched) out.G_R.col(j) /= out.G_R.col(j).sum();
    }
    if (diag.clamped_entries > 0)
      logger().debug("clamped {} tiny negative reduced-matrix entries", diag.clamped_entries);
  }

  std::tie(out.G_qrd, out.G_qrnd) = split_qr(out.G_qr);
  out.weights.R = static_cast<double>(component_weight(out.G_R));
  out.weights.rr = static_cast<double>(component_weight(out.G_rr));
  out.weights.pr = static_cast<double>(component_weight(out.G_pr));
  out.weights.qr = static_cast<double>(component_weight(out.G_qr));
  out.weights.qrd = static_cast<double>(component_weight(out.G_qrd));
  out.weights.qrnd = static_cast<double>(component_weight(out.G_qrnd));

  if (sel.complement_size() > 0) {
    try {
      const auto P_R = pagerank(out.G_R, PageRankOptions{1e-13, 100000});
      out.diagnostics.pagerank_column_distance =
          (out.G_pr.colwise() - P_R.probabilities).cwiseAbs().maxCoeff();
    } catch (const ConvergenceError&) {
      out.diagnostics.pagerank_column_distance = std::numeric_limits<Scalar>::quiet_NaN();
    }
  }
  return out;
}

inline constexpr Index kDenseOracleCap = 2000;

/// Dense reference: G_rr + G_rs (1 - G_ss)^{-1} G_sr by LU solve.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> reduce_dense_oracle(
    const BasicGoogleMatrix<Scalar>& G, const Selection& sel, Index cap = kDenseOracleCap) {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (G.size() > cap)
    throw ArgumentError("reduce_dense_oracle: N = " + std::to_string(G.size()) +
                        " exceeds the dense cap " + std::to_string(cap));
  if (sel.n_total() != G.size())
    throw ArgumentError("reduce_dense_oracle: selection does not match matrix size");
  const Matrix dense = G.to_dense();
  const auto& r = sel.nodes();
  const auto& s = sel.complement();
  auto block = [&dense](const std::vector<Index>& rows, const std::vector<Index>& columns) {
    Matrix b(static_cast<Index>(rows.size()), static_cast<Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j)
      for (std::size_t i = 0; i < rows.size(); ++i)
        b(static_cast<Index>(i), static_cast<Index>(j)) = dense(rows[i], columns[j]);
    return b;
  };
  Matrix result = block(r, r);
  if (s.empty()) return result;
  const Matrix G_ss = block(s, s);
  const Matrix system = Matrix::Identity(G_ss.rows(), G_ss.cols()) - G_ss;
  Eigen::PartialPivLU<Matrix> lu(system);
  if (!(lu.rcond() > std::numeric_limits<Scalar>::epsilon()))
    throw NumericalError("reduce_dense_oracle: (1 - G_ss) is singular");
  result += block(r, s) * lu.solve(block(s, r));
  return result;
}

extern template BasicReducedSet<double> reduce(const BasicGoogleMatrix<double>&, const Selection&,
                                               const ReduceOptions&);
extern template Eigen::MatrixXd reduce_dense_oracle(const BasicGoogleMatrix<double>&,
                                                    const Selection&, Index);

}  // namespace wtn
