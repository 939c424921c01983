#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <utility>
#include <vector>

#include "wtn/errors.hpp"
#include "wtn/ingest.hpp"
#include "wtn/rank.hpp"

namespace wtn {

/// Direct flow (columns are exporters) or inverted flow (columns are importers).
enum class Direction { direct, inverted };

/// Column-stochastic matrix stored as sparse columns plus a set of dangling columns,
/// each of which stands for the uniform column 1/N.
template <typename Scalar>
class BasicStochasticMatrix {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Sparse = Eigen::SparseMatrix<Scalar, Eigen::ColMajor, Index>;

  BasicStochasticMatrix() = default;
  /// `columns` must leave dangling columns empty; `dangling[j]` flags column j.
  BasicStochasticMatrix(Direction direction, Sparse columns, std::vector<bool> dangling)
      : direction_(direction), columns_(std::move(columns)), dangling_mask_(columns_.cols()) {
    if (columns_.rows() != columns_.cols() ||
        static_cast<Index>(dangling.size()) != columns_.cols())
      throw ArgumentError("stochastic matrix: inconsistent sizes");
    for (Index j = 0; j < columns_.cols(); ++j) {
      dangling_mask_[j] = dangling[static_cast<std::size_t>(j)] ? Scalar(1) : Scalar(0);
      if (dangling[static_cast<std::size_t>(j)] && columns_.col(j).nonZeros() != 0)
        throw ArgumentError("stochastic matrix: dangling column holds explicit entries");
    }
    columns_.makeCompressed();
  }

  Index size() const { return columns_.cols(); }
  Direction direction() const { return direction_; }
  const Sparse& sparse_part() const { return columns_; }
  bool is_dangling(Index j) const { return dangling_mask_[j] != Scalar(0); }
  Index dangling_count() const { return static_cast<Index>(dangling_mask_.sum()); }

  /// S X for a vector or a block of column vectors.
  template <typename Derived>
  Matrix apply(const Eigen::MatrixBase<Derived>& x) const {
    Matrix y = columns_ * x;
    y.rowwise() += (dangling_mask_.transpose() * x) / Scalar(size());
    return y;
  }

  /// S^T Y.
  template <typename Derived>
  Matrix apply_transpose(const Eigen::MatrixBase<Derived>& y) const {
    Matrix x = columns_.transpose() * y;
    x += dangling_mask_ * (y.colwise().sum() / Scalar(size()));
    return x;
  }

  Vector column(Index j) const {
    if (is_dangling(j)) return Vector::Constant(size(), Scalar(1) / Scalar(size()));
    return Vector(columns_.col(j));
  }

  Matrix to_dense() const {
    Matrix m = Matrix(columns_);
    for (Index j = 0; j < size(); ++j)
      if (is_dangling(j)) m.col(j).setConstant(Scalar(1) / Scalar(size()));
    return m;
  }

 private:
  Direction direction_ = Direction::direct;
  Sparse columns_;
  Vector dangling_mask_;
};

/// Nonnegative teleportation vector summing to one.
template <typename Scalar>
class BasicPersonalizationVector {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BasicPersonalizationVector() = default;
  explicit BasicPersonalizationVector(Vector values, Scalar tol = Scalar(1e-10))
      : values_(std::move(values)) {
    if (values_.size() == 0) throw ArgumentError("personalization vector is empty");
    if (!values_.allFinite() || (values_.array() < 0).any())
      throw ArgumentError("personalization vector entries must be finite and nonnegative");
    if (Eigen::numext::abs(values_.sum() - Scalar(1)) > tol)
      throw ArgumentError("personalization vector must sum to 1");
  }

  Index size() const { return values_.size(); }
  const Vector& values() const { return values_; }
  Scalar operator[](Index i) const { return values_[i]; }

 private:
  Vector values_;
};

/// G = alpha S + (1 - alpha) v 1^T, kept in factored form; the rank-one term is never stored.
template <typename Scalar>
class BasicGoogleMatrix {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Stochastic = BasicStochasticMatrix<Scalar>;
  using Personalization = BasicPersonalizationVector<Scalar>;

  BasicGoogleMatrix() = default;
  BasicGoogleMatrix(Stochastic S, Personalization v, Scalar alpha)
      : stochastic_(std::move(S)), personalization_(std::move(v)), alpha_(alpha) {
    if (stochastic_.size() != personalization_.size())
      throw ArgumentError("google matrix: personalization size does not match matrix");
    if (!(alpha_ > 0 && alpha_ <= 1)) throw ArgumentError("google matrix: alpha must lie in (0,1]");
  }

  Index size() const { return stochastic_.size(); }
  Scalar alpha() const { return alpha_; }
  const Stochastic& stochastic() const { return stochastic_; }
  const Personalization& personalization() const { return personalization_; }
  Direction direction() const { return stochastic_.direction(); }

  /// G X = alpha S X + (1 - alpha) v (1^T X).
  template <typename Derived>
  Matrix apply(const Eigen::MatrixBase<Derived>& x) const {
    Matrix y = alpha_ * stochastic_.apply(x);
    if (alpha_ != Scalar(1))
      y.noalias() += ((Scalar(1) - alpha_) * personalization_.values()) * x.colwise().sum();
    return y;
  }

  /// G^T Y = alpha S^T Y + (1 - alpha) 1 (v^T Y).
  template <typename Derived>
  Matrix apply_transpose(const Eigen::MatrixBase<Derived>& y) const {
    Matrix x = alpha_ * stochastic_.apply_transpose(y);
    if (alpha_ != Scalar(1))
      x.rowwise() += (Scalar(1) - alpha_) * (personalization_.values().transpose() * y);
    return x;
  }

  Vector column(Index j) const {
    Vector col = alpha_ * stochastic_.column(j);
    if (alpha_ != Scalar(1)) col += (Scalar(1) - alpha_) * personalization_.values();
    return col;
  }

  Matrix to_dense() const {
    Matrix m = alpha_ * stochastic_.to_dense();
    if (alpha_ != Scalar(1)) m.colwise() += (Scalar(1) - alpha_) * personalization_.values();
    return m;
  }

 private:
  Stochastic stochastic_;
  Personalization personalization_;
  Scalar alpha_ = Scalar(1);
};

using StochasticMatrix = BasicStochasticMatrix<double>;
using PersonalizationVector = BasicPersonalizationVector<double>;
using GoogleMatrix = BasicGoogleMatrix<double>;

/// Power iteration from the uniform vector (or `start`) until ||G P - P||_1 < tol.
template <typename Scalar>
BasicRankVector<Scalar> pagerank(const BasicGoogleMatrix<Scalar>& G, const PageRankOptions& opts = {},
                                 const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>* start = nullptr) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  return detail::power_iterate<Scalar>(
      G.size(), [&G](const Vector& x) { return Vector(G.apply(x)); }, opts, start);
}

StochasticMatrix build_stochastic(const MoneyTensor& tensor, Direction direction);

/// Relative product volume per country, equal weight per country. A country with no volume in
/// the requested direction gets the uniform block 1/(N_c N_p).
PersonalizationVector personalization_volume(const MoneyTensor& tensor, Direction direction);

/// P_p / N_c replicated across countries.
PersonalizationVector personalization_rank(const Eigen::Ref<const Eigen::VectorXd>& product_marginal,
                                           const Registry& registry);

GoogleMatrix assemble_google(StochasticMatrix S, PersonalizationVector v, double alpha);

struct WtnPair {
  GoogleMatrix direct;
  GoogleMatrix inverted;
};

inline constexpr double kDefaultAlpha = 0.5;

/// Two-iteration construction: volume personalization first, then personalization from the
/// traced product marginals of the first-iteration PageRank and CheiRank.
WtnPair build_wtn_pair(const MoneyTensor& tensor, double alpha = kDefaultAlpha,
                       const PageRankOptions& opts = {});

extern template class BasicStochasticMatrix<double>;
extern template class BasicPersonalizationVector<double>;
extern template class BasicGoogleMatrix<double>;

}  // namespace wtn
