#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "wtn/regomax.hpp"

using namespace wtn;

namespace {

Selection random_selection(std::uint64_t seed, Index n, Index n_r) {
  std::vector<Index> nodes(static_cast<std::size_t>(n));
  std::iota(nodes.begin(), nodes.end(), Index{0});
  std::mt19937_64 rng(seed);
  std::shuffle(nodes.begin(), nodes.end(), rng);
  nodes.resize(static_cast<std::size_t>(n_r));
  return Selection(std::move(nodes), n);
}

double column_sum_error(const Eigen::MatrixXd& m) { return (m.colwise().sum().array() - 1.0).abs().maxCoeff(); }

}  // namespace

TEST_CASE("selection validation") {
  CHECK_THROWS_AS(Selection(std::vector<Index>{}, 5), ArgumentError);
  CHECK_THROWS_AS(Selection({1, 1}, 5), ArgumentError);
  CHECK_THROWS_AS(Selection({5}, 5), ArgumentError);
  const Selection s({3, 0}, 5);
  CHECK(s.complement() == std::vector<Index>{1, 2, 4});
  CHECK(s.complement_size() == 3);
  CHECK(Selection::all(4).complement_size() == 0);
}

TEST_CASE("reduce: selecting every node returns G") {
  const WtnPair pair = build_wtn_pair(synth_tensor(1, 6, 3, 0.5));
  const ReducedSet r = reduce(pair.direct, Selection::all(18));
  CHECK(r.G_R == pair.direct.to_dense());
  CHECK(r.G_pr.isZero(0.0));
  CHECK(r.G_qr.isZero(0.0));
  CHECK(reduce_dense_oracle(pair.direct, Selection::all(18)) == pair.direct.to_dense());
  CHECK(std::abs(r.weights.R - 1.0) < 1e-12);
}

TEST_CASE("reduce: one hidden node matches the scalar closed form") {
  const WtnPair pair = build_wtn_pair(synth_tensor(2, 5, 2, 0.6));
  const Eigen::MatrixXd G = pair.direct.to_dense();
  const Index hidden = 4;
  std::vector<Index> nodes;
  for (Index i = 0; i < 10; ++i)
    if (i != hidden) nodes.push_back(i);
  const Selection sel(nodes, 10);

  Eigen::MatrixXd expected(9, 9);
  const double g = G(hidden, hidden);
  for (Index i = 0; i < 9; ++i)
    for (Index j = 0; j < 9; ++j)
      expected(i, j) = G(nodes[i], nodes[j]) + G(nodes[i], hidden) * G(hidden, nodes[j]) / (1.0 - g);

  const ReducedSet r = reduce(pair.direct, sel);
  CHECK((r.G_R - expected).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(r.diagnostics.lambda_c == doctest::Approx(g).epsilon(1e-14));
  CHECK(r.G_qr.cwiseAbs().maxCoeff() < 1e-15);
  CHECK((reduce_dense_oracle(pair.direct, sel) - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("reduce: agrees with dense oracles and keeps PageRank proportions") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const MoneyTensor t = synth_tensor(seed, 30, 10, 0.25);  // N = 300
    const WtnPair pair = build_wtn_pair(t);
    const Selection sel = random_selection(seed, 300, 15);
    for (const GoogleMatrix* G : {&pair.direct, &pair.inverted}) {
      const ReducedSet r = reduce(*G, sel);
      const Eigen::MatrixXd oracle = reduce_dense_oracle(*G, sel);
      const Eigen::MatrixXd brute = oracle::brute_force_reduce(G->to_dense(), sel.nodes());
      CHECK((r.G_R - oracle).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((oracle - brute).cwiseAbs().maxCoeff() < 1e-12);
      CHECK((r.G_rr + r.G_pr + r.G_qr - r.G_R).cwiseAbs().maxCoeff() < 1e-10);
      CHECK(column_sum_error(r.G_R) < 1e-10);
      CHECK(r.G_R.minCoeff() >= -1e-12);
      CHECK(std::abs(r.weights.R - 1.0) < 1e-10);
      CHECK(std::abs(r.weights.rr + r.weights.pr + r.weights.qr - 1.0) < 1e-10);
      CHECK(r.weights.qrd + r.weights.qrnd == doctest::Approx(r.weights.qr).epsilon(1e-12));

      const RankVector global = pagerank(*G);
      Eigen::VectorXd restricted(sel.size());
      for (Index i = 0; i < sel.size(); ++i) restricted[i] = global.probabilities[sel.nodes()[i]];
      restricted /= restricted.sum();
      CHECK((pagerank(r.G_R).probabilities - restricted).lpNorm<1>() < 1e-8);
    }
  }
}

TEST_CASE("reduce: projector part has one column direction") {
  const WtnPair pair = build_wtn_pair(synth_tensor(4, 20, 6, 0.3));
  const ReducedSet r = reduce(pair.direct, random_selection(4, 120, 12));
  Eigen::VectorXd u = r.G_pr.col(0);
  u.normalize();
  for (Index j = 0; j < r.G_pr.cols(); ++j) {
    const Eigen::VectorXd c = r.G_pr.col(j);
    CHECK((c - c.dot(u) * u).norm() < 1e-14 * std::max(1.0, c.norm()));
    CHECK(c.minCoeff() >= 0.0);
  }
  CHECK(std::isfinite(r.diagnostics.pagerank_column_distance));
  CHECK(r.diagnostics.lambda_c > 0.0);
  CHECK(r.diagnostics.lambda_c < 1.0);
  CHECK(std::abs(r.diagnostics.psi_left.dot(r.diagnostics.psi_right) - 1.0) < 1e-12);
}

TEST_CASE("reduce: series terms decay at the rate of the second eigenvalue") {
  const WtnPair pair = build_wtn_pair(synth_tensor(8, 15, 4, 0.35));
  const Selection sel = random_selection(8, 60, 10);
  const ReducedSet r = reduce(pair.direct, sel);
  const auto& norms = r.diagnostics.term_norms;
  REQUIRE(norms.size() >= 8);
  CHECK(r.diagnostics.series_residual < 1e-14);
  CHECK(r.diagnostics.series_terms == norms.size());

  // |lambda_2| of G_ss from a dense eigensolve.
  const Eigen::MatrixXd G = pair.direct.to_dense();
  const auto& s = sel.complement();
  Eigen::MatrixXd G_ss(static_cast<Index>(s.size()), static_cast<Index>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) G_ss(static_cast<Index>(i), static_cast<Index>(j)) = G(s[i], s[j]);
  Eigen::VectorXd moduli = Eigen::EigenSolver<Eigen::MatrixXd>(G_ss).eigenvalues().cwiseAbs();
  std::sort(moduli.data(), moduli.data() + moduli.size(), std::greater<>());
  CHECK(moduli[0] == doctest::Approx(r.diagnostics.lambda_c).epsilon(1e-10));
  const double lambda_2 = moduli[1];

  // Average contraction over the tail of the series.
  const std::size_t tail = std::min<std::size_t>(10, norms.size() - 1);
  const double rate = std::pow(norms.back() / norms[norms.size() - 1 - tail], 1.0 / static_cast<double>(tail));
  CHECK(rate <= lambda_2 * 1.05 + 1e-3);
}

TEST_CASE("reduce: thread count does not change results") {
  const WtnPair pair = build_wtn_pair(synth_tensor(5, 40, 5, 0.2));
  const Selection sel = random_selection(5, 200, 150);  // several 64-column chunks
  ReduceOptions one, four;
  one.threads = 1;
  four.threads = 4;
  const ReducedSet a = reduce(pair.inverted, sel, one);
  const ReducedSet b = reduce(pair.inverted, sel, four);
  CHECK(a.G_R == b.G_R);
  CHECK(a.G_qr == b.G_qr);
}

TEST_CASE("reduce: errors") {
  const WtnPair pair = build_wtn_pair(synth_tensor(6, 10, 3, 0.4));
  ReduceOptions tight;
  tight.max_terms = 2;
  CHECK_THROWS_AS(reduce(pair.direct, random_selection(1, 30, 5), tight), ConvergenceError);
  CHECK_THROWS_AS(reduce(pair.direct, random_selection(1, 31, 5)), ArgumentError);
  CHECK_THROWS_AS(reduce_dense_oracle(pair.direct, random_selection(1, 30, 5), 20), ArgumentError);
}

TEST_CASE("component_weight and split_qr") {
  const WtnPair pair = build_wtn_pair(synth_tensor(3, 4, 2, 0.8));
  CHECK(component_weight(pair.direct.to_dense()) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(component_weight(Eigen::MatrixXd::Zero(4, 4)) == 0.0);

  const Eigen::MatrixXd d = Eigen::Vector3d(0.1, 0.2, 0.3).asDiagonal();
  CHECK(split_qr(d).second.isZero(0.0));
  CHECK(split_qr(d).first == d);

  Eigen::MatrixXd hollow = Eigen::MatrixXd::Random(4, 4);
  hollow.diagonal().setZero();
  CHECK(split_qr(hollow).first.isZero(0.0));

  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd m(6, 6);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng) * std::pow(10.0, trial - 5);
    const auto [qrd, qrnd] = split_qr(m);
    CHECK((qrd + qrnd) == m);
  }
  CHECK_THROWS_AS(split_qr(Eigen::MatrixXd::Zero(2, 3)), ArgumentError);
}
