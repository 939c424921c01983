#include <doctest.h>

#include <sstream>

#include "oracles.hpp"
#include "test_util.hpp"
#include "wtn/sensitivity.hpp"

using namespace wtn;

namespace {

// X imports only from the source Z; Y imports from X and Z; Z imports from Y.
MoneyTensor toy() {
  return oracle::make_tensor({"X", "Y", "Z"}, {"00"},
                             {{0, 0, 2, 10.0}, {0, 1, 2, 5.0}, {0, 1, 0, 3.0}, {0, 2, 1, 4.0}});
}

ShockSpec toy_spec(double delta = kDefaultDelta) { return ShockSpec{2, 0, {0, 1}, delta}; }

}  // namespace

TEST_CASE("balance") {
  const Eigen::Vector3d p(0.2, 0.3, 0.0), p_star(0.2, 0.6, 0.5);
  const Eigen::VectorXd b = balance(p_star, p);
  CHECK(b[0] == 0.0);
  CHECK(b[1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(b[2] == 1.0);
  CHECK(balance(p, p_star) == -b);
  CHECK_THROWS_AS(balance(Eigen::Vector2d(0.0, 1.0), Eigen::Vector2d(0.0, 1.0)), DomainError);
  CHECK_THROWS_AS(balance(Eigen::Vector2d(-0.1, 1.0), Eigen::Vector2d(0.1, 1.0)), ArgumentError);
  CHECK_THROWS_AS(balance(Eigen::Vector2d(0.1, 1.0), Eigen::Vector3d(0.1, 1.0, 1.0)), ArgumentError);
}

TEST_CASE("shock spec validation") {
  const Registry reg({"A", "B", "C"}, {"00", "01"});
  CHECK_NOTHROW(validate(ShockSpec{2, 1, {0, 1}, 1e-3}, reg));
  CHECK_NOTHROW(validate(ShockSpec{2, 1, {0, 1}, 0.0}, reg));
  CHECK_THROWS_AS(validate(ShockSpec{2, 1, {}, 1e-3}, reg), ArgumentError);
  CHECK_THROWS_AS(validate(ShockSpec{2, 1, {0, 2}, 1e-3}, reg), ArgumentError);
  CHECK_THROWS_AS(validate(ShockSpec{2, 1, {0, 0}, 1e-3}, reg), ArgumentError);
  CHECK_THROWS_AS(validate(ShockSpec{2, 2, {0}, 1e-3}, reg), ArgumentError);
  CHECK_THROWS_AS(validate(ShockSpec{2, 1, {0}, 1.0}, reg), ArgumentError);
  CHECK_THROWS_AS(validate(ShockSpec{2, 1, {0}, -1e-3}, reg), ArgumentError);

  const Selection sel = shock_selection(ShockSpec{2, 1, {1, 0}, 1e-3}, reg);
  CHECK(sel.nodes() == std::vector<Index>{2, 3, 0, 1, 5});
}

TEST_CASE("apply_shock: hand-computed 3-node toy") {
  Eigen::Matrix3d direct, inverted;
  direct << 0.6, 0.1, 0.2,  //
      0.3, 0.5, 0.3,        //
      0.1, 0.4, 0.5;
  inverted << 0.5, 0.2, 0.1,  //
      0.3, 0.4, 0.1,          //
      0.2, 0.4, 0.8;
  const ShockedPair s = apply_shock(direct, inverted, 2, 0.1);

  CHECK(s.direct.col(2).isApprox(Eigen::Vector3d(0.22, 0.33, 0.5) / 1.05, 1e-15));
  CHECK(s.direct.leftCols(2) == direct.leftCols(2));
  CHECK(s.direct(2, 2) < direct(2, 2));

  CHECK(s.inverted.col(0).isApprox(Eigen::Vector3d(0.5, 0.3, 0.22) / 1.02, 1e-15));
  CHECK(s.inverted.col(1).isApprox(Eigen::Vector3d(0.2, 0.4, 0.44) / 1.04, 1e-15));
  CHECK(s.inverted.col(2) == inverted.col(2));

  const ShockedPair same = apply_shock(direct, inverted, 2, 0.0);
  CHECK(same.direct == direct);
  CHECK(same.inverted == inverted);
  CHECK_THROWS_AS(apply_shock(direct, inverted, 3, 0.1), ArgumentError);
}

TEST_CASE("build_shock_matrices: locality and renormalization") {
  const MoneyTensor t = synth_tensor(9, 8, 3, 0.5);
  const ShockSpec spec{5, 1, {0, 2, 3}, 1e-3};
  const ShockBaseline base = shock_baseline(t, kDefaultAlpha, spec);
  CHECK(base.selection.size() == 10);
  for (double delta : {0.0, 1e-3, 0.05}) {
    const ShockedPair s = build_shock_matrices(t, kDefaultAlpha, spec, delta);
    const Index src = base.selection.size() - 1;
    CHECK(s.direct.leftCols(src) == base.direct.G_R.leftCols(src));
    CHECK(s.inverted.col(src) == base.inverted.G_R.col(src));
    CHECK((s.direct.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    CHECK((s.inverted.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-12);
    if (delta == 0.0) {
      CHECK(s.direct == base.direct.G_R);
      CHECK(s.inverted == base.inverted.G_R);
    } else {
      CHECK(s.direct(src, src) < base.direct.G_R(src, src));
    }
  }
}

TEST_CASE("reduced sensitivity: 3-country toy against the full-network shock") {
  const MoneyTensor t = toy();
  const SensitivityReport r = reduced_balance_sensitivity(t, kDefaultAlpha, toy_spec());
  REQUIRE(r.derivative.size() == 2);
  CHECK(r.countries == std::vector<std::string>{"X", "Y"});
  CHECK(r.source == "Z:00");
  CHECK(r.method == SensitivityMethod::regomax);

  const auto [G, G_star] = oracle::dense_wtn_pair(t, kDefaultAlpha);
  const double h = kDefaultDelta;
  const Eigen::VectorXd oracle_derivative =
      (oracle::full_network_shock_balance(G, G_star, 2, {0, 1}, h) -
       oracle::full_network_shock_balance(G, G_star, 2, {0, 1}, -h)) /
      (2 * h);
  const Eigen::VectorXd oracle_base = oracle::full_network_shock_balance(G, G_star, 2, {0, 1}, 0.0);

  CHECK((r.balance - oracle_base).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((r.derivative - oracle_derivative).cwiseAbs().maxCoeff() < 1e-7);
  CHECK(r.derivative[0] < 0.0);
  // Frozen from the dense full-network computation above.
  CHECK(r.derivative[0] == doctest::Approx(-0.2176).epsilon(1e-3));
  CHECK(r.derivative[1] == doctest::Approx(-0.0388).epsilon(1e-2));

  for (Index c = 0; c < 2; ++c) {
    CHECK(std::abs(r.derivative[c] - r.derivative_half[c]) < 1e-2 * std::abs(r.derivative[c]));
    CHECK(r.richardson_error[c] == doctest::Approx(std::abs(r.derivative[c] - r.derivative_half[c]) / 3));
    CHECK(std::abs(r.balance[c]) <= 1.0);
  }

  // Rescaling the source's export flows in the tensor and rebuilding reaches the matrices
  // differently; shown for comparison only.
  auto tensor_route = [&](double d) {
    const MoneyTensor s = t.scaled([d](const TradeFlow& f) { return f.exporter == 2 && f.importer != 2 ? 1 + d : 1.0; });
    const auto [g, gs] = oracle::dense_wtn_pair(s, kDefaultAlpha);
    const Eigen::VectorXd p = oracle::stationary(g), ps = oracle::stationary(gs);
    return Eigen::Vector2d((ps[0] - p[0]) / (ps[0] + p[0]), (ps[1] - p[1]) / (ps[1] + p[1]));
  };
  const Eigen::Vector2d tensor_derivative = (tensor_route(h) - tensor_route(-h)) / (2 * h);
  MESSAGE("reduced dB/ddelta = (" << r.derivative[0] << ", " << r.derivative[1]
                                  << "), tensor-rescaling route = (" << tensor_derivative[0] << ", "
                                  << tensor_derivative[1] << ")");
}

TEST_CASE("reduced sensitivity: derivative stability and report invariants") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    const MoneyTensor t = synth_tensor(seed, 8, 3, 0.5);
    const ShockSpec spec{7, 2, {0, 1, 4}, 1e-3};
    const SensitivityReport r = reduced_balance_sensitivity(t, kDefaultAlpha, spec);
    CHECK(r.derivative.allFinite());
    CHECK(r.balance.cwiseAbs().maxCoeff() <= 1.0);
    CHECK(balance(r.p_star, r.p) == r.balance);
    for (Index c = 0; c < r.derivative.size(); ++c)
      CHECK(std::abs(r.derivative[c] - r.derivative_half[c]) <=
            1e-2 * std::abs(r.derivative[c]) + 1e-9);

    const SensitivityReport zero = reduced_balance_sensitivity(t, kDefaultAlpha, ShockSpec{7, 2, {0, 1, 4}, 0.0});
    CHECK(zero.derivative.isZero(0.0));
    CHECK(zero.balance == r.balance);
  }
}

TEST_CASE("reduced sensitivity: source without trade to the group") {
  // Z only trades with W; X and Y see Z only through the network.
  const MoneyTensor t = oracle::make_tensor(
      {"X", "Y", "Z", "W"}, {"00"},
      {{0, 0, 1, 2.0}, {0, 1, 0, 3.0}, {0, 3, 2, 5.0}, {0, 2, 3, 1.0}, {0, 3, 0, 1.0}});
  const SensitivityReport r = reduced_balance_sensitivity(t, kDefaultAlpha, ShockSpec{2, 0, {0, 1}, 1e-3});
  CHECK(r.derivative.allFinite());
  const SensitivityReport hat = hat_balance_sensitivity(t, ShockSpec{2, 0, {0, 1}, 1e-3});
  CHECK(hat.derivative.isZero(0.0));
  MESSAGE("reduced dB/ddelta with no direct source trade = (" << r.derivative[0] << ", " << r.derivative[1] << ")");
}

TEST_CASE("hat sensitivity") {
  // X imports only from the source Z and exports to Y; Y trades only with X and W.
  const MoneyTensor t = oracle::make_tensor(
      {"X", "Y", "Z", "W"}, {"00"},
      {{0, 0, 2, 10.0}, {0, 1, 0, 3.0}, {0, 3, 1, 4.0}, {0, 2, 3, 2.0}});
  const SensitivityReport r = hat_balance_sensitivity(t, ShockSpec{2, 0, {0, 1}, 1e-3});
  CHECK(r.method == SensitivityMethod::hat);
  CHECK(r.derivative[1] == 0.0);
  // B_X = (E - I)/(E + I) with I = 10 (1 + delta), E = 3.
  const double E = 3.0, I = 10.0;
  CHECK(r.derivative[0] < 0.0);
  CHECK(r.derivative[0] == doctest::Approx(-2.0 * E * I / ((E + I) * (E + I))).epsilon(1e-5));
  CHECK(r.balance[0] == doctest::Approx((E - I) / (E + I)).epsilon(1e-14));

  const SensitivityReport zero = hat_balance_sensitivity(t, ShockSpec{2, 0, {0, 1}, 0.0});
  CHECK(zero.derivative.isZero(0.0));
}

TEST_CASE("global price sensitivity") {
  SUBCASE("single product: scaling is absorbed") {
    const MoneyTensor t = synth_tensor(2, 6, 1, 0.7);
    const SensitivityReport r = global_price_sensitivity(t, kDefaultAlpha, 0, {0, 1, 2});
    CHECK(r.derivative.cwiseAbs().maxCoeff() < 1e-8);
    CHECK(r.source == "*:00");
  }
  SUBCASE("delta = 0") {
    const MoneyTensor t = synth_tensor(2, 6, 2, 0.7);
    CHECK(global_price_sensitivity(t, kDefaultAlpha, 1, {0, 1}, 0.0).derivative.isZero(0.0));
  }
  SUBCASE("two products: extrapolated brute force") {
    const MoneyTensor t = synth_tensor(3, 5, 2, 0.9);
    const std::vector<Index> group{0, 3};
    auto brute = [&](double d) {
      const MoneyTensor s = t.scaled([d](const TradeFlow& f) { return f.product == 1 ? 1 + d : 1.0; });
      const auto [g, gs] = oracle::dense_wtn_pair(s, kDefaultAlpha);
      const Eigen::VectorXd p = oracle::stationary(g), ps = oracle::stationary(gs);
      Eigen::Vector2d b;
      for (int k = 0; k < 2; ++k) {
        const Index c = group[static_cast<std::size_t>(k)];
        const double pc = p.segment(2 * c, 2).sum(), psc = ps.segment(2 * c, 2).sum();
        b[k] = (psc - pc) / (psc + pc);
      }
      return b;
    };
    const double h1 = 1e-2, h2 = 1e-3;
    const Eigen::Vector2d d1 = (brute(h1) - brute(-h1)) / (2 * h1);
    const Eigen::Vector2d d2 = (brute(h2) - brute(-h2)) / (2 * h2);
    const Eigen::Vector2d extrapolated = (h1 * h1 * d2 - h2 * h2 * d1) / (h1 * h1 - h2 * h2);
    const SensitivityReport r = global_price_sensitivity(t, kDefaultAlpha, 1, group);
    CHECK((r.derivative - extrapolated).cwiseAbs().maxCoeff() < 1e-6);
    CHECK_THROWS_AS(global_price_sensitivity(t, kDefaultAlpha, 2, group), ArgumentError);
  }
}

TEST_CASE("report csv") {
  SensitivityReport r;
  r.method = SensitivityMethod::hat;
  r.countries = {"NL", "IT"};
  r.balance = Eigen::Vector2d(0.25, -0.5);
  r.derivative = Eigen::Vector2d(-0.125, 1e-3);
  r.source = "RU:33";
  r.delta = 1e-3;
  testing::TempDir dir;
  write_report_csv(r, dir / "r.csv");
  CHECK(testing::read_file(dir / "r.csv") ==
        "country,balance,dB_ddelta,method,source,delta\n"
        "NL,0.25,-0.125,hat,RU:33,0.001\n"
        "IT,-0.5,0.001,hat,RU:33,0.001\n");
  CHECK(to_string(SensitivityMethod::global_price) == "global-price");
}
