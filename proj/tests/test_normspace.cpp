#include <doctest.h>

#include <cmath>
#include <limits>

#include "geoembed/errors.hpp"
#include "geoembed/normspace.hpp"

using namespace geoembed;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

MatrixXd cube_facets(int m) { return MatrixXd::Identity(m, m); }

// Cross-polytope {|x|_1 <= 1}: all sign vectors as facet functionals.
MatrixXd cross_facets(int m) {
  MatrixXd f(1 << (m - 1), m);
  for (int s = 0; s < (1 << (m - 1)); ++s) {
    f(s, 0) = 1.0;
    for (int i = 1; i < m; ++i) f(s, i) = (s >> (i - 1)) & 1 ? -1.0 : 1.0;
  }
  return f;
}

}  // namespace

TEST_SUITE("normspace") {

TEST_CASE("raw euclidean norm of (3,4) is 5") {
  const auto s = NormedSpace::lp(2, 2.0);
  CHECK(s.raw_norm(Eigen::Vector2d(3, 4)) == doctest::Approx(5.0));
}

TEST_CASE("isotropic euclidean map is sqrt(m+2) times identity") {
  for (int m : {1, 2, 5, 16}) {
    const auto s = NormedSpace::lp(m, 2.0);
    const MatrixXd expect = std::sqrt(m + 2.0) * MatrixXd::Identity(m, m);
    CHECK((s.iso_map() - expect).norm() < 1e-12);
  }
}

TEST_CASE("lp coordinate variance closed forms") {
  CHECK(lp_coordinate_variance(2, 2.0) == doctest::Approx(0.25));
  CHECK(lp_coordinate_variance(3, 1.0) == doctest::Approx(0.1));
  CHECK(lp_coordinate_variance(7, kInf) == doctest::Approx(1.0 / 3.0));
  // Large p approaches the cube.
  CHECK(lp_coordinate_variance(4, 1e4) == doctest::Approx(1.0 / 3.0).epsilon(1e-3));
}

TEST_CASE("unit ball log volumes") {
  CHECK(std::exp(lp_unit_ball_log_volume(2, 2.0)) == doctest::Approx(M_PI));
  CHECK(std::exp(lp_unit_ball_log_volume(3, 2.0)) == doctest::Approx(4.0 * M_PI / 3.0));
  CHECK(std::exp(lp_unit_ball_log_volume(3, 1.0)) == doctest::Approx(8.0 / 6.0));
  CHECK(std::exp(lp_unit_ball_log_volume(5, kInf)) == doctest::Approx(32.0));
}

TEST_CASE("norm axioms on random triples") {
  Rng rng(11);
  std::normal_distribution<double> g;
  for (double p : {1.0, 1.5, 2.0, 3.0, kInf}) {
    const auto s = NormedSpace::lp(6, p);
    for (int t = 0; t < 200; ++t) {
      VectorXd x(6), y(6);
      for (int i = 0; i < 6; ++i) x[i] = g(rng), y[i] = g(rng);
      const double a = g(rng);
      CHECK(s.norm(a * x) == doctest::Approx(std::abs(a) * s.norm(x)));
      CHECK(s.norm(x + y) <= s.norm(x) + s.norm(y) + 1e-12);
      CHECK(s.norm(x) > 0.0);
    }
    CHECK(s.norm(VectorXd::Zero(6)) == 0.0);
  }
}

TEST_CASE("samples lie in the unit ball") {
  Rng rng(3);
  for (double p : {1.0, 2.0, 3.5, kInf}) {
    const auto s = NormedSpace::lp(5, p);
    for (int t = 0; t < 500; ++t) CHECK(s.norm(s.sample(rng)) <= 1.0 + 1e-12);
  }
}

TEST_CASE("lp samples are isotropic") {
  Rng rng(5);
  for (double p : {1.0, 3.0}) {
    const auto s = NormedSpace::lp(4, p);
    const auto [mean, cov] = empirical_moments(s.sample_batch(100000, rng));
    CHECK(mean.cwiseAbs().maxCoeff() < 0.03);
    CHECK((cov - MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() < 0.05);
  }
}

TEST_CASE("an isotropic ellipsoid whitens to the identity") {
  const int m = 3;
  const MatrixXd q = MatrixXd::Identity(m, m) / (m + 2.0);  // ball of radius sqrt(m+2)
  const auto s = NormedSpace::ellipsoid(q);
  CHECK((s.iso_map() - MatrixXd::Identity(m, m)).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("skewed ellipsoid is isotropic after whitening") {
  MatrixXd q(2, 2);
  q << 4.0, 1.0, 1.0, 0.5;
  const auto s = NormedSpace::ellipsoid(q);
  Rng rng(8);
  const auto [mean, cov] = empirical_moments(s.sample_batch(100000, rng));
  CHECK((cov - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 0.05);
  // The raw body maps onto the isotropic unit ball.
  const Eigen::Vector2d raw(0.3, -0.7);
  CHECK(s.norm(s.iso_map() * raw) == doctest::Approx(s.raw_norm(raw)));
}

TEST_CASE("cube polytope matches the analytic cube") {
  const auto poly = NormedSpace::polytope(cube_facets(3), 60000, 4);
  // Analytic whitening of the unit cube: sqrt(3) * identity.
  CHECK((poly.iso_map() - std::sqrt(3.0) * MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() < 0.08);
}

TEST_CASE("john basis sandwich") {
  Rng rng(21);
  std::normal_distribution<double> g;
  std::vector<NormedSpace> spaces{NormedSpace::lp(6, 1.0), NormedSpace::lp(6, 2.0),
                                  NormedSpace::lp(6, 4.0), NormedSpace::lp(6, kInf),
                                  NormedSpace::polytope(cross_facets(4), 40000, 2)};
  MatrixXd q = MatrixXd::Identity(3, 3);
  q(0, 1) = q(1, 0) = 0.4;
  spaces.push_back(NormedSpace::ellipsoid(q));
  for (const auto& s : spaces) {
    const int m = s.dim();
    const MatrixXd basis = john_basis(s);
    for (int t = 0; t < 2000; ++t) {
      VectorXd a(m);
      for (int i = 0; i < m; ++i) a[i] = g(rng);
      const double x = s.norm(basis * a);
      CHECK(a.norm() <= x * (1 + 1e-9));
      CHECK(x <= std::sqrt(m) * a.norm() * (1 + 1e-9));
      CHECK(s.aux_norm(basis * a) == doctest::Approx(a.norm()));
    }
  }
}

TEST_CASE("descriptor parsing") {
  CHECK(parse_norm_descriptor("lp:2", 3).dim() == 3);
  CHECK(std::isinf(parse_norm_descriptor("lp:inf", 3).p()));
  CHECK(parse_norm_descriptor("lp:1.5", 2).p() == 1.5);
  CHECK_THROWS_AS(parse_norm_descriptor("lp:2", std::nullopt), std::invalid_argument);
  CHECK_THROWS_AS(parse_norm_descriptor("lp:abc", 2), std::invalid_argument);
  CHECK_THROWS_AS(parse_norm_descriptor("banana:1", 2), std::invalid_argument);
  CHECK_THROWS(parse_norm_descriptor("ellipsoid:/nonexistent.csv", 2));
}

TEST_CASE("errors") {
  CHECK_THROWS_AS(NormedSpace::lp(0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(NormedSpace::lp(3, 1e300), std::invalid_argument);
  CHECK_THROWS_AS(NormedSpace::lp(3, 0.5), std::invalid_argument);
  const auto s = NormedSpace::lp(3, 2.0);
  CHECK_THROWS_AS(norm_eval(s, VectorXd::Zero(4)), DimensionError);
  CHECK_THROWS_AS(inverse_sqrt_spd(MatrixXd::Zero(2, 2)), NumericError);
  ConstantsConfig bad;
  bad.kappa = 1.0;
  CHECK_THROWS(bad.validate());
}

TEST_CASE("thin-shell diagnostic") {
  Rng rng(1);
  const auto s = NormedSpace::lp(64, 2.0);
  const auto r = thinshell_diagnostic(s, 5000, {}, rng, 5000);
  CHECK(r.band == doctest::Approx(std::pow(64.0, 0.25)));
  CHECK(r.exceed_fraction <= 0.05);
  CHECK_FALSE(r.small_m);
  std::size_t total = 0;
  for (auto c : r.histogram) total += c;
  CHECK(total == 5000);
  CHECK(r.gaussian_hits <= r.gaussian_bound * r.gaussian_trials + 5);
  CHECK_THROWS(thinshell_diagnostic(s, 10, {}, rng));
  CHECK(thinshell_diagnostic(NormedSpace::lp(4, 2.0), 1000, {}, rng).small_m);
}

}  // TEST_SUITE
