#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>

#include "geoembed/errors.hpp"
#include "geoembed/verifier.hpp"

using namespace geoembed;

namespace {

// Literal definition: every pair, no pruning.
ViolationReport literal(const MatrixXd& pts, const Tree& t, const NormedSpace& s, double margin) {
  ViolationReport r;
  for (Vertex u = 0; u < t.size(); ++u) {
    for (Vertex v = u + 1; v < t.size(); ++v) {
      const double d = s.norm(pts.col(u) - pts.col(v));
      if (t.adjacent(u, v) && d > 1.0 - margin) r.edge_violations.push_back({u, v, d});
      if (!t.adjacent(u, v) && d <= 1.0 + margin) r.nonedge_violations.push_back({u, v, d});
    }
  }
  return r;
}

bool same(const std::vector<PairViolation>& a, const std::vector<PairViolation>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].u != b[i].u || a[i].v != b[i].v || a[i].distance != b[i].distance) return false;
  }
  return true;
}

MatrixXd random_map(int m, int n, double side, Rng& rng) {
  std::uniform_real_distribution<double> u(-side, side);
  MatrixXd p(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) p(i, j) = u(rng);
  return p;
}

}  // namespace

TEST_SUITE("verifier") {

TEST_CASE("single pairs") {
  const Tree t = gen_path_tree(3);  // edges 0-1, 1-2; non-edge 0-2
  const auto s = NormedSpace::lp(2, 2.0);
  MatrixXd p(2, 3);
  p << 0.0, 0.99, 0.8,
       0.0, 0.0, 0.0;
  p = s.iso_map() * p;  // raw Euclidean units
  const auto rep = verify(p, t, s, {0.0, VerifyMode::exact, 1});
  CHECK(rep.edge_violations.empty());  // edge at 0.99
  REQUIRE(rep.nonedge_violations.size() == 1);
  CHECK(rep.nonedge_violations[0].u == 0);
  CHECK(rep.nonedge_violations[0].v == 2);
  CHECK(rep.nonedge_violations[0].distance == doctest::Approx(0.8));
  CHECK(rep.pairs_considered == 3);
  CHECK(rep.max_edge_distance == doctest::Approx(0.99));
}

TEST_CASE("margin") {
  const Tree t = gen_path_tree(2);
  const auto s = NormedSpace::lp(1, 2.0);
  MatrixXd p(1, 2);
  p << 0.0, s.iso_map()(0, 0);  // raw distance exactly 1
  CHECK(verify(p, t, s, {0.0}).embedding_ok());
  CHECK_FALSE(verify(p, t, s, {1e-9}).embedding_ok());
  CHECK_THROWS_AS(verify(p, t, s, {-1.0}), std::invalid_argument);
  CHECK_THROWS(verify(MatrixXd::Zero(1, 1), t, s));  // missing vertex
}

TEST_CASE("pruned and exact agree with the literal double loop") {
  Rng rng(1234);
  std::uniform_int_distribution<int> size(2, 500);
  const int dims[] = {1, 2, 3, 6, 24, 30};
  const double ps[] = {1.0, 2.0, std::numeric_limits<double>::infinity()};
  for (int trial = 0; trial < 100; ++trial) {
    const int n = size(rng);
    const int m = dims[trial % 6];
    const auto s = NormedSpace::lp(m, ps[trial % 3]);
    const Tree t = gen_random_tree(n, 3 + trial % 3, rng);
    // Side chosen so that a fair share of pairs land near distance 1.
    const double side = 0.6 * std::pow(static_cast<double>(n), 1.0 / m) * std::sqrt(static_cast<double>(m));
    const MatrixXd p = random_map(m, n, side, rng);
    const double margin = trial % 2 ? 0.0 : 1e-9;
    const auto oracle = literal(p, t, s, margin);
    const auto exact = verify(p, t, s, {margin, VerifyMode::exact, 1});
    const auto pruned = verify(p, t, s, {margin, VerifyMode::pruned, 1 + trial % 3});
    CHECK(same(exact.edge_violations, oracle.edge_violations));
    CHECK(same(exact.nonedge_violations, oracle.nonedge_violations));
    CHECK(same(pruned.edge_violations, oracle.edge_violations));
    CHECK(same(pruned.nonedge_violations, oracle.nonedge_violations));
  }
}

TEST_CASE("worker count does not change the report") {
  Rng rng(3);
  const Tree t = gen_random_tree(300, 4, rng);
  const auto s = NormedSpace::lp(3, 2.0);
  const MatrixXd p = random_map(3, 300, 4.0, rng);
  const auto a = verify(p, t, s, {0.0, VerifyMode::pruned, 1});
  const auto b = verify(p, t, s, {0.0, VerifyMode::pruned, 4});
  const auto c = verify(p, t, s, {0.0, VerifyMode::exact, 3});
  CHECK(same(a.nonedge_violations, b.nonedge_violations));
  CHECK(same(a.nonedge_violations, c.nonedge_violations));
  CHECK(a.norm_evaluations <= c.norm_evaluations);
}

TEST_CASE("L-event thresholds") {
  ParamOverrides o;
  o.m = 64;
  const auto p = derive_params(1000, 3, Mode::practical, o);
  CHECK(l_threshold(p, 2) == doctest::Approx(1.022097086912).epsilon(1e-10));
  CHECK(l_threshold(p, 300) == doctest::Approx(4.161791450288).epsilon(1e-10));
  CHECK_THROWS(l_threshold(p, 1));
}

TEST_CASE("L-violations match a literal scan") {
  const Tree t = gen_heap_tree(2, 127);
  ParamOverrides o;
  o.m = 4;
  o.ell0_scale = 2.0;
  const auto params = derive_params(127, 3, Mode::practical, o);
  const auto s = NormedSpace::lp(4, 1.0);
  const EmbeddingState st(t, s, params, 77);
  const auto got = enumerate_l_violations(st);
  std::vector<LViolation> want;
  for (Vertex u = 0; u < t.size(); ++u) {
    for (Vertex v = u + 1; v < t.size(); ++v) {
      const int k = t.dist(u, v);
      if (k < 2 || k > params.max_local_distance()) continue;
      const double val = s.norm(st.ball_sum_difference(u, v));
      if (val <= l_threshold(params, k)) want.push_back({u, v, k, val, l_threshold(params, k)});
    }
  }
  REQUIRE(got.size() == want.size());
  CHECK(!got.empty());
  for (std::size_t i = 0; i < got.size(); ++i) {
    CHECK(got[i].u == want[i].u);
    CHECK(got[i].v == want[i].v);
    CHECK(got[i].k == want[i].k);
    CHECK(got[i].value == doctest::Approx(want[i].value));
  }
}

TEST_CASE("no L range for tiny ell0") {
  const Tree t = gen_path_tree(20);
  ParamOverrides o;
  o.ell0_scale = 0.1;
  const auto params = derive_params(20, 3, Mode::practical, o);
  REQUIRE(params.ell0 < 2.0);
  const auto s = NormedSpace::lp(params.m, 2.0);
  CHECK(enumerate_l_violations(EmbeddingState(t, s, params, 1)).empty());
}

TEST_CASE("aux norm") {
  Rng rng(8);
  std::normal_distribution<double> g;
  for (double p : {1.0, 2.0, 5.0, std::numeric_limits<double>::infinity()}) {
    const auto s = NormedSpace::lp(7, p);
    for (int j = 0; j < 7; ++j) CHECK(aux_norm_eval(s, s.john_basis().col(j)) == doctest::Approx(1.0));
    CHECK(aux_norm_eval(s, VectorXd::Zero(7)) == 0.0);
    for (int t = 0; t < 10000; ++t) {
      VectorXd x(7);
      for (int i = 0; i < 7; ++i) x[i] = g(rng);
      const double aux = aux_norm_eval(s, x), xn = s.norm(x);
      CHECK(aux - xn <= 1e-9);
      CHECK(xn - std::sqrt(7.0) * aux <= 1e-9);
    }
  }
}

TEST_CASE("distortion profile") {
  const auto s = NormedSpace::lp(2, 2.0);
  MatrixXd two(2, 2);
  two << 0.0, 0.6, 0.0, 0.0;
  two = s.iso_map() * two;
  const auto prof = distortion_profile(two, gen_path_tree(2), s, 8);
  CHECK(prof.max_lipschitz == doctest::Approx(0.6));
  CHECK_FALSE(prof.min_holder.has_value());

  MatrixXd three(2, 3);
  three << 0.0, 0.9, 1.5, 0.0, 0.0, 0.0;
  three = s.iso_map() * three;
  const auto p3 = distortion_profile(three, gen_path_tree(3), s, 1);
  CHECK(p3.max_lipschitz == doctest::Approx(0.9));
  REQUIRE(p3.min_holder.has_value());
  CHECK(*p3.min_holder == doctest::Approx(1.5 / std::pow(2.0, 0.1)));
  REQUIRE(p3.bands.size() >= 2);
}

TEST_CASE("dimension lower bound") {
  CHECK(lower_bound_dim(1000000) == doctest::Approx(2.630732176796).epsilon(1e-10));
  CHECK_THROWS(lower_bound_dim(7));
}

TEST_CASE("packing certificate") {
  const auto s = NormedSpace::lp(1, 2.0);
  const auto c = packing_certificate(3, 13, 1, &s);
  CHECK(c.h0 == 3);
  CHECK(c.independent_set * 2 >= 13);
  REQUIRE(c.has_volume);
  // Euclidean: the inequality is N/2 <= (2 h0 + 1)^m.
  CHECK(c.log_container_volume - c.log_packed_volume ==
        doctest::Approx(std::log(7.0) - std::log(6.5)));
  CHECK(c.volume_inequality_holds);

  const auto big = packing_certificate(3, 1000000, 2);
  CHECK(big.below_bound);
  CHECK(big.verdict == "non-embeddable tree exists");
  CHECK(big.instance.find("part-a") != std::string::npos);
  CHECK(packing_certificate(3, 1000000, 5).verdict == "no certificate");

  // Euclidean m=2 fails the volume inequality for large N.
  const auto s2 = NormedSpace::lp(2, 2.0);
  const auto v = packing_certificate(3, 1000, 3, &s2);
  CHECK(v.has_volume);
  CHECK_THROWS(packing_certificate(2, 100, 3));
}

TEST_CASE("one-dimensional star obstruction") {
  const Tree star = gen_star_tree(3);
  const auto s = NormedSpace::lp(1, 2.0);
  Rng rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int t = 0; t < 2000; ++t) {
    MatrixXd p(1, 4);
    for (int j = 0; j < 4; ++j) p(0, j) = u(rng);
    CHECK_FALSE(verify(p, star, s, {0.0, VerifyMode::exact, 1}).embedding_ok());
  }
}

}  // TEST_SUITE
