#include <doctest.h>

#include <cmath>

#include "geoembed/embedder.hpp"
#include "geoembed/errors.hpp"

using namespace geoembed;

namespace {

// zeta(v) rebuilt from the stored draws along the root path.
VectorXd zeta_from_scratch(const EmbeddingState& st, Vertex v) {
  const auto& p = st.params();
  VectorXd ball = VectorXd::Zero(p.m), reg = VectorXd::Zero(p.m);
  for (EdgeId e : st.tree().path(st.tree().root(), v)) {
    ball += st.ball_vectors().col(e);
    reg += st.space().john_basis() * st.gaussian_coefficients().col(e);
  }
  return p.shrink * ball + p.delta_reg * reg;
}

double max_scratch_error(const EmbeddingState& st) {
  double worst = 0;
  for (Vertex v = 0; v < st.tree().size(); ++v) {
    worst = std::max(worst, (st.zeta(v) - zeta_from_scratch(st, v)).cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace

TEST_SUITE("embedder") {

TEST_CASE("theory schedule at N=1000, delta=3") {
  const auto p = derive_params(1000, 3, Mode::theory);
  CHECK(p.m == 229);
  CHECK(p.k1 == 9);
  CHECK(p.k0 == 256);
  CHECK(p.c1 == 0.25);
  CHECK(p.c2 == doctest::Approx(0.0625));
  CHECK(p.delta_reg == doctest::Approx(0.654983262274).epsilon(1e-10));
  CHECK(p.ell0 == doctest::Approx(3.090671124977).epsilon(1e-10));
  CHECK(p.shrink == doctest::Approx(0.855235172699).epsilon(1e-10));
  CHECK(p.max_local_distance() == 3);
}

TEST_CASE("practical schedule at N=255") {
  const auto p = derive_params(255, 3, Mode::practical);
  CHECK(p.m == 26);
  CHECK(p.k0 == 8);
  CHECK(p.delta_reg == doctest::Approx(0.006587862510448).epsilon(1e-10));
  CHECK(p.ell0 == doctest::Approx(3.043322161193).epsilon(1e-10));
}

TEST_CASE("overrides") {
  ParamOverrides o;
  o.m = 40;
  o.k0 = 5;
  o.delta_scale = 1.0;
  const auto p = derive_params(255, 3, Mode::practical, o);
  CHECK(p.m == 40);
  CHECK(p.k0 == 5);
  CHECK(p.delta_reg == doctest::Approx(0.6587862510448).epsilon(1e-10));
  CHECK_THROWS_AS(derive_params(255, 3, Mode::theory, o), std::invalid_argument);
  CHECK_THROWS_AS(derive_params(7, 3, Mode::practical), std::invalid_argument);
  CHECK_THROWS_AS(derive_params(255, 2, Mode::practical), std::invalid_argument);
  CHECK(parse_mode("theory") == Mode::theory);
  CHECK_THROWS(parse_mode("fast"));
}

TEST_CASE("schedule from log N matches the integer form") {
  const auto a = derive_params(5000, 4, Mode::theory);
  const auto b = derive_params_log(std::log(5000.0), 4, Mode::theory);
  CHECK(a.m == b.m);
  CHECK(a.delta_reg == doctest::Approx(b.delta_reg));
  CHECK(a.k1 == b.k1);
  const auto huge = derive_params_log(1e12, 3, Mode::theory);
  CHECK(huge.m == 0);
  CHECK(huge.dim_real > 1e12);
}

TEST_CASE("state matches a from-scratch rebuild, before and after resampling") {
  const Tree t = gen_heap_tree(2, 63);
  const auto params = derive_params(63, 3, Mode::practical);
  const auto space = NormedSpace::lp(params.m, 1.0);
  EmbeddingState st = embed(t, space, params, 17);
  CHECK(max_scratch_error(st) < 1e-12);

  Rng rng(2);
  std::uniform_int_distribution<int> pick(0, t.num_edges() - 1);
  for (int round = 0; round < 30; ++round) {
    std::vector<EdgeId> edges{pick(rng), pick(rng)};
    const auto which = static_cast<Resample>(round % 3);
    resample_edges(st, edges, which);
  }
  CHECK(max_scratch_error(st) < 1e-12);
  const MatrixXd before = st.zeta();
  st.recompute();
  CHECK((st.zeta() - before).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("resampling one edge leaves the other draws alone") {
  const Tree t = gen_path_tree(12);
  ParamOverrides o;
  o.m = 5;
  const auto params = derive_params(12, 3, Mode::practical, o);
  const auto space = NormedSpace::lp(5, 2.0);
  EmbeddingState st(t, space, params, 3);
  const MatrixXd y = st.ball_vectors(), g = st.gaussian_coefficients();
  const std::vector<EdgeId> one{4};
  st.resample(one, Resample::ball);
  CHECK(st.ball_draws(4) == 2);
  CHECK(st.gaussian_draws(4) == 1);
  for (EdgeId e = 0; e < t.num_edges(); ++e) {
    CHECK((st.gaussian_coefficients().col(e) - g.col(e)).norm() == 0.0);
    if (e != 4) CHECK((st.ball_vectors().col(e) - y.col(e)).norm() == 0.0);
  }
  CHECK((st.ball_vectors().col(4) - y.col(4)).norm() > 0.0);
  // Vertices above the edge are untouched.
  for (Vertex v = 0; v <= 4; ++v) CHECK(st.zeta(v) == EmbeddingState(t, space, params, 3).zeta(v));
}

TEST_CASE("same seed, same draws; replay after resampling") {
  const Tree t = gen_heap_tree(2, 31);
  const auto params = derive_params(31, 3, Mode::practical);
  const auto space = NormedSpace::lp(params.m, 2.0);
  EmbeddingState a(t, space, params, 9), b(t, space, params, 9), c(t, space, params, 10);
  CHECK(a.zeta() == b.zeta());
  CHECK(a.zeta() != c.zeta());
  const std::vector<EdgeId> es{3, 7};
  a.resample(es, Resample::both);
  b.resample(es, Resample::both);
  CHECK(a.zeta() == b.zeta());
}

TEST_CASE("pair and path differences agree") {
  Rng rng(6);
  const Tree t = gen_random_tree(60, 4, rng);
  const auto params = derive_params(60, 4, Mode::practical);
  const auto space = NormedSpace::lp(params.m, 3.0);
  const EmbeddingState st(t, space, params, 1);
  for (Vertex u = 0; u < t.size(); u += 3) {
    for (Vertex v = u + 1; v < t.size(); v += 5) {
      CHECK((st.pair_difference(u, v) - st.path_difference(u, v)).cwiseAbs().maxCoeff() < 1e-12);
      const double bound = st.lipschitz_bound() * t.dist(u, v);
      CHECK(space.norm(st.pair_difference(u, v)) <= bound * (1 + 1e-12));
    }
  }
  CHECK_THROWS(st.pair_difference(2, 2));
  CHECK_THROWS(st.pair_difference(0, 600));
}

TEST_CASE("ball vectors lie in the unit ball") {
  const Tree t = gen_heap_tree(3, 40);
  const auto params = derive_params(40, 4, Mode::practical);
  const auto space = NormedSpace::lp(params.m, 1.0);
  const EmbeddingState st(t, space, params, 4);
  for (EdgeId e = 0; e < t.num_edges(); ++e) CHECK(space.norm(st.ball_vectors().col(e)) <= 1.0 + 1e-12);
}

TEST_CASE("errors") {
  const Tree t = gen_heap_tree(2, 31);
  const auto params = derive_params(31, 3, Mode::practical);
  const auto wrong = NormedSpace::lp(params.m + 1, 2.0);
  CHECK_THROWS_AS(EmbeddingState(t, wrong, params, 1), DimensionError);
  const auto space = NormedSpace::lp(params.m, 2.0);
  EmbeddingState st(t, space, params, 1);
  const std::vector<EdgeId> bad{99};
  CHECK_THROWS_AS(st.resample(bad, Resample::ball), std::out_of_range);
}

}  // TEST_SUITE
