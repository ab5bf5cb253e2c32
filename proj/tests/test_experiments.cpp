#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>

#include "geoembed/experiments.hpp"
#include "geoembed/io.hpp"

using namespace geoembed;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("geoembed_test_" + name)).string();
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("clopper-pearson against reference values") {
  auto ci = clopper_pearson(0, 10);
  CHECK(ci.lower == 0.0);
  CHECK(ci.upper == doctest::Approx(0.3084971078187608).epsilon(1e-10));
  ci = clopper_pearson(5, 10);
  CHECK(ci.lower == doctest::Approx(0.18708602844739855).epsilon(1e-10));
  CHECK(ci.upper == doctest::Approx(0.8129139715526015).epsilon(1e-10));
  ci = clopper_pearson(0, 100000);
  CHECK(ci.upper == doctest::Approx(3.6888114157924206e-05).epsilon(1e-9));
  ci = clopper_pearson(8, 100000);
  CHECK(ci.lower == doctest::Approx(3.4538934180882885e-05).epsilon(1e-9));
  CHECK(ci.upper == doctest::Approx(1.576257736173694e-04).epsilon(1e-9));
  ci = clopper_pearson(10, 10);
  CHECK(ci.lower == doctest::Approx(0.6915028921812392).epsilon(1e-10));
  CHECK(ci.upper == 1.0);
  CHECK_THROWS(clopper_pearson(0, 0));
  CHECK_THROWS(clopper_pearson(3, 2));
}

TEST_CASE("volume constants") {
  const auto two = check_volume_bound(2.0, {2});
  CHECK(std::exp(two.rows[0].log_volume) == doctest::Approx(4.0 * M_PI));
  CHECK(two.rows[0].constant == doctest::Approx(3.5449077018));
  CHECK(two.rows[0].cross_check == doctest::Approx(two.rows[0].constant));
  const auto cube = check_volume_bound(kInf, {1, 5, 40});
  for (const auto& r : cube.rows) {
    CHECK(r.constant == doctest::Approx(2.0 * std::sqrt(3.0)));
    CHECK(r.cross_check == doctest::Approx(r.constant));
  }
  std::vector<int> ms;
  for (int m = 1; m <= 64; ++m) ms.push_back(m);
  for (double p : {1.0, 2.0, kInf}) {
    const auto rep = check_volume_bound(p, ms);
    CHECK(rep.bounded);
    CHECK(rep.max_constant <= 6.0);
    if (p == 2.0) {
      for (const auto& r : rep.rows) CHECK(r.cross_check == doctest::Approx(r.constant).epsilon(1e-10));
    }
  }
  CHECK_THROWS(check_volume_bound(0.5, {2}));
  CHECK_THROWS(check_volume_bound(2.0, {0}));
}

TEST_CASE("large-k validator") {
  const auto s = NormedSpace::lp(16, 2.0);
  CHECK(large_k_threshold(0.25, {}) == doctest::Approx(256.0));
  CHECK_THROWS_AS(mc_large_k_small_ball(s, 5, 0.25, 100, 1), std::invalid_argument);
  const auto e = mc_large_k_small_ball(s, 300, 0.25, 2000, 1);
  CHECK(e.bound == doctest::Approx(1.0 / 90000.0));
  CHECK(e.threshold == doctest::Approx(4.16179145));
  CHECK(e.hits == 0);
  const auto again = mc_large_k_small_ball(s, 300, 0.25, 2000, 1);
  CHECK(again.hits == e.hits);
  const auto one = mc_large_k_small_ball(s, 1, 0.25, 500, 2, true);
  CHECK(one.hits == 500);  // ball membership
  CHECK_FALSE(one.bound_applicable);
  CHECK_FALSE(one.consistent());
  CHECK(one.exploratory);
  CHECK_THROWS(mc_large_k_small_ball(s, 300, 0.25, 0, 1));
}

TEST_CASE("small-k validator") {
  const auto s = NormedSpace::lp(64, 2.0);
  const auto e = mc_small_k_near_unit(s, 2, 0.25, 5000, 3);
  CHECK(e.threshold == doctest::Approx(1.0220970869));
  CHECK(e.bound == doctest::Approx(0.1860401384));
  CHECK(e.consistent());
  CHECK(e.conclusive);
  const auto tiny = mc_small_k_near_unit(NormedSpace::lp(1, 2.0), 2, 0.25, 100, 3);
  CHECK_FALSE(tiny.conclusive);
  CHECK_FALSE(tiny.warnings.empty());
  CHECK_THROWS(mc_small_k_near_unit(s, 2, 0.25, 0, 3));
  CHECK_THROWS(mc_small_k_near_unit(s, 1, 0.25, 10, 3));
}

TEST_CASE("case bounds") {
  const auto params = derive_params(64, 3, Mode::practical);
  const auto s = NormedSpace::lp(params.m, 2.0);
  const auto edge = mc_case_bounds(gen_path_tree(2), s, params, 50, 1);
  CHECK_FALSE(edge.rows[0].empty);
  CHECK(edge.rows[1].empty);
  CHECK(edge.rows[2].empty);
  CHECK(edge.rows[3].empty);
  CHECK(edge.rows[0].conditioned == 50);

  const Tree path = gen_path_tree(30);
  const auto rep = mc_case_bounds(path, s, params, 40, 2);
  CHECK_FALSE(rep.rows[3].empty);
  CHECK(rep.rows[3].k == 29);
  CHECK(rep.rows[3].target == doctest::Approx(1.0 / 900.0));

  ParamOverrides o;
  o.ell0_scale = 0.1;
  const auto small = derive_params(64, 3, Mode::practical, o);
  const auto r2 = mc_case_bounds(path, s, small, 10, 3);
  CHECK(r2.rows[1].empty);
  CHECK(r2.rows[2].empty);
  CHECK(r2.l_free == 10);
}

TEST_CASE("sweep records, determinism and resume") {
  SweepConfig c;
  c.norms = {"lp:2"};
  c.n_grid = {31};
  c.delta_grid = {3};
  c.trials = 1;
  c.master_seed = 4;
  const auto one = sweep(c);
  REQUIRE(one.records.size() == 1);
  CHECK(one.records[0].m == derive_params(31, 3, Mode::practical).m);

  c.norms = {"lp:2", "lp:inf"};
  c.n_grid = {31, 63};
  c.m_grid = {6, 10};
  c.trials = 2;
  c.max_rounds = 2000;
  c.output = temp_path("a.csv");
  std::filesystem::remove(c.output);
  const auto a = sweep(c);
  CHECK(a.records.size() == 16);
  const std::string text = read_text(c.output);
  CHECK(text.rfind(kSweepHeader, 0) == 0);

  SweepConfig c2 = c;
  c2.output = temp_path("b.csv");
  std::filesystem::remove(c2.output);
  sweep(c2);
  CHECK(read_text(c2.output) == text);

  // Resume: drop the last four lines, rerun, recover the same file.
  std::string cut = text;
  for (int i = 0; i < 4; ++i) cut.erase(cut.find_last_of('\n', cut.size() - 2) + 1);
  write_text(c.output, cut);
  const auto resumed = sweep(c);
  CHECK(resumed.reused == 12);
  CHECK(read_text(c.output) == text);

  for (const auto& r : a.records) {
    CHECK(r.wallclock_ms == 0.0);
    if (r.success) {
      CHECK(r.max_lip.has_value());
      CHECK(r.rounds <= c.max_rounds);
    }
  }
  CHECK(a.summary.size() == 4);
  std::filesystem::remove(c.output);
  std::filesystem::remove(c2.output);
}

TEST_CASE("sweep config validation and records") {
  CHECK_THROWS(parse_sweep_config(R"({"norms": [], "N": [31]})"));
  CHECK_THROWS(parse_sweep_config(R"({"norms": ["lp:2"], "N": [31], "trials": 0})"));
  CHECK_THROWS(parse_sweep_config(R"({"norms": ["lp:2"], "N": [31], "mode": "theory", "m": [4]})"));
  const auto c = parse_sweep_config(R"({"norms": ["lp:1"], "N": [63, 127], "m": [8], "seed": 3, "tree": "part-a"})");
  CHECK(c.n_grid.size() == 2);
  CHECK(c.tree_kind == "part-a");
  TrialRecord r;
  r.norm = "lp:2";
  r.n = 31;
  r.delta = 3;
  r.m = 6;
  r.seed = 12345678901234567890ull;
  r.success = true;
  r.rounds = 17;
  r.max_lip = 0.75;
  const auto back = parse_record(format_record(r));
  CHECK(back.seed == r.seed);
  CHECK(back.success);
  CHECK(*back.max_lip == 0.75);
  CHECK_FALSE(back.min_holder.has_value());
  CHECK(format_record(back) == format_record(r));
}

}  // TEST_SUITE
