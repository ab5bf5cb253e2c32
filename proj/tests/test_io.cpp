#include <doctest.h>

#include <filesystem>

#include "geoembed/io.hpp"

using namespace geoembed;

TEST_SUITE("io") {

TEST_CASE("tree json round trip") {
  Rng rng(1);
  const Tree t = gen_random_tree(50, 4, rng);
  const Tree back = tree_from_json(Json::parse(tree_to_json(t).dump()));
  CHECK(back.size() == t.size());
  for (EdgeId e = 0; e < t.num_edges(); ++e) {
    CHECK(back.edges()[e].u == t.edges()[e].u);
    CHECK(back.edges()[e].v == t.edges()[e].v);
  }
  CHECK_THROWS(tree_from_json(Json::parse(R"({"n": 3, "edges": [[0, 1], [1]]})")));
  CHECK_THROWS(tree_from_json(Json::parse(R"({"n": 3, "edges": [[0, 1], [0, 1]]})")));
}

TEST_CASE("embedding csv is bit exact") {
  Rng rng(2);
  std::normal_distribution<double> g;
  MatrixXd p(3, 7);
  for (int j = 0; j < 7; ++j)
    for (int i = 0; i < 3; ++i) p(i, j) = g(rng) * 1e-3;
  const auto text = format_embedding(p, {{"n", "7"}, {"m", "3"}, {"norm", "lp:2"}});
  CHECK(text.rfind("# n=7, m=3, norm=lp:2\n", 0) == 0);
  const auto back = parse_embedding(text);
  CHECK(back.points == p);
  CHECK(back.header.at("norm") == "lp:2");
  CHECK_THROWS(parse_embedding("0,1\n0,2\n"));  // duplicate vertex
  CHECK_THROWS(parse_embedding("0,1\n1,2,3\n"));
  CHECK_THROWS(parse_embedding("# nothing\n"));
}

TEST_CASE("matrix csv") {
  const auto path = (std::filesystem::temp_directory_path() / "geoembed_io_matrix.csv").string();
  write_text(path, "# facets\n1, 0\n0,1\n\n1,1\n");
  const MatrixXd m = read_matrix_csv(path);
  CHECK(m.rows() == 3);
  CHECK(m(2, 1) == 1.0);
  write_text(path, "1,0\n2\n");
  CHECK_THROWS(read_matrix_csv(path));
  write_text(path, "1,x\n");
  CHECK_THROWS(read_matrix_csv(path));
  std::filesystem::remove(path);
  CHECK_THROWS(read_matrix_csv(path));
}

TEST_CASE("report precision") {
  CHECK(round12(1.0 / 3.0) == 0.333333333333);
  ViolationReport r;
  r.nonedge_violations.push_back({0, 2, 0.123456789012345});
  r.min_nonedge_distance = 0.123456789012345;
  const Json j = report_to_json(r);
  CHECK(j["nonedge_violations"][0]["distance"].get<double>() == 0.123456789012);
  CHECK_FALSE(j["embedding_ok"].get<bool>());
}

}  // TEST_SUITE
