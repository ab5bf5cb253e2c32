#include "geoembed/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace geoembed {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw std::runtime_error(where + ": not a number: '" + s + "'");
  return v;
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out.flush()) throw std::runtime_error("write failed: " + path);
  }
  std::filesystem::rename(tmp, path);
}

MatrixXd read_matrix_csv(const std::string& path) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    for (const auto& cell : split(line, ',')) {
      row.push_back(parse_double(cell, path + ":" + std::to_string(lineno)));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path + ": empty matrix");
  MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return m;
}

Json tree_to_json(const Tree& tree) {
  Json edges = Json::array();
  for (const Edge& e : tree.edges()) edges.push_back({e.u, e.v});
  return Json{{"n", tree.size()}, {"root", tree.root()}, {"edges", std::move(edges)}};
}

Tree tree_from_json(const Json& j) {
  const int n = j.at("n").get<int>();
  const Vertex root = j.value("root", 0);
  std::vector<Edge> edges;
  for (const auto& e : j.at("edges")) {
    if (!e.is_array() || e.size() != 2) throw std::runtime_error("tree edge must be [u, v]");
    edges.push_back({e[0].get<int>(), e[1].get<int>()});
  }
  return Tree(n, std::move(edges), root);
}

Tree read_tree(const std::string& path) {
  Json j;
  try {
    j = Json::parse(read_text(path));
  } catch (const Json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return tree_from_json(j);
}

void write_tree(const Tree& tree, const std::string& path) {
  write_text(path, tree_to_json(tree).dump() + "\n");
}

std::string format_embedding(const MatrixXd& points,
                             const std::vector<std::pair<std::string, std::string>>& header_lines) {
  std::string out;
  if (!header_lines.empty()) {
    out += "# ";
    for (std::size_t i = 0; i < header_lines.size(); ++i) {
      if (i) out += ", ";
      out += header_lines[i].first + "=" + header_lines[i].second;
    }
    out += "\n";
  }
  for (Eigen::Index v = 0; v < points.cols(); ++v) {
    out += std::to_string(v);
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      out += ',';
      out += fmt17(points(i, v));
    }
    out += '\n';
  }
  return out;
}

EmbeddingFile parse_embedding(const std::string& text) {
  EmbeddingFile file;
  std::istringstream in(text);
  std::string line;
  std::vector<std::pair<int, std::vector<double>>> rows;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      for (const auto& item : split(line.substr(1), ',')) {
        const auto eq = item.find('=');
        if (eq != std::string::npos) file.header[trim(item.substr(0, eq))] = trim(item.substr(eq + 1));
      }
      continue;
    }
    const auto cells = split(line, ',');
    if (cells.size() < 2) throw std::runtime_error("embedding line " + std::to_string(lineno) + ": no coordinates");
    std::vector<double> x;
    for (std::size_t i = 1; i < cells.size(); ++i) x.push_back(parse_double(cells[i], "embedding line " + std::to_string(lineno)));
    rows.emplace_back(static_cast<int>(parse_double(cells[0], "embedding line " + std::to_string(lineno))), std::move(x));
  }
  if (rows.empty()) throw std::runtime_error("embedding has no rows");
  const auto m = rows.front().second.size();
  const auto n = rows.size();
  file.points.setConstant(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n), std::numeric_limits<double>::quiet_NaN());
  std::vector<char> seen(n, 0);
  for (const auto& [v, x] : rows) {
    if (v < 0 || static_cast<std::size_t>(v) >= n || seen[static_cast<std::size_t>(v)]) {
      throw std::runtime_error("embedding rows must list vertices 0..n-1 once each");
    }
    if (x.size() != m) throw std::runtime_error("embedding rows have inconsistent dimension");
    seen[static_cast<std::size_t>(v)] = 1;
    for (std::size_t i = 0; i < m; ++i) file.points(static_cast<Eigen::Index>(i), v) = x[i];
  }
  return file;
}

EmbeddingFile read_embedding(const std::string& path) { return parse_embedding(read_text(path)); }

double round12(double x) {
  if (!std::isfinite(x)) return x;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::strtod(buf, nullptr);
}

Json report_to_json(const ViolationReport& r) {
  auto pairs = [](const std::vector<PairViolation>& vs) {
    Json a = Json::array();
    for (const auto& v : vs) a.push_back({{"u", v.u}, {"v", v.v}, {"distance", round12(v.distance)}});
    return a;
  };
  Json l = Json::array();
  for (const auto& v : r.l_violations) {
    l.push_back({{"u", v.u}, {"v", v.v}, {"k", v.k}, {"value", round12(v.value)}, {"threshold", round12(v.threshold)}});
  }
  Json j;
  j["embedding_ok"] = r.embedding_ok();
  j["pairs_considered"] = r.pairs_considered;
  j["norm_evaluations"] = r.norm_evaluations;
  j["margin"] = r.margin;
  j["max_edge_distance"] = round12(r.max_edge_distance);
  if (std::isfinite(r.min_nonedge_distance)) j["min_nonedge_distance"] = round12(r.min_nonedge_distance);
  else j["min_nonedge_distance"] = nullptr;
  j["edge_violations"] = pairs(r.edge_violations);
  j["nonedge_violations"] = pairs(r.nonedge_violations);
  j["l_violations"] = std::move(l);
  return j;
}

Json params_to_json(const EmbeddingParams& p) {
  Json j;
  j["n"] = p.n;
  j["log_n"] = p.log_n;
  j["delta"] = p.delta;
  j["mode"] = to_string(p.mode);
  j["m"] = p.m;
  j["dim_real"] = p.dim_real;
  j["alpha1"] = p.alpha1;
  j["c1"] = p.c1;
  j["c2"] = p.c2;
  j["kappa"] = p.kappa;
  j["shrink"] = p.shrink;
  j["delta_reg"] = p.delta_reg;
  j["ell0"] = p.ell0;
  j["k0"] = p.k0;
  j["k1"] = p.k1;
  j["delta_scale"] = p.delta_scale;
  j["ell0_scale"] = p.ell0_scale;
  j["cb_l_product"] = p.constants.cb_l_product;
  return j;
}

}  // namespace geoembed
