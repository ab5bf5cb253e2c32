#pragma once

#include <map>
#include <string>

#include <json.hpp>

#include "geoembed/embedder.hpp"
#include "geoembed/normspace.hpp"
#include "geoembed/tree.hpp"
#include "geoembed/verifier.hpp"

namespace geoembed {

using Json = nlohmann::ordered_json;

/// Numeric CSV, one row per line; blank lines and '#' lines are skipped.
MatrixXd read_matrix_csv(const std::string& path);

Json tree_to_json(const Tree& tree);
Tree tree_from_json(const Json& j);
Tree read_tree(const std::string& path);
void write_tree(const Tree& tree, const std::string& path);

/// Vertex map on disk: '#' header lines of comma-separated key=value items,
/// then rows "vertex,x1,...,xm".
struct EmbeddingFile {
  std::map<std::string, std::string> header;
  MatrixXd points;  ///< one column per vertex
};

/// Serializes with 17 significant digits so a reload is bit-exact.
std::string format_embedding(const MatrixXd& points,
                             const std::vector<std::pair<std::string, std::string>>& header_lines);
EmbeddingFile parse_embedding(const std::string& text);
EmbeddingFile read_embedding(const std::string& path);

/// Rounds to 12 significant digits (report precision).
double round12(double x);
Json report_to_json(const ViolationReport& report);
Json params_to_json(const EmbeddingParams& params);

std::string read_text(const std::string& path);
/// Writes atomically enough for our purposes: to path.tmp, then rename.
void write_text(const std::string& path, const std::string& text);

}  // namespace geoembed
