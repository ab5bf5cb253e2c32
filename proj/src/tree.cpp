#include "geoembed/tree.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace geoembed {

namespace {
constexpr long long kMaxVertices = 1LL << 27;
}

Tree::Tree(int n, std::vector<Edge> edges, Vertex root)
    : n_(n), root_(root), edges_(std::move(edges)) {
  if (n < 1) throw std::invalid_argument("tree needs at least one vertex");
  if (static_cast<int>(edges_.size()) != n - 1) {
    throw std::invalid_argument("tree on " + std::to_string(n) + " vertices needs " +
                                std::to_string(n - 1) + " edges, got " +
                                std::to_string(edges_.size()));
  }
  if (root < 0 || root >= n) throw std::out_of_range("root out of range");
  adj_.assign(n, {});
  std::vector<std::vector<EdgeId>> inc(n);
  for (EdgeId e = 0; e < static_cast<EdgeId>(edges_.size()); ++e) {
    const auto [u, v] = edges_[e];
    if (u < 0 || u >= n || v < 0 || v >= n) throw std::out_of_range("edge endpoint out of range");
    if (u == v) throw std::invalid_argument("self-loop in tree");
    adj_[u].push_back(v);
    adj_[v].push_back(u);
    inc[u].push_back(e);
    inc[v].push_back(e);
  }

  parent_.assign(n, -1);
  parent_edge_.assign(n, -1);
  depth_.assign(n, 0);
  tin_.assign(n, -1);
  tout_.assign(n, -1);
  preorder_.reserve(n);

  // Iterative DFS: (vertex, next incidence index).
  std::vector<std::pair<Vertex, std::size_t>> stack{{root, 0}};
  tin_[root] = 0;
  preorder_.push_back(root);
  while (!stack.empty()) {
    auto& [v, next] = stack.back();
    if (next == inc[v].size()) {
      tout_[v] = static_cast<int>(preorder_.size());
      stack.pop_back();
      continue;
    }
    const EdgeId e = inc[v][next++];
    const Vertex w = edges_[e].u == v ? edges_[e].v : edges_[e].u;
    if (w == parent_[v] && e == parent_edge_[v]) continue;
    if (tin_[w] != -1) throw std::invalid_argument("edge list contains a cycle");
    parent_[w] = v;
    parent_edge_[w] = e;
    depth_[w] = depth_[v] + 1;
    tin_[w] = static_cast<int>(preorder_.size());
    preorder_.push_back(w);
    stack.emplace_back(w, 0);
  }
  if (static_cast<int>(preorder_.size()) != n) throw std::invalid_argument("edge list is not connected");

  int levels = 1;
  while ((1 << levels) < n) ++levels;
  up_.assign(levels, std::vector<Vertex>(n));
  for (Vertex v = 0; v < n; ++v) up_[0][v] = parent_[v] < 0 ? v : parent_[v];
  for (int j = 1; j < levels; ++j) {
    for (Vertex v = 0; v < n; ++v) up_[j][v] = up_[j - 1][up_[j - 1][v]];
  }
}

int Tree::check(Vertex v) const {
  if (v < 0 || v >= n_) throw std::out_of_range("vertex id " + std::to_string(v) + " out of range");
  return v;
}

int Tree::max_degree() const {
  int best = 0;
  for (const auto& a : adj_) best = std::max(best, static_cast<int>(a.size()));
  return best;
}

int Tree::height() const { return *std::max_element(depth_.begin(), depth_.end()); }

Vertex Tree::lower_endpoint(EdgeId e) const {
  if (e < 0 || e >= num_edges()) throw std::out_of_range("edge id out of range");
  const auto [u, v] = edges_[e];
  return depth_[u] > depth_[v] ? u : v;
}

Vertex Tree::lca(Vertex u, Vertex v) const {
  check(u);
  check(v);
  if (depth_[u] < depth_[v]) std::swap(u, v);
  int diff = depth_[u] - depth_[v];
  for (int j = 0; diff; ++j, diff >>= 1) {
    if (diff & 1) u = up_[j][u];
  }
  if (u == v) return u;
  for (int j = static_cast<int>(up_.size()) - 1; j >= 0; --j) {
    if (up_[j][u] != up_[j][v]) {
      u = up_[j][u];
      v = up_[j][v];
    }
  }
  return parent_[u];
}

int Tree::dist(Vertex u, Vertex v) const {
  return depth_[check(u)] + depth_[check(v)] - 2 * depth_[lca(u, v)];
}

std::vector<EdgeId> Tree::path(Vertex u, Vertex v) const {
  const Vertex a = lca(u, v);
  std::vector<EdgeId> out;
  out.reserve(static_cast<std::size_t>(depth_[u] + depth_[v] - 2 * depth_[a]));
  for (Vertex x = u; x != a; x = parent_[x]) out.push_back(parent_edge_[x]);
  const auto mid = out.size();
  for (Vertex x = v; x != a; x = parent_[x]) out.push_back(parent_edge_[x]);
  std::reverse(out.begin() + static_cast<std::ptrdiff_t>(mid), out.end());
  return out;
}

bool Tree::adjacent(Vertex u, Vertex v) const {
  check(u);
  check(v);
  return (parent_[u] == v) || (parent_[v] == u);
}

Tree gen_complete_tree(int branching, int height) {
  if (branching < 2) throw std::invalid_argument("branching must be >= 2");
  if (height < 0) throw std::invalid_argument("height must be >= 0");
  long long total = 1, level = 1;
  for (int d = 0; d < height; ++d) {
    level *= (d == 0 ? branching : branching - 1);
    total += level;
    if (total > kMaxVertices) throw std::overflow_error("complete tree vertex count overflows");
  }
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(total - 1));
  std::vector<Vertex> frontier{0};
  int next = 1;
  for (int d = 0; d < height; ++d) {
    std::vector<Vertex> nxt;
    const int kids = d == 0 ? branching : branching - 1;
    for (Vertex v : frontier) {
      for (int c = 0; c < kids; ++c) {
        edges.push_back({v, next});
        nxt.push_back(next++);
      }
    }
    frontier = std::move(nxt);
  }
  return Tree(next, std::move(edges), 0);
}

Tree gen_heap_tree(int arity, int n) {
  if (arity < 1) throw std::invalid_argument("arity must be >= 1");
  if (n < 1 || n > kMaxVertices) throw std::invalid_argument("vertex count out of range");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n - 1));
  for (Vertex v = 1; v < n; ++v) edges.push_back({(v - 1) / arity, v});
  return Tree(n, std::move(edges), 0);
}

int part_a_height(int delta, long long n) {
  if (delta < 3) throw std::invalid_argument("delta must be >= 3");
  if (n < 1) throw std::invalid_argument("vertex count must be >= 1");
  // Smallest h with delta*(delta-1)^h >= (n-1)(delta-2) + delta, i.e. the
  // complete tree of height h holds at least n vertices.
  const long double need = static_cast<long double>(n - 1) * (delta - 2) + delta;
  long double cap = delta;
  int h = 0;
  while (cap < need) {
    cap *= (delta - 1);
    ++h;
  }
  return h;
}

PartATree gen_part_a_tree(int delta, int n_target) {
  if (delta < 3) throw std::invalid_argument("delta must be >= 3");
  if (n_target < delta + 1) {
    throw std::invalid_argument("n_target must be at least delta+1 for the degree bound");
  }
  if (n_target > kMaxVertices) throw std::overflow_error("vertex count too large");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n_target - 1));
  int next = 1;
  for (Vertex v = 0; next < n_target; ++v) {
    const int kids = v == 0 ? delta : delta - 1;
    for (int c = 0; c < kids && next < n_target; ++c) edges.push_back({v, next++});
  }
  return {Tree(n_target, std::move(edges), 0), part_a_height(delta, n_target)};
}

Tree gen_random_tree(int n, int delta_max, Rng& rng) {
  if (n < 1) throw std::invalid_argument("vertex count must be >= 1");
  if (delta_max < 2) throw std::invalid_argument("delta_max must be >= 2");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n - 1));
  std::vector<int> degree(n, 0);
  std::vector<Vertex> open{0};  // vertices that can take another neighbor
  for (Vertex v = 1; v < n; ++v) {
    std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
    const std::size_t slot = pick(rng);
    const Vertex u = open[slot];
    edges.push_back({u, v});
    if (++degree[u] == delta_max) {
      open[slot] = open.back();
      open.pop_back();
    }
    ++degree[v];
    open.push_back(v);
  }
  return Tree(n, std::move(edges), 0);
}

Tree gen_path_tree(int n) {
  if (n < 1) throw std::invalid_argument("vertex count must be >= 1");
  std::vector<Edge> edges;
  for (Vertex v = 1; v < n; ++v) edges.push_back({v - 1, v});
  return Tree(n, std::move(edges), 0);
}

Tree gen_star_tree(int leaves) {
  if (leaves < 0) throw std::invalid_argument("leaf count must be >= 0");
  std::vector<Edge> edges;
  for (Vertex v = 1; v <= leaves; ++v) edges.push_back({0, v});
  return Tree(leaves + 1, std::move(edges), 0);
}

}  // namespace geoembed
