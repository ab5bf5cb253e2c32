#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "geoembed/rng.hpp"

namespace geoembed {

using Vertex = int;
using EdgeId = int;

struct Edge {
  Vertex u = 0;
  Vertex v = 0;
};

/// Rooted tree with binary-lifting LCA. Immutable after construction; edge
/// ids are indices into edges().
class Tree {
 public:
  Tree(int n, std::vector<Edge> edges, Vertex root = 0);

  int size() const { return n_; }
  Vertex root() const { return root_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }

  Vertex parent(Vertex v) const { return parent_[check(v)]; }
  /// Edge joining v to its parent, -1 for the root.
  EdgeId parent_edge(Vertex v) const { return parent_edge_[check(v)]; }
  int depth(Vertex v) const { return depth_[check(v)]; }
  int degree(Vertex v) const { return static_cast<int>(adj_[check(v)].size()); }
  int max_degree() const;
  std::span<const Vertex> neighbors(Vertex v) const { return adj_[check(v)]; }

  /// The endpoint of e farther from the root.
  Vertex lower_endpoint(EdgeId e) const;

  /// Vertices in depth-first preorder; the subtree of v occupies
  /// preorder()[enter(v) .. leave(v)).
  const std::vector<Vertex>& preorder() const { return preorder_; }
  int enter(Vertex v) const { return tin_[check(v)]; }
  int leave(Vertex v) const { return tout_[check(v)]; }
  bool is_ancestor(Vertex a, Vertex v) const {
    return tin_[check(a)] <= tin_[check(v)] && tout_[v] <= tout_[a];
  }

  Vertex lca(Vertex u, Vertex v) const;
  int dist(Vertex u, Vertex v) const;
  /// Edges of the unique u-v path in walking order; empty when u == v.
  std::vector<EdgeId> path(Vertex u, Vertex v) const;
  bool adjacent(Vertex u, Vertex v) const;
  int height() const;

 private:
  int check(Vertex v) const;

  int n_;
  Vertex root_;
  std::vector<Edge> edges_;
  std::vector<std::vector<Vertex>> adj_;
  std::vector<Vertex> parent_;
  std::vector<EdgeId> parent_edge_;
  std::vector<int> depth_;
  std::vector<Vertex> preorder_;
  std::vector<int> tin_, tout_;
  std::vector<std::vector<Vertex>> up_;
};

/// Root with `branching` children, every other internal vertex with
/// branching-1 children, all leaves at depth `height`.
Tree gen_complete_tree(int branching, int height);

/// Heap-shaped tree: vertex i has children arity*i+1 .. arity*i+arity (those < n).
/// arity 2 with n = 2^h - 1 is the perfect binary tree.
Tree gen_heap_tree(int arity, int n);

struct PartATree {
  Tree tree;
  int h0;
};

/// Smallest h with every vertex of a max-degree-delta tree on n vertices
/// within distance h of the root.
int part_a_height(int delta, long long n);

/// Breadth-first filled tree on exactly n_target vertices (root degree delta,
/// other internal vertices delta-1 children), with its height bound h0.
PartATree gen_part_a_tree(int delta, int n_target);

/// Random attachment respecting the degree cap.
Tree gen_random_tree(int n, int delta_max, Rng& rng);

Tree gen_path_tree(int n);
Tree gen_star_tree(int leaves);

}  // namespace geoembed
