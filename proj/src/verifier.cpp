#include "geoembed/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "geoembed/errors.hpp"

namespace geoembed {

namespace {

constexpr int kGridMaxDim = 24;

struct Partial {
  std::vector<PairViolation> edge, nonedge;
  std::size_t evaluations = 0;
  double max_edge = 0.0;
  double min_nonedge = std::numeric_limits<double>::infinity();
};

bool pair_less(const PairViolation& a, const PairViolation& b) {
  return a.u != b.u ? a.u < b.u : a.v < b.v;
}

// Runs body(worker, partial) on `workers` threads and merges the partials.
template <class Body>
Partial run_sharded(int workers, Body body) {
  std::vector<Partial> parts(static_cast<std::size_t>(workers));
  if (workers == 1) {
    body(0, parts[0]);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(parts.size());
    for (int w = 0; w < workers; ++w) pool.emplace_back([&, w] { body(w, parts[static_cast<std::size_t>(w)]); });
  }
  Partial out;
  for (auto& p : parts) {
    out.edge.insert(out.edge.end(), p.edge.begin(), p.edge.end());
    out.nonedge.insert(out.nonedge.end(), p.nonedge.begin(), p.nonedge.end());
    out.evaluations += p.evaluations;
    out.max_edge = std::max(out.max_edge, p.max_edge);
    out.min_nonedge = std::min(out.min_nonedge, p.min_nonedge);
  }
  std::sort(out.edge.begin(), out.edge.end(), pair_less);
  std::sort(out.nonedge.begin(), out.nonedge.end(), pair_less);
  return out;
}

void classify(const Tree& tree, Vertex a, Vertex b, double d, double margin, bool is_edge,
              Partial& out) {
  const Vertex u = std::min(a, b), v = std::max(a, b);
  if (is_edge) {
    out.max_edge = std::max(out.max_edge, d);
    if (d > 1.0 - margin) out.edge.push_back({u, v, d});
  } else {
    out.min_nonedge = std::min(out.min_nonedge, d);
    if (d <= 1.0 + margin) out.nonedge.push_back({u, v, d});
  }
  (void)tree;
}

Partial verify_exact(const MatrixXd& pts, const Tree& tree, const NormedSpace& space,
                     double margin, int workers) {
  const int n = tree.size();
  return run_sharded(workers, [&](int w, Partial& out) {
    VectorXd diff(space.dim());
    for (Vertex i = w; i < n; i += workers) {
      for (Vertex j = i + 1; j < n; ++j) {
        diff = pts.col(i) - pts.col(j);
        const double d = space.norm(diff);
        ++out.evaluations;
        classify(tree, i, j, d, margin, tree.adjacent(i, j), out);
      }
    }
  });
}

// Squared aux distance with early exit once it exceeds `limit`.
bool aux_within(const MatrixXd& aux, Vertex a, Vertex b, double limit) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < aux.rows(); ++i) {
    const double t = aux(i, a) - aux(i, b);
    acc += t * t;
    if (acc > limit) return false;
  }
  return true;
}

Partial verify_pruned(const MatrixXd& pts, const Tree& tree, const NormedSpace& space,
                      double margin, int workers) {
  const int n = tree.size();
  const int m = space.dim();

  Partial edges;
  {
    VectorXd diff(m);
    for (const Edge& e : tree.edges()) {
      diff = pts.col(e.u) - pts.col(e.v);
      ++edges.evaluations;
      classify(tree, e.u, e.v, space.norm(diff), margin, true, edges);
    }
    std::sort(edges.edge.begin(), edges.edge.end(), pair_less);
  }

  // ||d||_X <= 1 + margin implies ||d||_2^* <= 1 + margin, so every candidate
  // pair has all aux coordinates within `side` of each other.
  const double side = (1.0 + margin) * (1.0 + 1e-9);
  const double side2 = side * side;
  MatrixXd aux(m, n);
  for (Vertex v = 0; v < n; ++v) aux.col(v) = space.aux_coordinates(pts.col(v));

  auto check_pair = [&](Vertex a, Vertex b, Partial& out, VectorXd& diff) {
    if (tree.adjacent(a, b) || !aux_within(aux, a, b, side2)) return;
    diff = pts.col(a) - pts.col(b);
    ++out.evaluations;
    classify(tree, a, b, space.norm(diff), margin, false, out);
  };

  Partial nonedges;
  if (m > kGridMaxDim) {
    nonedges = run_sharded(workers, [&](int w, Partial& out) {
      VectorXd diff(m);
      for (Vertex i = w; i < n; i += workers) {
        for (Vertex j = i + 1; j < n; ++j) check_pair(i, j, out, diff);
      }
    });
  } else {
    using Key = std::vector<std::int64_t>;
    std::vector<Key> keys(static_cast<std::size_t>(n), Key(static_cast<std::size_t>(m)));
    for (Vertex v = 0; v < n; ++v) {
      for (int i = 0; i < m; ++i) {
        keys[static_cast<std::size_t>(v)][static_cast<std::size_t>(i)] =
            static_cast<std::int64_t>(std::floor(aux(i, v) / side));
      }
    }
    std::vector<Vertex> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Vertex a, Vertex b) {
      return keys[static_cast<std::size_t>(a)] < keys[static_cast<std::size_t>(b)];
    });
    // Cells as [begin, end) runs of `order`.
    std::vector<std::pair<std::size_t, std::size_t>> cells;
    for (std::size_t i = 0; i < order.size();) {
      std::size_t j = i + 1;
      while (j < order.size() && keys[static_cast<std::size_t>(order[j])] ==
                                     keys[static_cast<std::size_t>(order[i])]) {
        ++j;
      }
      cells.emplace_back(i, j);
      i = j;
    }
    auto key_of = [&](std::size_t c) -> const Key& {
      return keys[static_cast<std::size_t>(order[cells[c].first])];
    };
    auto touching = [&](const Key& a, const Key& b) {
      for (int i = 0; i < m; ++i) {
        if (std::llabs(a[static_cast<std::size_t>(i)] - b[static_cast<std::size_t>(i)]) > 1) return false;
      }
      return true;
    };
    nonedges = run_sharded(workers, [&](int w, Partial& out) {
      VectorXd diff(m);
      for (std::size_t c = static_cast<std::size_t>(w); c < cells.size(); c += static_cast<std::size_t>(workers)) {
        const Key& kc = key_of(c);
        const auto [cb, ce] = cells[c];
        for (std::size_t a = cb; a < ce; ++a) {
          for (std::size_t b = a + 1; b < ce; ++b) check_pair(order[a], order[b], out, diff);
        }
        // Lexicographic order: neighbouring cells share a first coordinate within 1.
        for (std::size_t d = c + 1; d < cells.size() && key_of(d)[0] <= kc[0] + 1; ++d) {
          if (!touching(kc, key_of(d))) continue;
          const auto [db, de] = cells[d];
          for (std::size_t a = cb; a < ce; ++a) {
            for (std::size_t b = db; b < de; ++b) check_pair(order[a], order[b], out, diff);
          }
        }
      }
    });
  }

  nonedges.edge = std::move(edges.edge);
  nonedges.evaluations += edges.evaluations;
  nonedges.max_edge = edges.max_edge;
  return nonedges;
}

std::vector<int> bfs_distances(const Tree& tree, Vertex src, int limit) {
  std::vector<int> dist(static_cast<std::size_t>(tree.size()), -1);
  std::vector<Vertex> queue{src};
  dist[static_cast<std::size_t>(src)] = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const Vertex x = queue[h];
    if (dist[static_cast<std::size_t>(x)] == limit) continue;
    for (Vertex y : tree.neighbors(x)) {
      if (dist[static_cast<std::size_t>(y)] < 0) {
        dist[static_cast<std::size_t>(y)] = dist[static_cast<std::size_t>(x)] + 1;
        queue.push_back(y);
      }
    }
  }
  return dist;
}

}  // namespace

int default_workers() {
  if (const char* env = std::getenv("GEOEMBED_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

ViolationReport verify(const MatrixXd& points, const Tree& tree, const NormedSpace& space,
                       const VerifyOptions& options) {
  if (options.margin < 0.0) throw std::invalid_argument("margin must be non-negative");
  if (points.cols() != tree.size()) {
    throw std::invalid_argument("map defines " + std::to_string(points.cols()) +
                                " vertices, tree has " + std::to_string(tree.size()));
  }
  if (points.rows() != space.dim()) throw DimensionError("map dimension does not match the space");
  const int workers = std::max(1, options.workers > 0 ? options.workers : default_workers());

  Partial merged = options.mode == VerifyMode::exact
                       ? verify_exact(points, tree, space, options.margin, workers)
                       : verify_pruned(points, tree, space, options.margin, workers);
  ViolationReport r;
  r.edge_violations = std::move(merged.edge);
  r.nonedge_violations = std::move(merged.nonedge);
  const auto n = static_cast<std::size_t>(tree.size());
  r.pairs_considered = n * (n - 1) / 2;
  r.norm_evaluations = merged.evaluations;
  r.max_edge_distance = merged.max_edge;
  r.min_nonedge_distance = merged.min_nonedge;
  r.margin = options.margin;
  return r;
}

ViolationReport verify(const EmbeddingState& state, const VerifyOptions& options) {
  return verify(state.zeta(), state.tree(), state.space(), options);
}

double l_threshold(const EmbeddingParams& params, std::int64_t k) {
  if (k < 2) throw std::invalid_argument("L-events are defined for distance >= 2");
  if (k <= params.k0) {
    return 1.0 + 1.0 / (2.0 * std::pow(params.dim_real, 1.0 - params.kappa));
  }
  return std::pow(static_cast<double>(k), params.c1);
}

std::vector<LViolation> enumerate_l_violations(const EmbeddingState& state) {
  const Tree& tree = state.tree();
  const auto& params = state.params();
  const std::int64_t reach = std::min<std::int64_t>(params.max_local_distance(), tree.size());
  std::vector<LViolation> out;
  if (reach < 2) return out;
  const int limit = static_cast<int>(reach);

  std::vector<double> thresholds(static_cast<std::size_t>(limit) + 1, 0.0);
  for (int k = 2; k <= limit; ++k) thresholds[static_cast<std::size_t>(k)] = l_threshold(params, k);

  const MatrixXd& sums = state.ball_sums();
  VectorXd diff(state.space().dim());
  std::vector<int> dist(static_cast<std::size_t>(tree.size()), -1);
  std::vector<Vertex> queue;
  for (Vertex u = 0; u < tree.size(); ++u) {
    queue.assign(1, u);
    dist[static_cast<std::size_t>(u)] = 0;
    std::vector<LViolation> row;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const Vertex x = queue[h];
      const int dx = dist[static_cast<std::size_t>(x)];
      if (dx >= 2 && x > u) {
        diff = sums.col(u) - sums.col(x);
        const double value = state.space().norm(diff);
        const double thr = thresholds[static_cast<std::size_t>(dx)];
        if (value <= thr) row.push_back({u, x, dx, value, thr});
      }
      if (dx == limit) continue;
      for (Vertex y : tree.neighbors(x)) {
        if (dist[static_cast<std::size_t>(y)] < 0) {
          dist[static_cast<std::size_t>(y)] = dx + 1;
          queue.push_back(y);
        }
      }
    }
    for (Vertex x : queue) dist[static_cast<std::size_t>(x)] = -1;
    std::sort(row.begin(), row.end(), [](const LViolation& a, const LViolation& b) { return a.v < b.v; });
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

double aux_norm_eval(const NormedSpace& space, const VecRef& x) {
  if (x.size() != space.dim()) throw DimensionError("vector length does not match the space");
  return space.aux_norm(x);
}

DistortionProfile distortion_profile(const MatrixXd& points, const Tree& tree,
                                     const NormedSpace& space, std::int64_t k0) {
  if (points.cols() != tree.size() || points.rows() != space.dim()) {
    throw DimensionError("map shape does not match tree and space");
  }
  DistortionProfile prof;
  const int n = tree.size();
  std::vector<DistanceBand> bands(static_cast<std::size_t>(n));
  VectorXd diff(space.dim());
  for (Vertex u = 0; u < n; ++u) {
    const auto dist = bfs_distances(tree, u, n);
    for (Vertex v = u + 1; v < n; ++v) {
      const int k = dist[static_cast<std::size_t>(v)];
      diff = points.col(u) - points.col(v);
      const double d = space.norm(diff);
      const double lip = d / k;
      if (lip > prof.max_lipschitz) {
        prof.max_lipschitz = lip;
        prof.lip_u = u;
        prof.lip_v = v;
      }
      if (k > k0) {
        const double holder = d / std::pow(static_cast<double>(k), 0.1);
        if (!prof.min_holder || holder < *prof.min_holder) {
          prof.min_holder = holder;
          prof.holder_u = u;
          prof.holder_v = v;
        }
      }
      auto& band = bands[static_cast<std::size_t>(k)];
      if (band.count == 0) {
        band.min = band.max = d;
      } else {
        band.min = std::min(band.min, d);
        band.max = std::max(band.max, d);
      }
      band.mean += d;
      ++band.count;
    }
  }
  for (int k = 1; k < n; ++k) {
    auto& band = bands[static_cast<std::size_t>(k)];
    if (band.count == 0) continue;
    band.k = k;
    band.mean /= static_cast<double>(band.count);
    prof.bands.push_back(band);
  }
  return prof;
}

double lower_bound_dim(std::int64_t n) {
  if (n < 8) throw std::invalid_argument("N must be at least 8");
  const double l = std::log(static_cast<double>(n));
  return 0.5 * l / std::log(l);
}

PackingCertificate packing_certificate(int delta, std::int64_t n, int claimed_m,
                                       const NormedSpace* space) {
  if (delta < 3) throw std::invalid_argument("delta must be >= 3");
  if (claimed_m < 1) throw std::invalid_argument("claimed dimension must be >= 1");
  PackingCertificate c;
  c.n = n;
  c.delta = delta;
  c.claimed_m = claimed_m;
  c.lower_bound = lower_bound_dim(n);
  c.below_bound = static_cast<double>(claimed_m) < c.lower_bound;
  c.h0 = part_a_height(delta, n);

  // Level sizes of the breadth-first filled tree; a tree is bipartite by depth parity.
  std::int64_t remaining = n - 1, level = 1, even = 1, odd = 0;
  for (int d = 1; remaining > 0; ++d) {
    level = std::min<std::int64_t>(remaining, level * (d == 1 ? delta : delta - 1));
    (d % 2 ? odd : even) += level;
    remaining -= level;
  }
  c.independent_set = std::max(even, odd);

  const double md = static_cast<double>(claimed_m);
  if (space && space->kind() == BodyKind::lp) {
    const double log_unit = lp_unit_ball_log_volume(claimed_m, space->p()) -
                            0.5 * md * std::log(lp_coordinate_variance(claimed_m, space->p()));
    c.has_volume = true;
    c.log_packed_volume = std::log(static_cast<double>(n) / 2.0) + md * std::log(0.5) + log_unit;
    c.log_container_volume = md * std::log(c.h0 + 0.5) + log_unit;
    c.volume_inequality_holds = c.log_packed_volume <= c.log_container_volume;
  }

  c.instance = "part-a tree (delta=" + std::to_string(delta) + ", n=" + std::to_string(n) +
               ", h0=" + std::to_string(c.h0) + ")";
  if (c.below_bound || !c.volume_inequality_holds) {
    c.verdict = "non-embeddable tree exists";
  } else {
    c.verdict = "no certificate";
  }
  return c;
}

}  // namespace geoembed
