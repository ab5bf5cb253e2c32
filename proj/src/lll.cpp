#include "geoembed/lll.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace geoembed {

namespace {

// Explicit evaluation limit for the k-sums; tails beyond it are bounded analytically.
constexpr std::int64_t kExplicitK = 50000;
constexpr std::size_t kMaxFailingReported = 16;

struct DistPair {
  Vertex u, v;
  int d;
};

// Pairs with 2 <= dist <= limit, sorted by (u, v).
std::vector<DistPair> local_pairs(const Tree& tree, int limit) {
  std::vector<DistPair> out;
  if (limit < 2) return out;
  std::vector<int> dist(static_cast<std::size_t>(tree.size()), -1);
  std::vector<Vertex> queue;
  for (Vertex u = 0; u < tree.size(); ++u) {
    queue.assign(1, u);
    dist[static_cast<std::size_t>(u)] = 0;
    std::vector<DistPair> row;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const Vertex x = queue[h];
      const int dx = dist[static_cast<std::size_t>(x)];
      if (dx >= 2 && x > u) row.push_back({u, x, dx});
      if (dx == limit) continue;
      for (Vertex y : tree.neighbors(x)) {
        if (dist[static_cast<std::size_t>(y)] < 0) {
          dist[static_cast<std::size_t>(y)] = dx + 1;
          queue.push_back(y);
        }
      }
    }
    for (Vertex x : queue) dist[static_cast<std::size_t>(x)] = -1;
    std::sort(row.begin(), row.end(), [](const DistPair& a, const DistPair& b) { return a.v < b.v; });
    out.insert(out.end(), row.begin(), row.end());
  }
  return out;
}

VertexPair ordered(VertexPair p) {
  if (p.u > p.v) std::swap(p.u, p.v);
  return p;
}

// Component label of every vertex after deleting the edges of the u-v path.
void label_components(const Tree& tree, VertexPair p, std::vector<int>& label,
                      std::vector<char>& cut, std::vector<Vertex>& queue) {
  const auto path = tree.path(p.u, p.v);
  for (EdgeId e : path) cut[static_cast<std::size_t>(e)] = 1;
  std::fill(label.begin(), label.end(), -1);
  int next = 0;
  for (Vertex s = 0; s < tree.size(); ++s) {
    if (label[static_cast<std::size_t>(s)] >= 0) continue;
    queue.assign(1, s);
    label[static_cast<std::size_t>(s)] = next;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const Vertex x = queue[h];
      for (Vertex y : tree.neighbors(x)) {
        if (label[static_cast<std::size_t>(y)] >= 0) continue;
        const EdgeId e = tree.parent(y) == x ? tree.parent_edge(y) : tree.parent_edge(x);
        if (cut[static_cast<std::size_t>(e)]) continue;
        label[static_cast<std::size_t>(y)] = next;
        queue.push_back(y);
      }
    }
    ++next;
  }
  for (EdgeId e : path) cut[static_cast<std::size_t>(e)] = 0;
}

double log_min_count(double log_n, double log_other) { return std::min(2.0 * log_n, log_other); }

// log(-log(1 - b)) from log b, accurate for tiny b.
double log_neg_log1m(double log_b) {
  if (log_b < -25.0) return log_b + std::log1p(0.5 * std::exp(log_b));
  const double b = std::exp(log_b);
  return std::log(-std::log1p(-b));
}

}  // namespace

std::vector<VertexPair> pairs_at_distance(const Tree& tree, int k) {
  std::vector<VertexPair> out;
  if (k < 0) return out;
  if (k == 0) {
    for (Vertex v = 0; v < tree.size(); ++v) out.push_back({v, v});
    return out;
  }
  std::vector<int> dist(static_cast<std::size_t>(tree.size()), -1);
  std::vector<Vertex> queue;
  for (Vertex u = 0; u < tree.size(); ++u) {
    queue.assign(1, u);
    dist[static_cast<std::size_t>(u)] = 0;
    std::vector<Vertex> row;
    for (std::size_t h = 0; h < queue.size(); ++h) {
      const Vertex x = queue[h];
      const int dx = dist[static_cast<std::size_t>(x)];
      if (dx == k) {
        if (x > u) row.push_back(x);
        continue;
      }
      for (Vertex y : tree.neighbors(x)) {
        if (dist[static_cast<std::size_t>(y)] < 0) {
          dist[static_cast<std::size_t>(y)] = dx + 1;
          queue.push_back(y);
        }
      }
    }
    for (Vertex x : queue) dist[static_cast<std::size_t>(x)] = -1;
    std::sort(row.begin(), row.end());
    for (Vertex v : row) out.push_back({u, v});
  }
  return out;
}

bool paths_intersect(const Tree& tree, VertexPair a, VertexPair b) {
  const auto pa = tree.path(a.u, a.v);
  const auto pb = tree.path(b.u, b.v);
  for (EdgeId e : pa) {
    if (std::find(pb.begin(), pb.end(), e) != pb.end()) return true;
  }
  return false;
}

std::int64_t neighborhood_count(const Tree& tree, VertexPair pair, int k, double ell0) {
  pair = ordered(pair);
  const std::int64_t reach = ell0 < 9.0e18 ? static_cast<std::int64_t>(std::floor(ell0))
                                           : std::numeric_limits<std::int64_t>::max();
  const int ell = tree.dist(pair.u, pair.v);
  if (ell < 2 || ell > reach) {
    throw std::invalid_argument("pair at distance " + std::to_string(ell) +
                                " is not a path-graph vertex");
  }
  if (k < 2 || k > reach) throw std::invalid_argument("k outside [2, ell0]");
  std::int64_t count = 0;
  for (const VertexPair& q : pairs_at_distance(tree, k)) {
    if (q == pair) continue;
    if (paths_intersect(tree, pair, q)) ++count;
  }
  return count;
}

double neighborhood_bound(double n, int ell, int k, int delta) {
  const double other = 5.0 * ell * k * std::pow(static_cast<double>(delta - 1), k - 1);
  return std::min(n * n, other);
}

std::vector<std::int64_t> neighborhood_counts_by_components(const Tree& tree, VertexPair pair,
                                                            int max_k) {
  pair = ordered(pair);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(std::max(max_k, 1)) + 1, 0);
  std::vector<int> label(static_cast<std::size_t>(tree.size()));
  std::vector<char> cut(static_cast<std::size_t>(tree.num_edges()), 0);
  std::vector<Vertex> queue;
  label_components(tree, pair, label, cut, queue);
  for (const DistPair& q : local_pairs(tree, max_k)) {
    if (q.u == pair.u && q.v == pair.v) continue;
    if (label[static_cast<std::size_t>(q.u)] != label[static_cast<std::size_t>(q.v)]) {
      ++counts[static_cast<std::size_t>(q.d)];
    }
  }
  return counts;
}

Claim42Report check_claim42(const Tree& tree, double ell0, int delta) {
  Claim42Report rep;
  const double reach = std::min(std::floor(ell0), static_cast<double>(tree.size() - 1));
  rep.max_distance = static_cast<int>(std::max(reach, 0.0));
  const auto pairs = local_pairs(tree, rep.max_distance);
  const double n = tree.size();

  std::vector<int> label(static_cast<std::size_t>(tree.size()));
  std::vector<char> cut(static_cast<std::size_t>(tree.num_edges()), 0);
  std::vector<Vertex> queue;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(rep.max_distance) + 1);
  for (const DistPair& p : pairs) {
    label_components(tree, {p.u, p.v}, label, cut, queue);
    std::fill(counts.begin(), counts.end(), 0);
    for (const DistPair& q : pairs) {
      if (label[static_cast<std::size_t>(q.u)] != label[static_cast<std::size_t>(q.v)]) {
        ++counts[static_cast<std::size_t>(q.d)];
      }
    }
    --counts[static_cast<std::size_t>(p.d)];  // the pair itself
    ++rep.pairs_checked;
    for (int k = 2; k <= rep.max_distance; ++k) {
      const double bound = neighborhood_bound(n, p.d, k, delta);
      const auto c = counts[static_cast<std::size_t>(k)];
      rep.worst_ratio = std::max(rep.worst_ratio, static_cast<double>(c) / bound);
      if (static_cast<double>(c) > bound) {
        rep.holds = false;
        rep.violations.push_back({{p.u, p.v}, p.d, k, c, bound});
      }
    }
  }
  return rep;
}

double log_weight(const EmbeddingParams& params, std::int64_t k) {
  if (k < 2) throw std::invalid_argument("weights are defined for k >= 2");
  const double kd = static_cast<double>(k);
  if (kd <= params.k1) {
    return -((kd + 1.0) * std::log(2.0) + std::log(6.0) + std::log(params.ell0) + std::log(kd) +
             kd * std::log(static_cast<double>(params.delta - 1)));
  }
  return std::log(3.0) - std::log(2.0) - 2.0 * std::log(std::numbers::pi) - 2.0 * std::log(kd) -
         2.0 * params.log_n;
}

double weight_h(const Tree& tree, VertexPair pair, const EmbeddingParams& params) {
  return std::exp(log_weight(params, tree.dist(pair.u, pair.v)));
}

LogProbBound analytic_prob_bounds(const EmbeddingParams& params) {
  const double m = params.dim_real;
  const double short_range = -std::pow(m, params.kappa / 2.0);
  const double slope = -0.5 * (0.5 - params.c1) * m;
  const std::int64_t k0 = params.k0;
  return [=](std::int64_t k) {
    return k <= k0 ? short_range : slope * std::log(static_cast<double>(k));
  };
}

LogProbBound tabulated_prob_bounds(std::map<std::int64_t, double> table) {
  return [table = std::move(table)](std::int64_t k) {
    const auto it = table.find(k);
    if (it == table.end()) throw std::out_of_range("no probability bound for k=" + std::to_string(k));
    return it->second > 0.0 ? std::log(it->second) : -std::numeric_limits<double>::infinity();
  };
}

LllReport check_lll_condition(const EmbeddingParams& params, const LogProbBound& prob_bounds) {
  LllReport rep;
  rep.max_k = params.max_local_distance();
  if (rep.max_k < 2) {
    rep.vacuous = true;
    return rep;
  }
  const double log_n = params.log_n;
  const double log_d1 = std::log(static_cast<double>(params.delta - 1));
  const double log_ell0 = std::log(params.ell0);
  const double log_kmax = std::log(static_cast<double>(rep.max_k));
  const std::int64_t explicit_end = std::min(rep.max_k, kExplicitK);

  auto check_c = [&](std::int64_t k) {
    const double lhs = prob_bounds(k);
    if (!(lhs <= log_weight(params, k) - std::log(2.0))) {
      rep.cond_c = false;
      if (rep.failing_k.size() < kMaxFailingReported) rep.failing_k.push_back(k);
    }
  };

  double sum_a = 0.0, sum_b = 0.0;
  for (std::int64_t k = 2; k <= explicit_end; ++k) {
    const double kd = static_cast<double>(k);
    const double lb = log_weight(params, k);
    sum_a += std::exp(lb + log_min_count(log_n, std::log(6.0) + log_ell0 + std::log(kd) + kd * log_d1));
    // Worst neighbourhood: the largest ell, since the count bound grows with ell.
    sum_b += std::exp(log_min_count(log_n, std::log(5.0) + log_kmax + std::log(kd) + (kd - 1.0) * log_d1) +
                      log_neg_log1m(lb));
    check_c(k);
  }
  if (rep.max_k > explicit_end) {
    // Tails: b_k * count <= 2^-k on the geometric range, <= 3/(2 pi^2 k^2) beyond k1.
    const double start = static_cast<double>(explicit_end);
    const double geometric = std::ldexp(1.0, -static_cast<int>(std::min(start, 1000.0)));
    const double harmonic = 3.0 / (2.0 * std::numbers::pi * std::numbers::pi * std::max(start, params.k1));
    sum_a += geometric + harmonic;
    sum_b += 1.01 * (geometric + harmonic);
    // The analytic bounds minus log b_k are concave in k on each regime, so
    // the regime endpoints are the binding checks.
    const double k0 = static_cast<double>(params.k0);
    const double edges[][2] = {{2.0, k0}, {k0 + 1.0, params.k1}, {params.k1 + 1.0, static_cast<double>(rep.max_k)}};
    for (const auto& e : edges) {
      const double lo = std::max(e[0], start + 1.0);
      const double hi = std::min(e[1], static_cast<double>(rep.max_k));
      if (lo > hi) continue;
      check_c(static_cast<std::int64_t>(lo));
      check_c(static_cast<std::int64_t>(hi));
    }
  }
  rep.sum_a = sum_a;
  rep.cond_a = sum_a <= 0.5;
  rep.log_product = -sum_b;
  rep.cond_b = rep.log_product >= std::log(0.5);
  return rep;
}

LllReport check_lll_condition(const Tree& tree, const EmbeddingParams& params,
                              const LogProbBound& prob_bounds) {
  const std::int64_t reach = std::min<std::int64_t>(params.max_local_distance(), tree.size() - 1);
  bool any_pair = false;
  if (reach >= 2) {
    for (Vertex v = 0; v < tree.size() && !any_pair; ++v) any_pair = tree.depth(v) >= 2 || tree.degree(tree.root()) >= 2;
  }
  if (!any_pair) {
    LllReport rep;
    rep.vacuous = true;
    rep.max_k = params.max_local_distance();
    return rep;
  }
  return check_lll_condition(params, prob_bounds);
}

N0Estimate estimate_n0(int delta, const ConstantsConfig& constants, double max_log10_log_n) {
  N0Estimate est;
  auto holds_at = [&](double log_n, EmbeddingParams& p, LllReport& r) {
    p = derive_params_log(log_n, delta, Mode::theory, {}, constants);
    r = check_lll_condition(p, analytic_prob_bounds(p));
    return r.holds();
  };
  const double start = std::log10(std::log(8.0));
  const double step = 0.01;
  EmbeddingParams p;
  LllReport r;
  double prev = start;
  bool prev_known = false;
  for (int i = 0;; ++i) {
    const double x = start + step * i;
    if (x > max_log10_log_n) return est;
    if (holds_at(std::pow(10.0, x), p, r)) {
      double lo = prev_known ? std::pow(10.0, prev) : std::pow(10.0, x);
      double hi = std::pow(10.0, x);
      if (prev_known) {
        for (int it = 0; it < 80; ++it) {
          const double mid = std::sqrt(lo * hi);
          EmbeddingParams pm;
          LllReport rm;
          if (holds_at(mid, pm, rm)) hi = mid; else lo = mid;
        }
      }
      est.found = true;
      est.log_n = hi;
      est.log10_n = hi / std::log(10.0);
      holds_at(hi, est.params, est.report);
      return est;
    }
    prev = x;
    prev_known = true;
  }
}

MtResult moser_tardos_embed(const Tree& tree, const NormedSpace& space,
                            const EmbeddingParams& params, std::uint64_t seed,
                            const MtOptions& options) {
  MtResult res{false, 0, 0, 0, EmbeddingState(tree, space, params, seed), {}, {}};
  EmbeddingState& st = res.state;
  const std::size_t stride = std::max<std::size_t>(options.history_stride, 1);
  std::size_t snapshots = 0;
  auto record = [&](std::size_t l, std::size_t a) {
    if (snapshots++ % stride == 0) res.history.push_back({res.rounds, l, a});
  };
  std::vector<char> used(static_cast<std::size_t>(tree.num_edges()), 0);

  for (;;) {
    for (;;) {
      auto lv = enumerate_l_violations(st);
      if (lv.empty()) break;
      record(lv.size(), 0);
      if (res.rounds >= options.max_rounds) {
        res.report = verify(st, options.verify);
        res.report.l_violations = std::move(lv);
        return res;
      }
      const auto path = tree.path(lv.front().u, lv.front().v);
      st.resample(path, Resample::ball);
      ++res.rounds;
      ++res.l_rounds;
    }

    ViolationReport rep = verify(st, options.verify);
    record(0, rep.violation_count());
    if (rep.embedding_ok()) {
      res.success = true;
      res.report = std::move(rep);
      return res;
    }
    if (res.rounds >= options.max_rounds) {
      res.report = std::move(rep);
      return res;
    }

    // Residual violations: resample a maximal set of pairwise edge-disjoint
    // offending paths. Edge pairs can only fail through the regularizer.
    std::vector<std::pair<PairViolation, bool>> bad;
    for (const auto& v : rep.edge_violations) bad.emplace_back(v, true);
    for (const auto& v : rep.nonedge_violations) bad.emplace_back(v, false);
    std::sort(bad.begin(), bad.end(), [](const auto& a, const auto& b) {
      return a.first.u != b.first.u ? a.first.u < b.first.u : a.first.v < b.first.v;
    });
    std::fill(used.begin(), used.end(), 0);
    for (const auto& [v, is_edge] : bad) {
      if (res.rounds >= options.max_rounds) break;
      const auto path = tree.path(v.u, v.v);
      if (std::any_of(path.begin(), path.end(), [&](EdgeId e) { return used[static_cast<std::size_t>(e)]; })) {
        continue;
      }
      for (EdgeId e : path) used[static_cast<std::size_t>(e)] = 1;
      st.resample(path, is_edge ? Resample::gaussian : Resample::both);
      ++res.rounds;
      ++res.a_rounds;
    }
  }
}

SuccessStats success_probability(const Tree& tree, const NormedSpace& space,
                                 const EmbeddingParams& params, std::size_t trials,
                                 std::uint64_t master_seed, const MtOptions& options) {
  if (trials < 1) throw std::invalid_argument("trials must be >= 1");
  SuccessStats s;
  s.trials = trials;
  double rounds = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto r = moser_tardos_embed(tree, space, params, derive_seed(master_seed, t), options);
    if (r.success) ++s.successes;
    rounds += static_cast<double>(r.rounds);
  }
  s.mean_rounds = rounds / static_cast<double>(trials);
  return s;
}

}  // namespace geoembed
