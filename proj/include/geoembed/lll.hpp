#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "geoembed/embedder.hpp"
#include "geoembed/verifier.hpp"

namespace geoembed {

/// Unordered vertex pair, stored with u < v.
struct VertexPair {
  Vertex u = 0;
  Vertex v = 0;
  friend bool operator==(const VertexPair&, const VertexPair&) = default;
};

/// All pairs at tree distance exactly k, sorted.
std::vector<VertexPair> pairs_at_distance(const Tree& tree, int k);

/// True when the tree paths of the two pairs share an edge.
bool paths_intersect(const Tree& tree, VertexPair a, VertexPair b);

/// Number of path-graph neighbours of `pair` at distance k, by enumerating
/// every pair at distance k. Throws if `pair` or k lies outside [2, ell0].
std::int64_t neighborhood_count(const Tree& tree, VertexPair pair, int k, double ell0);

/// min{N^2, 5 * ell * k * (delta-1)^(k-1)}.
double neighborhood_bound(double n, int ell, int k, int delta);

struct Claim42Violation {
  VertexPair pair;
  int ell = 0;
  int k = 0;
  std::int64_t count = 0;
  double bound = 0;
};

struct Claim42Report {
  bool holds = true;
  int max_distance = 0;         ///< pairs and k range over [2, max_distance]
  std::size_t pairs_checked = 0;
  double worst_ratio = 0;       ///< max count / bound
  std::vector<Claim42Violation> violations;
};

/// Checks the path-graph degree bound for every pair and every k on `tree`.
Claim42Report check_claim42(const Tree& tree, double ell0, int delta);

/// Per-k neighbour counts of `pair` (index k, entries for k in [2, max_k]),
/// computed by splitting the tree along the pair's path and discarding pairs
/// that stay within one component. Independent of neighborhood_count.
std::vector<std::int64_t> neighborhood_counts_by_components(const Tree& tree, VertexPair pair,
                                                            int max_k);

/// log b_k of the LLL weight function.
double log_weight(const EmbeddingParams& params, std::int64_t k);
/// h({u,v}) = b_{dist(u,v)}.
double weight_h(const Tree& tree, VertexPair pair, const EmbeddingParams& params);

/// Upper bound on log P(L_{u,v}) as a function of the tree distance k.
using LogProbBound = std::function<double(std::int64_t)>;

/// Analytic bounds: -m^(kappa/2) for k <= k0, -(1/2)(1/2 - c1) m log k beyond.
LogProbBound analytic_prob_bounds(const EmbeddingParams& params);
/// Bounds from a table of probabilities (e.g. Monte Carlo upper CIs); throws
/// std::out_of_range for a missing k.
LogProbBound tabulated_prob_bounds(std::map<std::int64_t, double> table);

struct LllReport {
  bool vacuous = false;       ///< no pair at distance in [2, ell0]
  std::int64_t max_k = 0;     ///< floor(ell0)
  double sum_a = 0;           ///< sum_k b_k min{N^2, 6 ell0 k (delta-1)^k}
  bool cond_a = true;         ///< sum_a <= 1/2
  double log_product = 0;     ///< log of the worst neighbourhood product
  bool cond_b = true;         ///< product >= 1/2
  bool cond_c = true;         ///< P(L) <= b_k / 2 for every k
  std::vector<std::int64_t> failing_k;  ///< first few k violating (c)
  bool holds() const { return vacuous || (cond_a && cond_b && cond_c); }
};

/// Checks the local-lemma conditions for the schedule in `params`.
LllReport check_lll_condition(const EmbeddingParams& params, const LogProbBound& prob_bounds);
/// As above; vacuous when the tree has no pair at distance 2..floor(ell0).
LllReport check_lll_condition(const Tree& tree, const EmbeddingParams& params,
                              const LogProbBound& prob_bounds);

struct N0Estimate {
  bool found = false;
  double log_n = 0;    ///< natural log of the smallest N found
  double log10_n = 0;
  EmbeddingParams params;
  LllReport report;
};

/// Smallest N (as log N) at which theory-mode parameters with analytic
/// probability bounds satisfy all local-lemma conditions. Scans log log N on a
/// grid and refines by bisection.
N0Estimate estimate_n0(int delta, const ConstantsConfig& constants,
                       double max_log10_log_n = 60.0);

struct MtOptions {
  std::size_t max_rounds = 100000;
  VerifyOptions verify{1e-9, VerifyMode::pruned, 1};
  std::size_t history_stride = 1;  ///< record every n-th snapshot
};

struct MtSnapshot {
  std::size_t round = 0;
  std::size_t l_violations = 0;
  std::size_t a_violations = 0;
};

struct MtResult {
  bool success = false;
  std::size_t rounds = 0;    ///< total resampling steps
  std::size_t l_rounds = 0;  ///< steps spent on L-events
  std::size_t a_rounds = 0;  ///< steps spent on residual embedding violations
  EmbeddingState state;
  ViolationReport report;    ///< final verify report (with L-violations on failure)
  std::vector<MtSnapshot> history;
};

/// Resampling search for a geometric embedding: clears L-events one at a
/// time (lowest pair first, ball vectors on the pair's path), then verifies
/// and resamples the paths of residual violations; repeats until the map is a
/// geometric embedding or max_rounds steps are spent.
MtResult moser_tardos_embed(const Tree& tree, const NormedSpace& space,
                            const EmbeddingParams& params, std::uint64_t seed,
                            const MtOptions& options = {});

struct SuccessStats {
  std::size_t successes = 0;
  std::size_t trials = 0;
  double mean_rounds = 0;  ///< over all trials
};

SuccessStats success_probability(const Tree& tree, const NormedSpace& space,
                                 const EmbeddingParams& params, std::size_t trials,
                                 std::uint64_t master_seed, const MtOptions& options = {});

}  // namespace geoembed
