#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geoembed/embedder.hpp"
#include "geoembed/normspace.hpp"
#include "geoembed/tree.hpp"

namespace geoembed {

struct PairViolation {
  Vertex u = 0;  ///< u < v
  Vertex v = 0;
  double distance = 0;
};

/// A pair whose un-regularized ball-sum difference is too short.
struct LViolation {
  Vertex u = 0;
  Vertex v = 0;
  int k = 0;  ///< tree distance
  double value = 0;
  double threshold = 0;
};

struct ViolationReport {
  std::vector<PairViolation> edge_violations;     ///< adjacent, image distance too large
  std::vector<PairViolation> nonedge_violations;  ///< non-adjacent, image distance too small
  std::vector<LViolation> l_violations;
  std::size_t pairs_considered = 0;  ///< N(N-1)/2
  std::size_t norm_evaluations = 0;  ///< full X-norm evaluations performed
  double max_edge_distance = 0;
  double min_nonedge_distance = 0;   ///< over evaluated non-edge pairs (+inf if none)
  double margin = 0;

  /// True iff the map is a geometric embedding (edge iff image distance <= 1).
  bool embedding_ok() const { return edge_violations.empty() && nonedge_violations.empty(); }
  bool empty() const { return embedding_ok() && l_violations.empty(); }
  std::size_t violation_count() const {
    return edge_violations.size() + nonedge_violations.size() + l_violations.size();
  }
};

enum class VerifyMode { exact, pruned };

struct VerifyOptions {
  double margin = 1e-9;
  VerifyMode mode = VerifyMode::pruned;
  int workers = 0;  ///< 0: GEOEMBED_WORKERS or hardware concurrency
};

/// Worker count from GEOEMBED_WORKERS, falling back to hardware concurrency.
int default_workers();

/// Checks every pair of a vertex map (one column per vertex) against the
/// embedding condition: edges need ||.||_X <= 1 - margin, non-edges > 1 + margin.
/// Violations are sorted by (u, v) regardless of the worker count.
ViolationReport verify(const MatrixXd& points, const Tree& tree, const NormedSpace& space,
                       const VerifyOptions& options = {});
ViolationReport verify(const EmbeddingState& state, const VerifyOptions& options = {});

/// Threshold of the L-event at tree distance k (k >= 2).
double l_threshold(const EmbeddingParams& params, std::int64_t k);

/// All pairs with 2 <= dist <= floor(ell0) whose ball-sum difference has
/// X-norm at most the distance threshold, sorted by (u, v).
std::vector<LViolation> enumerate_l_violations(const EmbeddingState& state);

double aux_norm_eval(const NormedSpace& space, const VecRef& x);

struct DistanceBand {
  int k = 0;
  std::size_t count = 0;
  double min = 0, mean = 0, max = 0;
};

struct DistortionProfile {
  double max_lipschitz = 0;  ///< max ||zeta(u)-zeta(v)||_X / dist(u,v)
  Vertex lip_u = 0, lip_v = 0;
  std::optional<double> min_holder;  ///< min ||.||_X / dist^(1/10) over dist > k0
  Vertex holder_u = 0, holder_v = 0;
  std::vector<DistanceBand> bands;  ///< per tree distance
};

DistortionProfile distortion_profile(const MatrixXd& points, const Tree& tree,
                                     const NormedSpace& space, std::int64_t k0);

/// Dimension lower bound 0.5 * log N / log log N.
double lower_bound_dim(std::int64_t n);

struct PackingCertificate {
  std::int64_t n = 0;
  int delta = 0;
  int claimed_m = 0;
  double lower_bound = 0;
  bool below_bound = false;
  int h0 = 0;
  std::int64_t independent_set = 0;  ///< larger colour class of the extremal tree
  bool has_volume = false;           ///< lp bodies only
  double log_packed_volume = 0;      ///< log((N/2) * vol(B(0, 1/2)))
  double log_container_volume = 0;   ///< log(vol(B(0, h0 + 1/2)))
  bool volume_inequality_holds = true;
  std::string verdict;
  std::string instance;
};

/// Non-embeddability certificate for the extremal tree on N vertices.
/// `space` supplies the body for the volume inequality (lp kinds only).
PackingCertificate packing_certificate(int delta, std::int64_t n, int claimed_m,
                                       const NormedSpace* space = nullptr);

}  // namespace geoembed
