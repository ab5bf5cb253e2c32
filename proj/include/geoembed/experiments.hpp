#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "geoembed/embedder.hpp"
#include "geoembed/lll.hpp"
#include "geoembed/normspace.hpp"
#include "geoembed/tree.hpp"

namespace geoembed {

struct Interval {
  double lower = 0;
  double upper = 1;
};

/// Exact two-sided binomial confidence interval.
Interval clopper_pearson(std::size_t hits, std::size_t trials, double level = 0.95);

struct VolumeRow {
  int m = 0;
  double log_volume = 0;  ///< log of the isotropic ball volume
  double constant = 0;    ///< volume^(1/m)
  double cross_check = 0; ///< same constant from an independent formula (NaN if none)
};

struct VolumeBoundReport {
  double p = 2;
  double cap = 6;
  double max_constant = 0;
  bool bounded = true;  ///< every constant <= cap
  std::vector<VolumeRow> rows;
};

/// Volume of the isotropic lp ball for each m, with the per-dimension
/// constant. p = 2 is cross-checked by the ball recursion, p = inf by the cube.
VolumeBoundReport check_volume_bound(double p, const std::vector<int>& m_list, double cap = 6.0);

struct McEstimate {
  std::size_t trials = 0;
  std::size_t hits = 0;
  double estimate = 0;
  Interval ci;
  double threshold = 0;
  double bound = 0;
  bool bound_applicable = true;
  bool exploratory = false;
  bool conclusive = true;
  std::vector<std::string> warnings;

  /// CI upper end at or below the analytic bound.
  bool consistent() const { return bound_applicable && ci.upper <= bound; }
};

/// Smallest k covered by the large-k small-ball bound: (C_B L)^(4/(1-2 c1)).
double large_k_threshold(double c1, const ConstantsConfig& constants);

/// P(||Y_1 + ... + Y_k||_X <= k^c1) for i.i.d. uniform Y_i in B_X, against
/// exp(-(1/2)(1/2 - c1) m log k). k below large_k_threshold needs `exploratory`.
McEstimate mc_large_k_small_ball(const NormedSpace& space, int k, double c1, std::size_t trials,
                                 std::uint64_t seed, bool exploratory = false,
                                 const ConstantsConfig& constants = {});

/// P(||Y_1 + ... + Y_k||_X <= 1 + 1/(2 m^(1-kappa))) against exp(-m^(kappa/2)).
McEstimate mc_small_k_near_unit(const NormedSpace& space, int k, double kappa, std::size_t trials,
                                std::uint64_t seed);

struct CaseRow {
  int regime = 0;  ///< 1: k = 1; 2: 2 <= k <= k0; 3: k0 < k <= ell0; 4: k > ell0
  bool empty = false;
  VertexPair pair;
  int k = 0;
  std::size_t conditioned = 0;  ///< samples free of L-events
  std::size_t failures = 0;
  double frequency = 0;
  Interval ci;
  double target = 0;  ///< 1/N^2
};

struct CaseReport {
  std::size_t trials = 0;
  std::size_t l_free = 0;
  std::vector<CaseRow> rows;
};

/// Conditional embedding-failure frequency of one representative pair per
/// distance regime (the farthest pair in the regime, lowest ids first), among
/// fresh embeddings with no L-event.
CaseReport mc_case_bounds(const Tree& tree, const NormedSpace& space, const EmbeddingParams& params,
                          std::size_t trials, std::uint64_t seed);

struct SweepConfig {
  std::vector<std::string> norms;
  std::vector<std::int64_t> n_grid;
  std::vector<int> delta_grid;
  std::vector<int> m_grid;  ///< empty: the mode's default dimension
  Mode mode = Mode::practical;
  std::size_t trials = 10;
  std::uint64_t master_seed = 0;
  std::string output;
  std::string tree_kind = "heap";  ///< heap | part-a | random
  std::size_t max_rounds = 100000;
  std::optional<double> delta_scale;
  bool timing = false;  ///< record wallclock; off keeps CSV bodies reproducible

  void validate() const;
};

SweepConfig parse_sweep_config(const std::string& json_text);

struct TrialRecord {
  std::string norm;
  std::int64_t n = 0;
  int delta = 0;
  int m = 0;
  Mode mode = Mode::practical;
  std::uint64_t seed = 0;
  bool success = false;
  std::size_t rounds = 0;
  double wallclock_ms = 0;
  std::optional<double> max_lip;
  std::optional<double> min_holder;
};

inline constexpr const char* kSweepHeader =
    "norm,N,delta,m,mode,seed,success,rounds,wallclock_ms,max_lip,min_holder";

std::string format_record(const TrialRecord& r);
TrialRecord parse_record(const std::string& line);

struct SweepSummaryRow {
  std::string norm;
  std::int64_t n = 0;
  int delta = 0;
  std::optional<int> threshold_m;  ///< smallest m with success rate >= 0.9
  double reference = 0;            ///< log N / log log N
};

struct SweepResult {
  std::vector<TrialRecord> records;  ///< canonical order
  std::size_t reused = 0;            ///< records taken from an existing output
  std::vector<SweepSummaryRow> summary;
};

/// Tree used for a sweep cell.
Tree sweep_tree(const SweepConfig& config, std::int64_t n, int delta);

/// Runs every (norm, N, delta, m, trial) cell. When config.output names an
/// existing file its records are reused; rows are appended as they complete
/// and the file is rewritten in canonical order at the end.
SweepResult sweep(const SweepConfig& config);

}  // namespace geoembed
