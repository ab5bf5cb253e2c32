#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "geoembed/normspace.hpp"
#include "geoembed/tree.hpp"

namespace geoembed {

enum class Mode { theory, practical };

std::string to_string(Mode mode);
Mode parse_mode(const std::string& text);

/// Knobs for practical mode. Theory mode rejects every override.
struct ParamOverrides {
  std::optional<int> m;                  ///< explicit dimension
  std::optional<double> dim_coefficient; ///< m = ceil(coef * log N / log log N); default 8
  std::optional<double> delta_scale;     ///< multiplies the regularizer weight formula
  std::optional<double> ell0_scale;      ///< multiplies the local-range formula
  std::optional<std::int64_t> k0;        ///< short-range cutoff; default 8

  bool any() const { return m || dim_coefficient || delta_scale || ell0_scale || k0; }
};

/// Default regularizer multiplier in practical mode (see README).
inline constexpr double kPracticalDeltaScale = 0.01;
inline constexpr double kPracticalDimCoefficient = 8.0;
inline constexpr std::int64_t kPracticalK0 = 8;
inline constexpr double kTheoryAlpha1 = 64.0;

/// Full parameter schedule of the random embedding. Natural logarithms
/// throughout. `log_n` is authoritative; `n` is 0 when the schedule was
/// derived at an astronomically large size for analytic checks only.
struct EmbeddingParams {
  std::int64_t n = 0;
  double log_n = 0;
  int delta = 3;
  Mode mode = Mode::practical;
  double dim_real = 0;   ///< dimension as a real (may exceed int range in analysis)
  int m = 0;             ///< dimension used for embedding; 0 if not representable
  double alpha1 = kTheoryAlpha1;
  double c1 = 0.25;
  double kappa = 0.25;
  double c2 = 0.0625;
  double shrink = 0;     ///< 1 - 1/log N
  double delta_reg = 0;  ///< Gaussian regularizer weight
  double ell0 = 0;       ///< local range: L-events for 2 <= dist <= floor(ell0)
  std::int64_t k0 = 0;   ///< short/long split of L-event thresholds
  double k1 = 0;         ///< floor(log N / log(delta-1)); real to survive huge N
  double delta_scale = 1;
  double ell0_scale = 1;
  ConstantsConfig constants;

  /// floor(ell0): largest distance with an L-event.
  std::int64_t max_local_distance() const;
};

/// Parameter schedule for an N-vertex tree of maximum degree `delta`.
EmbeddingParams derive_params(std::int64_t n, int delta, Mode mode,
                              const ParamOverrides& overrides = {},
                              const ConstantsConfig& constants = {});
/// Same schedule evaluated at log N directly, for sizes far beyond 2^63.
EmbeddingParams derive_params_log(double log_n, int delta, Mode mode,
                                  const ParamOverrides& overrides = {},
                                  const ConstantsConfig& constants = {});

enum class Resample { ball, gaussian, both };

/// Random vertex map built from per-edge ball vectors Y_e and Gaussian
/// regularizers G_e = sum_i g_i^e x_i (x_i the John basis):
///   zeta(v) = shrink * sum_{e on root->v} Y_e + delta_reg * sum_{e on root->v} G_e.
///
/// Draws for edge e come from the counter-based stream (seed, e, counter), so
/// redrawing one edge never disturbs the others. Holds non-owning references
/// to the tree and space, which must outlive the state.
class EmbeddingState {
 public:
  EmbeddingState(const Tree& tree, const NormedSpace& space, const EmbeddingParams& params,
                 std::uint64_t seed);

  const Tree& tree() const { return *tree_; }
  const NormedSpace& space() const { return *space_; }
  const EmbeddingParams& params() const { return params_; }
  std::uint64_t seed() const { return seed_; }

  /// Vertex images, one column per vertex.
  const MatrixXd& zeta() const { return zeta_; }
  auto zeta(Vertex v) const { return zeta_.col(v); }
  /// Un-regularized root-path sums of ball vectors, one column per vertex.
  const MatrixXd& ball_sums() const { return ball_sums_; }
  const MatrixXd& gaussian_sums() const { return gauss_sums_; }
  const MatrixXd& ball_vectors() const { return y_; }
  const MatrixXd& gaussian_coefficients() const { return g_; }
  const MatrixXd& regularizers() const { return big_g_; }
  std::uint64_t ball_draws(EdgeId e) const { return ball_counter_.at(e); }
  std::uint64_t gaussian_draws(EdgeId e) const { return gauss_counter_.at(e); }

  /// Redraws the selected variables on `edges` and refreshes the affected subtrees.
  void resample(std::span<const EdgeId> edges, Resample which);
  /// Rebuilds every prefix sum from the stored draws.
  void recompute();

  /// zeta(u) - zeta(v).
  VectorXd pair_difference(Vertex u, Vertex v) const;
  /// Same difference assembled from the u-v path alone (telescoped form).
  VectorXd path_difference(Vertex u, Vertex v) const;
  /// sum_{root->u} Y - sum_{root->v} Y.
  VectorXd ball_sum_difference(Vertex u, Vertex v) const;

  /// shrink + delta_reg * max_e ||G_e||_X: per-unit-distance Lipschitz bound.
  double lipschitz_bound() const;

 private:
  void draw_ball(EdgeId e);
  void draw_gaussian(EdgeId e);
  void refresh_subtree(Vertex top);

  const Tree* tree_;
  const NormedSpace* space_;
  EmbeddingParams params_;
  std::uint64_t seed_;
  MatrixXd y_, g_, big_g_;
  MatrixXd ball_sums_, gauss_sums_, zeta_;
  std::vector<std::uint64_t> ball_counter_, gauss_counter_;
};

/// Draws a fresh embedding. Throws DimensionError when params.m != space.dim().
EmbeddingState embed(const Tree& tree, const NormedSpace& space, const EmbeddingParams& params,
                     std::uint64_t seed);

VectorXd pair_difference(const EmbeddingState& state, Vertex u, Vertex v);

void resample_edges(EmbeddingState& state, std::span<const EdgeId> edges, Resample which);

}  // namespace geoembed
