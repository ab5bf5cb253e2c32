#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "geoembed/rng.hpp"

namespace geoembed {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using VecRef = Eigen::Ref<const VectorXd>;

/// Constants the asymptotic analysis leaves unspecified.
struct ConstantsConfig {
  double kappa = 0.25;         ///< thin-shell exponent, in (0,1)
  double cb_l_product = 2.0;   ///< volume constant times slicing constant, > 1
  double thinshell_c = 1.0;    ///< radius constant of the volume estimate, > 0

  void validate() const;
};

enum class BodyKind { lp, polytope, ellipsoid };

/// Random-walk settings for polytope bodies. Zero means "use the default"
/// (burn-in 10*m^2, thinning m).
struct HitAndRunOptions {
  std::size_t burn_in = 0;
  std::size_t thinning = 0;
};

/// Raw (un-normalized) description of a symmetric convex body.
struct BodySpec {
  BodyKind kind = BodyKind::lp;
  int m = 1;
  double p = 2.0;    ///< lp only; +infinity for the cube
  MatrixXd matrix;   ///< polytope: one facet functional per row; ellipsoid: shape Q with ball {x'Qx <= 1}
};

/// A finite-dimensional normed space placed in isotropic position.
///
/// All public vectors live in isotropic coordinates: the unit ball B_X is the
/// image of the raw body under iso_map(), and a uniform point of B_X has zero
/// mean and identity covariance. Immutable after construction.
class NormedSpace {
 public:
  static NormedSpace lp(int m, double p);
  static NormedSpace ellipsoid(const MatrixXd& shape);
  static NormedSpace polytope(const MatrixXd& facets, std::size_t sample_budget = 100000,
                              std::uint64_t seed = 0, HitAndRunOptions walk = {});
  static NormedSpace from_spec(const BodySpec& spec, std::size_t sample_budget = 100000,
                               std::uint64_t seed = 0);

  int dim() const { return m_; }
  BodyKind kind() const { return spec_.kind; }
  double p() const { return spec_.p; }
  const BodySpec& spec() const { return spec_; }
  std::string describe() const;

  /// ||x||_X in isotropic coordinates.
  double norm(const VecRef& x) const;
  /// Norm of the raw body, before the isotropic map.
  double raw_norm(const VecRef& x) const;

  /// One uniform draw from B_X (isotropic coordinates).
  VectorXd sample(Rng& rng) const;
  /// `count` draws as columns. Polytope bodies use a single thinned walk.
  MatrixXd sample_batch(std::size_t count, Rng& rng) const;

  /// Linear map taking the raw body to isotropic position.
  const MatrixXd& iso_map() const { return iso_map_; }

  /// Columns x_1..x_m with |a|_2 <= ||sum a_i x_i||_X <= sqrt(m)|a|_2.
  const MatrixXd& john_basis() const { return john_; }
  /// Coordinates of x in the John basis.
  VectorXd aux_coordinates(const VecRef& x) const;
  /// ||x||_2^*: Euclidean length of the John-basis coordinates.
  double aux_norm(const VecRef& x) const;

  /// Whether the norm of the lp kind has a closed form John basis (diagonal).
  bool diagonal_john() const { return john_scale_.has_value(); }

 private:
  NormedSpace() = default;
  void finish_john_basis();
  VectorXd walk_sample(Rng& rng, VectorXd start, std::size_t steps) const;

  BodySpec spec_;
  int m_ = 0;
  MatrixXd iso_map_;
  double iso_scale_ = 1.0;      // lp / ellipsoid: iso_map = iso_scale * (raw whitening)
  MatrixXd iso_facets_;         // polytope facets in isotropic coordinates
  MatrixXd john_;
  MatrixXd john_inverse_;
  std::optional<double> john_scale_;
  HitAndRunOptions walk_;
};

/// Parses "lp:<p>", "lp:inf", "polytope:<csv>", "ellipsoid:<csv>".
/// `m` is required for lp descriptors and checked against file shapes otherwise.
NormedSpace parse_norm_descriptor(const std::string& descriptor, std::optional<int> m,
                                  std::size_t sample_budget = 100000);

double norm_eval(const NormedSpace& space, const VecRef& x);
VectorXd sample_ball(const NormedSpace& space, Rng& rng);

/// Whitening map for a raw body. Closed form for lp and ellipsoid bodies,
/// symmetric inverse square root of an empirical covariance for polytopes.
MatrixXd isotropic_transform(const BodySpec& body, std::size_t sample_budget = 100000,
                             std::uint64_t seed = 0, HitAndRunOptions walk = {});

MatrixXd john_basis(const NormedSpace& space);

/// Variance of one coordinate of the uniform distribution on the unit lp ball.
double lp_coordinate_variance(int m, double p);
/// log of the Lebesgue volume of the unit lp ball.
double lp_unit_ball_log_volume(int m, double p);

/// Symmetric inverse square root of an SPD matrix. Throws NumericError when
/// the matrix is numerically singular.
MatrixXd inverse_sqrt_spd(const MatrixXd& cov);

/// Empirical mean (column vector) and covariance of column samples.
std::pair<VectorXd, MatrixXd> empirical_moments(const MatrixXd& samples);

struct ThinShellReport {
  int m = 0;
  double kappa = 0;
  std::size_t trials = 0;
  double band = 0;               ///< m^(1/2 - kappa)
  double exceed_fraction = 0;    ///< fraction with | |U|_2 - sqrt(m) | >= band
  double hist_max = 0;           ///< histogram covers [0, hist_max)
  std::vector<std::size_t> histogram;
  bool small_m = false;          ///< m < 16: asymptotic statement, report only

  double gaussian_t = 0;
  std::size_t gaussian_trials = 0;
  std::size_t gaussian_hits = 0;
  double gaussian_bound = 0;     ///< 2 exp(-(t - sqrt m)^2 / 2)
};

ThinShellReport thinshell_diagnostic(const NormedSpace& space, std::size_t trials,
                                     const ConstantsConfig& constants, Rng& rng,
                                     std::size_t gaussian_trials = 0, std::size_t bins = 32);

}  // namespace geoembed
