#include "geoembed/normspace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "geoembed/errors.hpp"
#include "geoembed/io.hpp"

namespace geoembed {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_cube(double p) { return std::isinf(p); }

constexpr double kMaxFiniteP = 1e4;

void check_dim(const NormedSpace& space, const VecRef& x) {
  if (x.size() != space.dim()) {
    throw DimensionError("vector of length " + std::to_string(x.size()) +
                         " used with a space of dimension " + std::to_string(space.dim()));
  }
}

double lp_raw_norm(const VecRef& x, double p) {
  if (is_cube(p)) return x.lpNorm<Eigen::Infinity>();
  if (p == 1.0) return x.lpNorm<1>();
  if (p == 2.0) return x.norm();
  const double scale = x.lpNorm<Eigen::Infinity>();
  if (scale == 0.0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += std::pow(std::abs(x[i]) / scale, p);
  return scale * std::pow(acc, 1.0 / p);
}

// Uniform point of the unit lp ball: generalized-Gaussian coordinates
// normalized together with an independent exponential.
VectorXd sample_unit_lp(int m, double p, Rng& rng) {
  VectorXd x(m);
  if (is_cube(p)) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int i = 0; i < m; ++i) x[i] = u(rng);
    return x;
  }
  std::exponential_distribution<double> expo(1.0);
  double sum = 0.0;
  if (p == 2.0) {
    // density exp(-t^2): normal with variance 1/2
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    for (int i = 0; i < m; ++i) {
      x[i] = normal(rng);
      sum += x[i] * x[i];
    }
    sum += expo(rng);
    return x / std::sqrt(sum);
  }
  std::bernoulli_distribution sign(0.5);
  if (p == 1.0) {
    for (int i = 0; i < m; ++i) {
      const double t = expo(rng);
      sum += t;
      x[i] = sign(rng) ? t : -t;
    }
    sum += expo(rng);
    return x / sum;
  }
  std::gamma_distribution<double> gamma(1.0 / p, 1.0);
  for (int i = 0; i < m; ++i) {
    const double g = gamma(rng);
    sum += g;  // |t_i|^p
    const double t = std::pow(g, 1.0 / p);
    x[i] = sign(rng) ? t : -t;
  }
  sum += expo(rng);
  return x / std::pow(sum, 1.0 / p);
}

VectorXd random_direction(int m, Rng& rng) {
  std::normal_distribution<double> normal;
  VectorXd d(m);
  double n2 = 0.0;
  do {
    for (int i = 0; i < m; ++i) d[i] = normal(rng);
    n2 = d.squaredNorm();
  } while (n2 == 0.0);
  return d / std::sqrt(n2);
}

// One hit-and-run chain on {x : |F x|_inf <= 1}.
VectorXd hit_and_run(const MatrixXd& facets, VectorXd x, std::size_t steps, Rng& rng) {
  const int m = static_cast<int>(x.size());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t step = 0; step < steps; ++step) {
    const VectorXd d = random_direction(m, rng);
    const VectorXd c = facets * x;
    const VectorXd s = facets * d;
    double lo = -kInf, hi = kInf;
    for (Eigen::Index j = 0; j < facets.rows(); ++j) {
      if (std::abs(s[j]) < 1e-300) continue;
      double a = (-1.0 - c[j]) / s[j];
      double b = (1.0 - c[j]) / s[j];
      if (a > b) std::swap(a, b);
      lo = std::max(lo, a);
      hi = std::min(hi, b);
    }
    if (!(lo <= hi) || std::isinf(lo) || std::isinf(hi)) {
      throw NumericError("hit-and-run: unbounded or empty chord (degenerate polytope)");
    }
    x += (lo + (hi - lo) * unit(rng)) * d;
  }
  return x;
}

std::size_t default_burn_in(const HitAndRunOptions& walk, int m) {
  return walk.burn_in ? walk.burn_in : static_cast<std::size_t>(10) * m * m;
}
std::size_t default_thinning(const HitAndRunOptions& walk, int m) {
  return walk.thinning ? walk.thinning : static_cast<std::size_t>(m);
}

MatrixXd sqrt_spd(const MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(a);
  if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() <= 0.0) {
    throw std::invalid_argument("shape matrix must be symmetric positive definite");
  }
  return eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal() *
         eig.eigenvectors().transpose();
}

void validate_polytope(const MatrixXd& facets) {
  if (facets.rows() == 0 || facets.cols() == 0) {
    throw std::invalid_argument("polytope needs at least one facet functional");
  }
  Eigen::FullPivLU<MatrixXd> lu(facets);
  if (lu.rank() < facets.cols()) {
    throw std::invalid_argument("polytope facets do not span R^m: body is unbounded");
  }
}

// Minimum-volume centered ellipsoid {y : y' P y <= 1} around the points +-rows,
// by Khachiyan's barycentric coordinate ascent. Returns M = sum u_j a_j a_j'
// so that P = (m M)^{-1}.
MatrixXd khachiyan_moment(const MatrixXd& points, double tol, int max_iter) {
  const Eigen::Index n = points.rows();
  const double m = static_cast<double>(points.cols());
  VectorXd u = VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  MatrixXd moment = points.transpose() * u.asDiagonal() * points;
  for (int it = 0; it < max_iter; ++it) {
    const MatrixXd inv = moment.inverse();
    VectorXd kappa(n);
    for (Eigen::Index j = 0; j < n; ++j) kappa[j] = points.row(j) * inv * points.row(j).transpose();
    Eigen::Index jmax = 0;
    const double kmax = kappa.maxCoeff(&jmax);
    if (kmax <= m * (1.0 + tol)) break;
    const double step = (kmax / m - 1.0) / (kmax - 1.0);
    u *= (1.0 - step);
    u[jmax] += step;
    moment = (1.0 - step) * moment + step * points.row(jmax).transpose() * points.row(jmax);
  }
  return moment;
}

}  // namespace

void ConstantsConfig::validate() const {
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must lie in (0,1)");
  if (!(cb_l_product > 1.0)) throw std::invalid_argument("cb_l_product must exceed 1");
  if (!(thinshell_c > 0.0)) throw std::invalid_argument("thinshell_c must be positive");
}

double lp_coordinate_variance(int m, double p) {
  if (m < 1) throw std::invalid_argument("dimension must be >= 1");
  if (is_cube(p)) return 1.0 / 3.0;
  if (!(p >= 1.0)) throw std::invalid_argument("p must lie in [1, inf]");
  const double md = static_cast<double>(m);
  return std::exp(std::lgamma(3.0 / p) + std::lgamma(1.0 + md / p) - std::lgamma(1.0 / p) -
                  std::lgamma(1.0 + (md + 2.0) / p));
}

double lp_unit_ball_log_volume(int m, double p) {
  if (m < 1) throw std::invalid_argument("dimension must be >= 1");
  const double md = static_cast<double>(m);
  if (is_cube(p)) return md * std::log(2.0);
  if (!(p >= 1.0)) throw std::invalid_argument("p must lie in [1, inf]");
  return md * std::log(2.0) + md * std::lgamma(1.0 + 1.0 / p) - std::lgamma(1.0 + md / p);
}

MatrixXd inverse_sqrt_spd(const MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> eig(cov);
  if (eig.info() != Eigen::Success) throw NumericError("eigen-decomposition failed");
  const VectorXd ev = eig.eigenvalues();
  const double top = std::max(ev.maxCoeff(), 0.0);
  if (!(ev.minCoeff() > 1e-12 * top) || top == 0.0) {
    throw NumericError("singular empirical covariance: too few samples or degenerate body");
  }
  return eig.eigenvectors() * ev.cwiseSqrt().cwiseInverse().asDiagonal() *
         eig.eigenvectors().transpose();
}

std::pair<VectorXd, MatrixXd> empirical_moments(const MatrixXd& samples) {
  const double n = static_cast<double>(samples.cols());
  VectorXd mean = samples.rowwise().mean();
  const MatrixXd centered = samples.colwise() - mean;
  MatrixXd cov = centered * centered.transpose() / (n - 1.0);
  return {mean, cov};
}

MatrixXd isotropic_transform(const BodySpec& body, std::size_t sample_budget, std::uint64_t seed,
                             HitAndRunOptions walk) {
  const int m = body.m;
  switch (body.kind) {
    case BodyKind::lp:
      return MatrixXd::Identity(m, m) / std::sqrt(lp_coordinate_variance(m, body.p));
    case BodyKind::ellipsoid:
      // Uniform on {x'Qx <= 1} has covariance Q^{-1}/(m+2).
      return std::sqrt(static_cast<double>(m) + 2.0) * sqrt_spd(body.matrix);
    case BodyKind::polytope: {
      validate_polytope(body.matrix);
      if (sample_budget < static_cast<std::size_t>(m) + 1) {
        throw NumericError("sample budget too small to estimate a covariance");
      }
      Rng rng = make_stream(seed, 0, 0, StreamTag::whitening);
      const std::size_t thin = default_thinning(walk, m);
      MatrixXd samples(m, static_cast<Eigen::Index>(sample_budget));
      VectorXd x = hit_and_run(body.matrix, VectorXd::Zero(m), default_burn_in(walk, m), rng);
      for (std::size_t i = 0; i < sample_budget; ++i) {
        x = hit_and_run(body.matrix, x, thin, rng);
        samples.col(static_cast<Eigen::Index>(i)) = x;
      }
      return inverse_sqrt_spd(empirical_moments(samples).second);
    }
  }
  throw std::invalid_argument("unknown body kind");
}

NormedSpace NormedSpace::lp(int m, double p) {
  if (m < 1) throw std::invalid_argument("dimension must be >= 1");
  if (!(p >= 1.0)) throw std::invalid_argument("p must lie in [1, inf]");
  // Gamma(1/p) sampling underflows for huge exponents; those are the cube anyway.
  if (!is_cube(p) && p > kMaxFiniteP) throw std::invalid_argument("finite p above 1e4 is not supported; use inf");
  NormedSpace s;
  s.spec_ = BodySpec{BodyKind::lp, m, p, {}};
  s.m_ = m;
  s.iso_scale_ = 1.0 / std::sqrt(lp_coordinate_variance(m, p));
  s.iso_map_ = s.iso_scale_ * MatrixXd::Identity(m, m);
  // |a|_p sits between |a|_2 and sqrt(m)|a|_2 after scaling by m^(1/2-1/p) when p > 2.
  const double stretch = (is_cube(p) || p > 2.0)
                             ? std::pow(static_cast<double>(m), 0.5 - (is_cube(p) ? 0.0 : 1.0 / p))
                             : 1.0;
  s.john_scale_ = s.iso_scale_ * stretch;
  s.john_ = *s.john_scale_ * MatrixXd::Identity(m, m);
  s.john_inverse_ = MatrixXd::Identity(m, m) / *s.john_scale_;
  return s;
}

NormedSpace NormedSpace::ellipsoid(const MatrixXd& shape) {
  if (shape.rows() != shape.cols() || shape.rows() == 0) {
    throw DimensionError("ellipsoid shape must be a non-empty square matrix");
  }
  if (!shape.isApprox(shape.transpose(), 1e-12)) {
    throw std::invalid_argument("ellipsoid shape must be symmetric");
  }
  NormedSpace s;
  s.m_ = static_cast<int>(shape.rows());
  s.spec_ = BodySpec{BodyKind::ellipsoid, s.m_, 2.0, shape};
  s.iso_map_ = isotropic_transform(s.spec_);
  // In isotropic position every ellipsoid is the Euclidean ball of radius sqrt(m+2).
  s.iso_scale_ = std::sqrt(static_cast<double>(s.m_) + 2.0);
  s.john_scale_ = s.iso_scale_;
  s.john_ = s.iso_scale_ * MatrixXd::Identity(s.m_, s.m_);
  s.john_inverse_ = MatrixXd::Identity(s.m_, s.m_) / s.iso_scale_;
  return s;
}

NormedSpace NormedSpace::polytope(const MatrixXd& facets, std::size_t sample_budget,
                                  std::uint64_t seed, HitAndRunOptions walk) {
  validate_polytope(facets);
  NormedSpace s;
  s.m_ = static_cast<int>(facets.cols());
  s.spec_ = BodySpec{BodyKind::polytope, s.m_, 0.0, facets};
  s.walk_ = walk;
  s.iso_map_ = isotropic_transform(s.spec_, sample_budget, seed, walk);
  s.iso_facets_ = facets * s.iso_map_.inverse();
  s.finish_john_basis();
  return s;
}

NormedSpace NormedSpace::from_spec(const BodySpec& spec, std::size_t sample_budget,
                                   std::uint64_t seed) {
  switch (spec.kind) {
    case BodyKind::lp: return lp(spec.m, spec.p);
    case BodyKind::ellipsoid: return ellipsoid(spec.matrix);
    case BodyKind::polytope: return polytope(spec.matrix, sample_budget, seed);
  }
  throw std::invalid_argument("unknown body kind");
}

void NormedSpace::finish_john_basis() {
  // Polar of the MVEE of the facet functionals is the maximal inscribed
  // ellipsoid E = L * B_2; then E ⊆ B_X ⊆ sqrt(m) E up to the solver tolerance.
  const MatrixXd moment = khachiyan_moment(iso_facets_, 1e-10, 200000);
  const MatrixXd l = inverse_sqrt_spd(static_cast<double>(m_) * moment);
  const double widest = (iso_facets_ * l).rowwise().norm().maxCoeff();
  john_ = (std::sqrt(static_cast<double>(m_)) / widest) * l;
  john_inverse_ = john_.inverse();

  // Randomized check of both inequalities.
  Rng rng = make_stream(0, static_cast<std::uint64_t>(m_), 1, StreamTag::whitening);
  std::normal_distribution<double> normal;
  const double sqrt_m = std::sqrt(static_cast<double>(m_));
  for (int trial = 0; trial < 10000; ++trial) {
    VectorXd a(m_);
    for (int i = 0; i < m_; ++i) a[i] = normal(rng);
    const double len = a.norm();
    const double x_norm = norm(john_ * a);
    if (x_norm < len * (1.0 - 1e-9) || x_norm > sqrt_m * len * (1.0 + 1e-9)) {
      throw NumericError("John basis check failed: inscribed ellipsoid too loose");
    }
  }
}

std::string NormedSpace::describe() const {
  std::ostringstream os;
  switch (spec_.kind) {
    case BodyKind::lp:
      os << "lp:";
      if (is_cube(spec_.p)) os << "inf"; else os << spec_.p;
      break;
    case BodyKind::polytope: os << "polytope(" << spec_.matrix.rows() << " facets)"; break;
    case BodyKind::ellipsoid: os << "ellipsoid"; break;
  }
  return os.str();
}

double NormedSpace::raw_norm(const VecRef& x) const {
  check_dim(*this, x);
  switch (spec_.kind) {
    case BodyKind::lp: return lp_raw_norm(x, spec_.p);
    case BodyKind::ellipsoid: return std::sqrt(std::max(0.0, x.dot(spec_.matrix * x)));
    case BodyKind::polytope: return (spec_.matrix * x).cwiseAbs().maxCoeff();
  }
  return 0.0;
}

double NormedSpace::norm(const VecRef& x) const {
  switch (spec_.kind) {
    case BodyKind::lp: return lp_raw_norm(x, spec_.p) / iso_scale_;
    case BodyKind::ellipsoid: return x.norm() / iso_scale_;
    case BodyKind::polytope: return (iso_facets_ * x).cwiseAbs().maxCoeff();
  }
  return 0.0;
}

VectorXd NormedSpace::walk_sample(Rng& rng, VectorXd start, std::size_t steps) const {
  return hit_and_run(iso_facets_, std::move(start), steps, rng);
}

VectorXd NormedSpace::sample(Rng& rng) const {
  switch (spec_.kind) {
    case BodyKind::lp: return iso_scale_ * sample_unit_lp(m_, spec_.p, rng);
    case BodyKind::ellipsoid: return iso_scale_ * sample_unit_lp(m_, 2.0, rng);
    case BodyKind::polytope:
      return walk_sample(rng, VectorXd::Zero(m_), default_burn_in(walk_, m_));
  }
  return {};
}

MatrixXd NormedSpace::sample_batch(std::size_t count, Rng& rng) const {
  MatrixXd out(m_, static_cast<Eigen::Index>(count));
  if (spec_.kind == BodyKind::polytope) {
    VectorXd x = walk_sample(rng, VectorXd::Zero(m_), default_burn_in(walk_, m_));
    const std::size_t thin = default_thinning(walk_, m_);
    for (std::size_t i = 0; i < count; ++i) {
      x = walk_sample(rng, x, thin);
      out.col(static_cast<Eigen::Index>(i)) = x;
    }
    return out;
  }
  for (std::size_t i = 0; i < count; ++i) out.col(static_cast<Eigen::Index>(i)) = sample(rng);
  return out;
}

VectorXd NormedSpace::aux_coordinates(const VecRef& x) const {
  check_dim(*this, x);
  if (john_scale_) return x / *john_scale_;
  return john_inverse_ * x;
}

double NormedSpace::aux_norm(const VecRef& x) const {
  if (john_scale_) return x.norm() / *john_scale_;
  return (john_inverse_ * x).norm();
}

NormedSpace parse_norm_descriptor(const std::string& descriptor, std::optional<int> m,
                                  std::size_t sample_budget) {
  const auto colon = descriptor.find(':');
  if (colon == std::string::npos) {
    throw std::invalid_argument("norm descriptor must look like kind:value, got '" + descriptor + "'");
  }
  const std::string kind = descriptor.substr(0, colon);
  const std::string value = descriptor.substr(colon + 1);
  if (kind == "lp") {
    if (!m) throw std::invalid_argument("lp norm descriptor needs a dimension");
    double p = 0;
    if (value == "inf" || value == "infinity") {
      p = kInf;
    } else {
      std::size_t used = 0;
      try {
        p = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != value.size()) throw std::invalid_argument("bad lp exponent '" + value + "'");
    }
    return NormedSpace::lp(*m, p);
  }
  if (kind == "polytope" || kind == "ellipsoid") {
    const MatrixXd mat = read_matrix_csv(value);
    if (m && mat.cols() != *m) {
      throw DimensionError(kind + " file has " + std::to_string(mat.cols()) +
                           " columns but dimension " + std::to_string(*m) + " was requested");
    }
    return kind == "polytope" ? NormedSpace::polytope(mat, sample_budget)
                              : NormedSpace::ellipsoid(mat);
  }
  throw std::invalid_argument("unknown norm kind '" + kind + "'");
}

double norm_eval(const NormedSpace& space, const VecRef& x) {
  check_dim(space, x);
  return space.norm(x);
}

VectorXd sample_ball(const NormedSpace& space, Rng& rng) { return space.sample(rng); }

MatrixXd john_basis(const NormedSpace& space) { return space.john_basis(); }

ThinShellReport thinshell_diagnostic(const NormedSpace& space, std::size_t trials,
                                     const ConstantsConfig& constants, Rng& rng,
                                     std::size_t gaussian_trials, std::size_t bins) {
  constants.validate();
  if (trials < 1000) throw std::invalid_argument("thin-shell diagnostic needs at least 1000 trials");
  if (bins == 0) bins = 1;
  ThinShellReport r;
  r.m = space.dim();
  r.kappa = constants.kappa;
  r.trials = trials;
  const double md = static_cast<double>(r.m);
  const double root = std::sqrt(md);
  r.band = std::pow(md, 0.5 - constants.kappa);
  r.small_m = r.m < 16;
  r.hist_max = 2.0 * root;
  r.histogram.assign(bins, 0);

  const MatrixXd samples = space.sample_batch(trials, rng);
  std::size_t exceed = 0;
  for (Eigen::Index i = 0; i < samples.cols(); ++i) {
    const double len = samples.col(i).norm();
    if (std::abs(len - root) >= r.band) ++exceed;
    const auto bin = static_cast<std::size_t>(len / r.hist_max * static_cast<double>(bins));
    ++r.histogram[std::min(bin, bins - 1)];
  }
  r.exceed_fraction = static_cast<double>(exceed) / static_cast<double>(trials);

  r.gaussian_trials = gaussian_trials ? gaussian_trials : trials;
  r.gaussian_t = 2.0 * root;
  r.gaussian_bound = 2.0 * std::exp(-(r.gaussian_t - root) * (r.gaussian_t - root) / 2.0);
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < r.gaussian_trials; ++i) {
    double n2 = 0.0;
    for (int j = 0; j < r.m; ++j) {
      const double g = normal(rng);
      n2 += g * g;
    }
    if (std::sqrt(n2) > r.gaussian_t) ++r.gaussian_hits;
  }
  return r;
}

}  // namespace geoembed
