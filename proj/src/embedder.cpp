#include "geoembed/embedder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "geoembed/errors.hpp"

namespace geoembed {

namespace {

// ceil() that ignores last-bit noise from pow(), e.g. pow(2, 8) = 256.00000000000003.
double ceil_clean(double x) { return std::ceil(x * (1.0 - 1e-12)); }

}  // namespace

std::string to_string(Mode mode) { return mode == Mode::theory ? "theory" : "practical"; }

Mode parse_mode(const std::string& text) {
  if (text == "theory") return Mode::theory;
  if (text == "practical") return Mode::practical;
  throw std::invalid_argument("mode must be 'theory' or 'practical', got '" + text + "'");
}

std::int64_t EmbeddingParams::max_local_distance() const {
  if (!(ell0 < 9.0e18)) return std::numeric_limits<std::int64_t>::max();
  return static_cast<std::int64_t>(std::floor(ell0));
}

EmbeddingParams derive_params_log(double log_n, int delta, Mode mode,
                                  const ParamOverrides& overrides,
                                  const ConstantsConfig& constants) {
  constants.validate();
  if (delta < 3) throw std::invalid_argument("delta must be >= 3");
  if (!(log_n > 1.0)) throw std::invalid_argument("N too small: log log N must be positive");
  const double loglog = std::log(log_n);
  if (!(loglog > 0.0)) throw std::invalid_argument("N too small: log log N must be positive");
  if (mode == Mode::theory && overrides.any()) {
    throw std::invalid_argument("theory mode takes no overrides");
  }

  EmbeddingParams p;
  p.log_n = log_n;
  p.delta = delta;
  p.mode = mode;
  p.constants = constants;
  p.alpha1 = kTheoryAlpha1;
  p.c1 = 0.25;
  p.kappa = constants.kappa;
  p.c2 = std::min(0.25, constants.kappa / 4.0);
  p.shrink = 1.0 - 1.0 / log_n;

  const double log_pow = std::pow(log_n, p.c2);
  p.delta_scale = overrides.delta_scale.value_or(mode == Mode::theory ? 1.0 : kPracticalDeltaScale);
  p.ell0_scale = overrides.ell0_scale.value_or(1.0);
  if (!(p.delta_scale > 0.0) || !(p.ell0_scale > 0.0)) {
    throw std::invalid_argument("delta_scale and ell0_scale must be positive");
  }
  p.delta_reg = p.delta_scale * std::exp(-(0.5 - p.c1 / 2.0) * log_pow);
  p.ell0 = p.ell0_scale * std::exp(log_pow);
  p.k1 = std::floor(log_n / std::log(static_cast<double>(delta - 1)));

  const double k0_theory =
      std::max({3.0, ceil_clean(std::pow(constants.cb_l_product, 4.0 / (1.0 - 2.0 * p.c1))),
                ceil_clean(std::pow(4.0, 1.0 / p.c1))});
  if (mode == Mode::theory) {
    p.dim_real = ceil_clean(p.alpha1 * log_n / loglog);
    p.k0 = static_cast<std::int64_t>(std::min(k0_theory, 9.0e18));
  } else {
    if (overrides.m && *overrides.m < 1) throw std::invalid_argument("dimension override must be >= 1");
    if (overrides.dim_coefficient && !(*overrides.dim_coefficient > 0.0)) {
      throw std::invalid_argument("dimension coefficient must be positive");
    }
    if (overrides.k0 && *overrides.k0 < 2) throw std::invalid_argument("k0 override must be >= 2");
    p.dim_real = overrides.m ? static_cast<double>(*overrides.m)
                             : ceil_clean(overrides.dim_coefficient.value_or(kPracticalDimCoefficient) *
                                          log_n / loglog);
    p.k0 = overrides.k0.value_or(kPracticalK0);
  }
  p.m = p.dim_real <= static_cast<double>(std::numeric_limits<int>::max())
            ? static_cast<int>(p.dim_real)
            : 0;
  return p;
}

EmbeddingParams derive_params(std::int64_t n, int delta, Mode mode,
                              const ParamOverrides& overrides, const ConstantsConfig& constants) {
  if (n < 8) throw std::invalid_argument("N must be at least 8");
  EmbeddingParams p =
      derive_params_log(std::log(static_cast<double>(n)), delta, mode, overrides, constants);
  p.n = n;
  return p;
}

EmbeddingState::EmbeddingState(const Tree& tree, const NormedSpace& space,
                               const EmbeddingParams& params, std::uint64_t seed)
    : tree_(&tree), space_(&space), params_(params), seed_(seed) {
  if (params.m != space.dim()) {
    throw DimensionError("parameter dimension " + std::to_string(params.m) +
                         " does not match the space dimension " + std::to_string(space.dim()));
  }
  const int m = space.dim();
  const int edges = tree.num_edges();
  y_.setZero(m, edges);
  g_.setZero(m, edges);
  big_g_.setZero(m, edges);
  ball_counter_.assign(edges, 0);
  gauss_counter_.assign(edges, 0);
  for (EdgeId e = 0; e < edges; ++e) {
    draw_ball(e);
    draw_gaussian(e);
  }
  recompute();
}

void EmbeddingState::draw_ball(EdgeId e) {
  Rng rng = make_stream(seed_, static_cast<std::uint64_t>(e), ball_counter_[e]++, StreamTag::ball);
  y_.col(e) = space_->sample(rng);
}

void EmbeddingState::draw_gaussian(EdgeId e) {
  Rng rng =
      make_stream(seed_, static_cast<std::uint64_t>(e), gauss_counter_[e]++, StreamTag::gaussian);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < g_.rows(); ++i) g_(i, e) = normal(rng);
  big_g_.col(e) = space_->john_basis() * g_.col(e);
}

void EmbeddingState::recompute() {
  const int m = space_->dim();
  const int n = tree_->size();
  ball_sums_.setZero(m, n);
  gauss_sums_.setZero(m, n);
  zeta_.setZero(m, n);
  refresh_subtree(tree_->root());
}

void EmbeddingState::refresh_subtree(Vertex top) {
  const auto& order = tree_->preorder();
  const double shrink = params_.shrink;
  const double reg = params_.delta_reg;
  for (int i = tree_->enter(top); i < tree_->leave(top); ++i) {
    const Vertex v = order[static_cast<std::size_t>(i)];
    const EdgeId e = tree_->parent_edge(v);
    if (e < 0) {
      ball_sums_.col(v).setZero();
      gauss_sums_.col(v).setZero();
    } else {
      const Vertex up = tree_->parent(v);
      ball_sums_.col(v) = ball_sums_.col(up) + y_.col(e);
      gauss_sums_.col(v) = gauss_sums_.col(up) + big_g_.col(e);
    }
    zeta_.col(v) = shrink * ball_sums_.col(v) + reg * gauss_sums_.col(v);
  }
}

void EmbeddingState::resample(std::span<const EdgeId> edges, Resample which) {
  std::vector<Vertex> tops;
  tops.reserve(edges.size());
  for (EdgeId e : edges) {
    if (e < 0 || e >= tree_->num_edges()) {
      throw std::out_of_range("unknown edge id " + std::to_string(e));
    }
  }
  for (EdgeId e : edges) {
    if (which != Resample::gaussian) draw_ball(e);
    if (which != Resample::ball) draw_gaussian(e);
    tops.push_back(tree_->lower_endpoint(e));
  }
  // Refresh each maximal affected subtree once, shallowest first.
  std::sort(tops.begin(), tops.end(),
            [this](Vertex a, Vertex b) { return tree_->enter(a) < tree_->enter(b); });
  int covered_until = -1;
  for (Vertex top : tops) {
    if (tree_->enter(top) < covered_until) continue;
    refresh_subtree(top);
    covered_until = tree_->leave(top);
  }
}

VectorXd EmbeddingState::pair_difference(Vertex u, Vertex v) const {
  if (u < 0 || v < 0 || u >= tree_->size() || v >= tree_->size()) {
    throw std::out_of_range("vertex id out of range");
  }
  if (u == v) throw std::invalid_argument("pair_difference needs two distinct vertices");
  return zeta_.col(u) - zeta_.col(v);
}

VectorXd EmbeddingState::path_difference(Vertex u, Vertex v) const {
  // Walking u -> v, an edge is traversed toward the root on u's side and away
  // from it on v's side; zeta(u) - zeta(v) collects the former with a plus sign.
  const Vertex a = tree_->lca(u, v);
  VectorXd ys = VectorXd::Zero(space_->dim());
  VectorXd gs = VectorXd::Zero(space_->dim());
  for (Vertex x = u; x != a; x = tree_->parent(x)) {
    ys += y_.col(tree_->parent_edge(x));
    gs += big_g_.col(tree_->parent_edge(x));
  }
  for (Vertex x = v; x != a; x = tree_->parent(x)) {
    ys -= y_.col(tree_->parent_edge(x));
    gs -= big_g_.col(tree_->parent_edge(x));
  }
  return params_.shrink * ys + params_.delta_reg * gs;
}

VectorXd EmbeddingState::ball_sum_difference(Vertex u, Vertex v) const {
  return ball_sums_.col(u) - ball_sums_.col(v);
}

double EmbeddingState::lipschitz_bound() const {
  double worst = 0.0;
  for (Eigen::Index e = 0; e < big_g_.cols(); ++e) {
    worst = std::max(worst, space_->norm(big_g_.col(e)));
  }
  return params_.shrink + params_.delta_reg * worst;
}

EmbeddingState embed(const Tree& tree, const NormedSpace& space, const EmbeddingParams& params,
                     std::uint64_t seed) {
  return EmbeddingState(tree, space, params, seed);
}

VectorXd pair_difference(const EmbeddingState& state, Vertex u, Vertex v) {
  return state.pair_difference(u, v);
}

void resample_edges(EmbeddingState& state, std::span<const EdgeId> edges, Resample which) {
  state.resample(edges, which);
}

}  // namespace geoembed
