#include "geoembed/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <tuple>

#include <boost/math/special_functions/beta.hpp>

#include "geoembed/io.hpp"
#include "geoembed/verifier.hpp"

namespace geoembed {

namespace {

// Runs body(t) for t in [0, count) across workers; each trial owns its stream,
// so the result does not depend on the split.
template <class Body>
void parallel_trials(std::size_t count, Body&& body) {
  const auto workers = static_cast<std::size_t>(std::max(1, default_workers()));
  if (workers == 1 || count < 2 * workers) {
    for (std::size_t t = 0; t < count; ++t) body(t);
    return;
  }
  std::vector<std::jthread> pool;
  const std::size_t chunk = (count + workers - 1) / workers;
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = w * chunk, hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&body, lo, hi] {
      for (std::size_t t = lo; t < hi; ++t) body(t);
    });
  }
}

// Counts trials whose sum of k ball samples has X-norm <= threshold.
std::size_t count_short_sums(const NormedSpace& space, int k, double threshold, std::size_t trials,
                             std::uint64_t seed) {
  std::vector<char> hit(trials, 0);
  parallel_trials(trials, [&](std::size_t t) {
    Rng rng = make_stream(seed, t, 0, StreamTag::trial);
    VectorXd sum = VectorXd::Zero(space.dim());
    for (int i = 0; i < k; ++i) sum += space.sample(rng);
    hit[t] = space.norm(sum) <= threshold;
  });
  return static_cast<std::size_t>(std::count(hit.begin(), hit.end(), 1));
}

void fill_estimate(McEstimate& e, std::size_t hits, std::size_t trials) {
  e.trials = trials;
  e.hits = hits;
  e.estimate = static_cast<double>(hits) / static_cast<double>(trials);
  e.ci = clopper_pearson(hits, trials);
}

std::string fmt(const char* f, double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

}  // namespace

Interval clopper_pearson(std::size_t hits, std::size_t trials, double level) {
  if (trials == 0) throw std::invalid_argument("confidence interval needs trials >= 1");
  if (hits > trials) throw std::invalid_argument("hits exceed trials");
  if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("level must lie in (0, 1)");
  const double alpha = 1.0 - level;
  const double x = static_cast<double>(hits), n = static_cast<double>(trials);
  Interval ci;
  ci.lower = hits == 0 ? 0.0 : boost::math::ibeta_inv(x, n - x + 1.0, alpha / 2.0);
  ci.upper = hits == trials ? 1.0 : boost::math::ibeta_inv(x + 1.0, n - x, 1.0 - alpha / 2.0);
  return ci;
}

VolumeBoundReport check_volume_bound(double p, const std::vector<int>& m_list, double cap) {
  if (!(p >= 1.0)) throw std::invalid_argument("p must lie in [1, inf]");
  VolumeBoundReport rep;
  rep.p = p;
  rep.cap = cap;
  for (int m : m_list) {
    if (m < 1) throw std::invalid_argument("dimensions must be >= 1");
    VolumeRow row;
    row.m = m;
    const double scale = 1.0 / std::sqrt(lp_coordinate_variance(m, p));
    row.log_volume = lp_unit_ball_log_volume(m, p) + m * std::log(scale);
    row.constant = std::exp(row.log_volume / m);
    row.cross_check = std::numeric_limits<double>::quiet_NaN();
    if (p == 2.0) {
      // V_0 = 1, V_1 = 2, V_j = V_{j-2} * 2 pi / j.
      double log_v = (m % 2 == 0) ? 0.0 : std::log(2.0);
      for (int j = (m % 2 == 0) ? 2 : 3; j <= m; j += 2) log_v += std::log(2.0 * std::numbers::pi / j);
      row.cross_check = std::exp(log_v / m) * std::sqrt(m + 2.0);
    } else if (std::isinf(p)) {
      row.cross_check = 2.0 * std::sqrt(3.0);
    }
    rep.max_constant = std::max(rep.max_constant, row.constant);
    if (row.constant > cap) rep.bounded = false;
    rep.rows.push_back(row);
  }
  return rep;
}

double large_k_threshold(double c1, const ConstantsConfig& constants) {
  return std::pow(constants.cb_l_product, 4.0 / (1.0 - 2.0 * c1));
}

McEstimate mc_large_k_small_ball(const NormedSpace& space, int k, double c1, std::size_t trials,
                                 std::uint64_t seed, bool exploratory,
                                 const ConstantsConfig& constants) {
  constants.validate();
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (!(c1 > 0.0 && c1 < 0.5)) throw std::invalid_argument("c1 must lie in (0, 1/2)");
  McEstimate e;
  e.exploratory = exploratory;
  const double kd = k;
  if (kd < large_k_threshold(c1, constants)) {
    if (!exploratory) {
      throw std::invalid_argument("k=" + std::to_string(k) + " is below " +
                                  fmt("%.6g", large_k_threshold(c1, constants)) +
                                  "; pass exploratory to run anyway");
    }
    e.warnings.push_back("k below the range covered by the bound; exploratory run");
  }
  e.threshold = std::pow(kd, c1);
  e.bound = std::exp(-0.5 * (0.5 - c1) * space.dim() * std::log(kd));
  if (k == 1) {
    e.bound_applicable = false;
    e.conclusive = false;
    e.warnings.push_back("k=1: the event is ball membership, no bound applies");
  }
  fill_estimate(e, count_short_sums(space, k, e.threshold, trials, seed), trials);
  return e;
}

McEstimate mc_small_k_near_unit(const NormedSpace& space, int k, double kappa, std::size_t trials,
                                std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  if (k < 2) throw std::invalid_argument("k must be >= 2");
  if (!(kappa > 0.0 && kappa < 1.0)) throw std::invalid_argument("kappa must lie in (0, 1)");
  McEstimate e;
  const double m = space.dim();
  e.threshold = 1.0 + 1.0 / (2.0 * std::pow(m, 1.0 - kappa));
  e.bound = std::exp(-std::pow(m, kappa / 2.0));
  if (space.dim() < 16) {
    e.conclusive = false;
    e.warnings.push_back("dimension " + std::to_string(space.dim()) +
                         " is small; the bound only holds for large m, result not conclusive");
  }
  fill_estimate(e, count_short_sums(space, k, e.threshold, trials, seed), trials);
  return e;
}

CaseReport mc_case_bounds(const Tree& tree, const NormedSpace& space, const EmbeddingParams& params,
                          std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw std::invalid_argument("trials must be >= 1");
  const std::int64_t reach = params.max_local_distance();
  auto regime_of = [&](int k) {
    if (k == 1) return 1;
    if (k <= params.k0 && k <= reach) return 2;
    if (k <= reach) return 3;
    return 4;
  };
  CaseReport rep;
  rep.trials = trials;
  for (int r = 1; r <= 4; ++r) {
    CaseRow row;
    row.regime = r;
    row.empty = true;
    row.target = 1.0 / (static_cast<double>(tree.size()) * tree.size());
    rep.rows.push_back(row);
  }
  for (Vertex u = 0; u < tree.size(); ++u) {
    for (Vertex v = u + 1; v < tree.size(); ++v) {
      const int k = tree.dist(u, v);
      CaseRow& row = rep.rows[static_cast<std::size_t>(regime_of(k) - 1)];
      if (row.empty || k > row.k) {
        row.empty = false;
        row.pair = {u, v};
        row.k = k;
      }
    }
  }
  for (std::size_t t = 0; t < trials; ++t) {
    EmbeddingState st(tree, space, params, derive_seed(seed, t));
    if (!enumerate_l_violations(st).empty()) continue;
    ++rep.l_free;
    for (CaseRow& row : rep.rows) {
      if (row.empty) continue;
      ++row.conditioned;
      const double d = space.norm(st.pair_difference(row.pair.u, row.pair.v));
      if (row.regime == 1 ? d > 1.0 : d <= 1.0) ++row.failures;
    }
  }
  for (CaseRow& row : rep.rows) {
    if (row.conditioned == 0) continue;
    row.frequency = static_cast<double>(row.failures) / static_cast<double>(row.conditioned);
    row.ci = clopper_pearson(row.failures, row.conditioned);
  }
  return rep;
}

void SweepConfig::validate() const {
  if (norms.empty() || n_grid.empty() || delta_grid.empty()) {
    throw std::invalid_argument("sweep grids must be non-empty");
  }
  if (trials < 1) throw std::invalid_argument("sweep trials must be >= 1");
  if (mode == Mode::theory && (!m_grid.empty() || delta_scale)) {
    throw std::invalid_argument("theory mode takes no dimension grid or scale overrides");
  }
  for (const auto& norm : norms) {
    if (norm.find(',') != std::string::npos || norm.find('"') != std::string::npos) {
      throw std::invalid_argument("norm descriptors may not contain commas or quotes");
    }
  }
  for (auto n : n_grid) if (n < 8) throw std::invalid_argument("N must be >= 8");
  for (int d : delta_grid) if (d < 3) throw std::invalid_argument("delta must be >= 3");
  for (int m : m_grid) if (m < 1) throw std::invalid_argument("m must be >= 1");
  if (tree_kind != "heap" && tree_kind != "part-a" && tree_kind != "random") {
    throw std::invalid_argument("unknown sweep tree kind '" + tree_kind + "'");
  }
}

SweepConfig parse_sweep_config(const std::string& json_text) {
  const Json j = Json::parse(json_text);
  SweepConfig c;
  c.norms = j.at("norms").get<std::vector<std::string>>();
  c.n_grid = j.at("N").get<std::vector<std::int64_t>>();
  c.delta_grid = j.value("delta", std::vector<int>{3});
  c.m_grid = j.value("m", std::vector<int>{});
  c.mode = parse_mode(j.value("mode", std::string("practical")));
  c.trials = j.value("trials", std::size_t{10});
  c.master_seed = j.value("seed", std::uint64_t{0});
  c.output = j.value("out", std::string());
  c.tree_kind = j.value("tree", std::string("heap"));
  c.max_rounds = j.value("max_rounds", std::size_t{100000});
  if (j.contains("delta_scale")) c.delta_scale = j.at("delta_scale").get<double>();
  c.timing = j.value("timing", false);
  c.validate();
  return c;
}

std::string format_record(const TrialRecord& r) {
  std::string s = r.norm + "," + std::to_string(r.n) + "," + std::to_string(r.delta) + "," +
                  std::to_string(r.m) + "," + to_string(r.mode) + "," + std::to_string(r.seed) + "," +
                  (r.success ? "1" : "0") + "," + std::to_string(r.rounds) + "," +
                  fmt("%.3f", r.wallclock_ms) + ",";
  if (r.max_lip) s += fmt("%.12g", *r.max_lip);
  s += ",";
  if (r.min_holder) s += fmt("%.12g", *r.min_holder);
  return s;
}

TrialRecord parse_record(const std::string& line) {
  std::vector<std::string> f;
  std::string item;
  std::istringstream in(line);
  while (std::getline(in, item, ',')) f.push_back(item);
  if (!line.empty() && line.back() == ',') f.emplace_back();
  if (f.size() != 11) throw std::runtime_error("malformed sweep record: " + line);
  TrialRecord r;
  r.norm = f[0];
  r.n = std::stoll(f[1]);
  r.delta = std::stoi(f[2]);
  r.m = std::stoi(f[3]);
  r.mode = parse_mode(f[4]);
  r.seed = std::stoull(f[5]);
  r.success = f[6] == "1";
  r.rounds = std::stoull(f[7]);
  r.wallclock_ms = std::stod(f[8]);
  if (!f[9].empty()) r.max_lip = std::stod(f[9]);
  if (!f[10].empty()) r.min_holder = std::stod(f[10]);
  return r;
}

Tree sweep_tree(const SweepConfig& config, std::int64_t n, int delta) {
  if (n > std::numeric_limits<int>::max()) throw std::invalid_argument("N too large for a sweep");
  const int ni = static_cast<int>(n);
  if (config.tree_kind == "heap") return gen_heap_tree(delta - 1, ni);
  if (config.tree_kind == "part-a") return gen_part_a_tree(delta, ni).tree;
  Rng rng = make_stream(config.master_seed, static_cast<std::uint64_t>(n) * 1024u + static_cast<std::uint64_t>(delta),
                        0, StreamTag::tree);
  return gen_random_tree(ni, delta, rng);
}

SweepResult sweep(const SweepConfig& config) {
  config.validate();
  using Key = std::tuple<std::string, std::int64_t, int, int, std::uint64_t>;

  struct Cell {
    std::string norm;
    std::int64_t n;
    int delta;
    EmbeddingParams params;
  };
  std::vector<Cell> cells;
  for (const auto& norm : config.norms) {
    for (auto n : config.n_grid) {
      for (int delta : config.delta_grid) {
        ParamOverrides o;
        o.delta_scale = config.delta_scale;
        if (config.m_grid.empty()) {
          cells.push_back({norm, n, delta, derive_params(n, delta, config.mode, o)});
        } else {
          for (int m : config.m_grid) {
            o.m = m;
            cells.push_back({norm, n, delta, derive_params(n, delta, config.mode, o)});
          }
        }
      }
    }
  }

  std::map<Key, TrialRecord> done;
  if (!config.output.empty() && std::filesystem::exists(config.output)) {
    std::istringstream in(read_text(config.output));
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line == kSweepHeader) continue;
      TrialRecord r = parse_record(line);
      done[{r.norm, r.n, r.delta, r.m, r.seed}] = r;
    }
  }

  struct Job {
    std::size_t cell;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  std::vector<Key> order;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    for (std::size_t t = 0; t < config.trials; ++t) {
      const std::uint64_t seed = derive_seed(config.master_seed, t);
      const Key key{cells[c].norm, cells[c].n, cells[c].delta, cells[c].params.m, seed};
      order.push_back(key);
      if (!done.count(key)) jobs.push_back({c, seed});
    }
  }

  SweepResult result;
  result.reused = order.size() - jobs.size();

  // Shared read-only inputs, built once.
  std::map<std::pair<std::int64_t, int>, Tree> trees;
  std::map<std::pair<std::string, int>, NormedSpace> spaces;
  for (const Job& job : jobs) {
    const Cell& c = cells[job.cell];
    if (!trees.count({c.n, c.delta})) trees.emplace(std::pair{c.n, c.delta}, sweep_tree(config, c.n, c.delta));
    if (!spaces.count({c.norm, c.params.m})) {
      spaces.emplace(std::pair{c.norm, c.params.m}, parse_norm_descriptor(c.norm, c.params.m));
    }
  }

  std::ofstream append;
  if (!config.output.empty()) {
    const bool fresh = !std::filesystem::exists(config.output);
    append.open(config.output, std::ios::app);
    if (!append) throw std::runtime_error("cannot write " + config.output);
    if (fresh) append << kSweepHeader << '\n' << std::flush;
  }
  std::mutex writer;
  std::atomic<std::size_t> next{0};
  std::vector<TrialRecord> fresh(jobs.size());
  auto worker = [&] {
    for (std::size_t i = next++; i < jobs.size(); i = next++) {
      const Cell& c = cells[jobs[i].cell];
      const Tree& tree = trees.at({c.n, c.delta});
      const NormedSpace& space = spaces.at({c.norm, c.params.m});
      MtOptions opt;
      opt.max_rounds = config.max_rounds;
      const auto start = std::chrono::steady_clock::now();
      const MtResult run = moser_tardos_embed(tree, space, c.params, jobs[i].seed, opt);
      const auto stop = std::chrono::steady_clock::now();
      TrialRecord r;
      r.norm = c.norm;
      r.n = c.n;
      r.delta = c.delta;
      r.m = c.params.m;
      r.mode = c.params.mode;
      r.seed = jobs[i].seed;
      r.success = run.success;
      r.rounds = run.rounds;
      r.wallclock_ms = config.timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;
      if (run.success) {
        const auto prof = distortion_profile(run.state.zeta(), tree, space, c.params.k0);
        r.max_lip = prof.max_lipschitz;
        r.min_holder = prof.min_holder;
      }
      fresh[i] = r;
      if (append.is_open()) {
        std::lock_guard lock(writer);
        append << format_record(r) << '\n' << std::flush;
      }
    }
  };
  {
    const int workers = std::max(1, std::min<int>(default_workers(), static_cast<int>(jobs.size())));
    std::vector<std::jthread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  append.close();

  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const auto& r = fresh[i];
    done[{r.norm, r.n, r.delta, r.m, r.seed}] = r;
  }
  for (const Key& k : order) result.records.push_back(done.at(k));

  if (!config.output.empty()) {
    std::string text = std::string(kSweepHeader) + "\n";
    for (const auto& r : result.records) text += format_record(r) + "\n";
    write_text(config.output, text);
  }

  // Smallest m reaching 90% success per (norm, N, delta).
  std::map<std::tuple<std::string, std::int64_t, int>, std::map<int, std::pair<std::size_t, std::size_t>>> tally;
  for (const auto& r : result.records) {
    auto& t = tally[{r.norm, r.n, r.delta}][r.m];
    t.first += r.success;
    ++t.second;
  }
  for (const auto& norm : config.norms) {
    for (auto n : config.n_grid) {
      for (int delta : config.delta_grid) {
        SweepSummaryRow row{norm, n, delta, std::nullopt, std::log(double(n)) / std::log(std::log(double(n)))};
        for (const auto& [m, t] : tally[{norm, n, delta}]) {
          if (10 * t.first >= 9 * t.second) {
            row.threshold_m = m;
            break;
          }
        }
        result.summary.push_back(row);
      }
    }
  }
  return result;
}

}  // namespace geoembed
