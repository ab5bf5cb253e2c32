// Command-line front end: tree generation, embedding, verification, checks
// and parameter sweeps. Exit status is 0 only when every asserted check passes.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "geoembed/errors.hpp"
#include "geoembed/experiments.hpp"
#include "geoembed/io.hpp"
#include "geoembed/lll.hpp"
#include "geoembed/verifier.hpp"

using namespace geoembed;

namespace {

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text(path, text);
  }
}

std::string fmt17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

Json interval_json(const Interval& ci) { return Json{ci.lower, ci.upper}; }

Json estimate_json(const McEstimate& e) {
  Json j;
  j["trials"] = e.trials;
  j["hits"] = e.hits;
  j["estimate"] = e.estimate;
  j["ci95"] = interval_json(e.ci);
  j["threshold"] = e.threshold;
  j["bound"] = e.bound;
  j["bound_applicable"] = e.bound_applicable;
  j["exploratory"] = e.exploratory;
  j["conclusive"] = e.conclusive;
  j["consistent"] = e.consistent();
  j["warnings"] = e.warnings;
  return j;
}

Json lll_json(const LllReport& r) {
  Json j;
  j["holds"] = r.holds();
  j["vacuous"] = r.vacuous;
  j["max_k"] = r.max_k;
  j["sum_a"] = r.sum_a;
  j["cond_a"] = r.cond_a;
  j["log_product"] = r.log_product;
  j["cond_b"] = r.cond_b;
  j["cond_c"] = r.cond_c;
  j["failing_k"] = r.failing_k;
  return j;
}

struct ParamArgs {
  std::string mode = "practical";
  std::optional<int> dim;
  std::optional<double> delta_scale, ell0_scale, dim_coefficient;
  std::optional<std::int64_t> k0;
  double kappa = 0.25;
  double cbl = 2.0;

  void add(CLI::App* app) {
    app->add_option("--mode", mode, "theory | practical")->check(CLI::IsMember({"theory", "practical"}));
    app->add_option("--dim", dim, "dimension m (practical mode)");
    app->add_option("--delta-scale", delta_scale, "regularizer multiplier (practical mode)");
    app->add_option("--ell0-scale", ell0_scale, "local-range multiplier (practical mode)");
    app->add_option("--dim-coefficient", dim_coefficient, "m = ceil(c log N / log log N) (practical mode)");
    app->add_option("--k0", k0, "short-range cutoff (practical mode)");
    app->add_option("--kappa", kappa, "thin-shell exponent");
    app->add_option("--cbl", cbl, "volume-slicing constant product");
  }

  EmbeddingParams derive(std::int64_t n, int delta) const {
    ParamOverrides o;
    o.m = dim;
    o.delta_scale = delta_scale;
    o.ell0_scale = ell0_scale;
    o.dim_coefficient = dim_coefficient;
    o.k0 = k0;
    ConstantsConfig c;
    c.kappa = kappa;
    c.cb_l_product = cbl;
    return derive_params(n, delta, parse_mode(mode), o, c);
  }
};

int tree_delta(const Tree& tree) { return std::max(3, tree.max_degree()); }

int cmd_gen_tree(const std::string& kind, int delta, std::optional<int> n, std::optional<int> height,
                 std::uint64_t seed, const std::string& out) {
  auto need_n = [&] {
    if (!n) throw CLI::ValidationError("--n", "required for --kind " + kind);
    return *n;
  };
  Json j;
  if (kind == "complete") {
    if (!height) throw CLI::ValidationError("--height", "required for --kind complete");
    j = tree_to_json(gen_complete_tree(delta, *height));
  } else if (kind == "heap") {
    j = tree_to_json(gen_heap_tree(delta - 1, need_n()));
  } else if (kind == "part-a") {
    auto pa = gen_part_a_tree(delta, need_n());
    j = tree_to_json(pa.tree);
    j["h0"] = pa.h0;
  } else if (kind == "random") {
    Rng rng = make_stream(seed, 0, 0, StreamTag::tree);
    j = tree_to_json(gen_random_tree(need_n(), delta, rng));
  } else if (kind == "path") {
    j = tree_to_json(gen_path_tree(need_n()));
  } else {
    j = tree_to_json(gen_star_tree(need_n() - 1));
  }
  emit(j.dump() + "\n", out);
  return 0;
}

int cmd_embed(const std::string& tree_path, const std::string& norm, const ParamArgs& pa,
              std::uint64_t seed, const std::string& out, std::size_t max_rounds,
              const std::string& strategy, const std::string& report_path) {
  const Tree tree = read_tree(tree_path);
  const EmbeddingParams params = pa.derive(tree.size(), tree_delta(tree));
  if (params.m < 1) throw std::invalid_argument("derived dimension does not fit in memory");
  const NormedSpace space = parse_norm_descriptor(norm, params.m);

  MtOptions opt;
  opt.max_rounds = max_rounds;
  std::optional<EmbeddingState> plain;
  std::optional<MtResult> mt;
  ViolationReport report;
  std::size_t rounds = 0;
  if (strategy == "mt") {
    mt.emplace(moser_tardos_embed(tree, space, params, seed, opt));
    report = mt->report;
    rounds = mt->rounds;
  } else {
    plain.emplace(tree, space, params, seed);
    report = verify(*plain, opt.verify);
    report.l_violations = enumerate_l_violations(*plain);
  }
  const EmbeddingState& state = mt ? mt->state : *plain;
  const bool ok = report.embedding_ok();

  const std::vector<std::pair<std::string, std::string>> header{
      {"n", std::to_string(tree.size())}, {"m", std::to_string(params.m)}, {"norm", norm},
      {"seed", std::to_string(seed)},     {"mode", to_string(params.mode)}};
  std::string text = format_embedding(state.zeta(), header);
  std::ostringstream extra;
  extra << "# delta=" << params.delta << ", delta_reg=" << fmt17(params.delta_reg)
        << ", ell0=" << fmt17(params.ell0) << ", k0=" << params.k0 << ", shrink=" << fmt17(params.shrink)
        << ", strategy=" << strategy << ", rounds=" << rounds << ", verified=" << (ok ? 1 : 0) << "\n";
  text.insert(text.find('\n') + 1, extra.str());
  emit(text, out);

  if (!report_path.empty()) {
    Json j = report_to_json(report);
    j["params"] = params_to_json(params);
    j["strategy"] = strategy;
    j["rounds"] = rounds;
    if (mt) {
      j["l_rounds"] = mt->l_rounds;
      j["a_rounds"] = mt->a_rounds;
      Json hist = Json::array();
      for (const auto& s : mt->history) hist.push_back({s.round, s.l_violations, s.a_violations});
      j["history"] = std::move(hist);
    }
    if (ok) {
      const auto prof = distortion_profile(state.zeta(), tree, space, params.k0);
      j["max_lipschitz"] = round12(prof.max_lipschitz);
      if (prof.min_holder) j["min_holder"] = round12(*prof.min_holder);
    }
    emit(j.dump(2) + "\n", report_path);
  }
  std::cerr << (ok ? "embedding verified" : "embedding NOT verified") << " (m=" << params.m
            << ", rounds=" << rounds << ", violations=" << report.violation_count() << ")\n";
  return ok ? 0 : 1;
}

int cmd_verify(const std::string& tree_path, const std::string& emb_path, const std::string& norm,
               double margin, const std::string& mode, const std::string& report_path) {
  const Tree tree = read_tree(tree_path);
  const EmbeddingFile emb = read_embedding(emb_path);
  if (emb.points.cols() != tree.size()) {
    throw std::invalid_argument("embedding has " + std::to_string(emb.points.cols()) +
                                " vertices, tree has " + std::to_string(tree.size()));
  }
  const NormedSpace space = parse_norm_descriptor(norm, static_cast<int>(emb.points.rows()));
  VerifyOptions opt;
  opt.margin = margin;
  opt.mode = mode == "exact" ? VerifyMode::exact : VerifyMode::pruned;
  const ViolationReport report = verify(emb.points, tree, space, opt);
  const std::string text = report_to_json(report).dump(2) + "\n";
  if (report_path.empty()) std::cout << text; else write_text(report_path, text);
  std::cerr << (report.embedding_ok() ? "geometric embedding" : "not a geometric embedding") << ": "
            << report.edge_violations.size() << " edge and " << report.nonedge_violations.size()
            << " non-edge violations\n";
  return report.embedding_ok() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random geometric embeddings of bounded-degree trees into normed spaces"};
  app.require_subcommand(1);

  // gen-tree
  auto* gen = app.add_subcommand("gen-tree", "generate a tree as JSON");
  std::string kind = "complete", out;
  int delta = 3;
  std::optional<int> n_opt, height;
  std::uint64_t seed = 0;
  gen->add_option("--kind", kind)->check(CLI::IsMember({"complete", "part-a", "random", "path", "heap", "star"}));
  gen->add_option("--delta", delta, "maximum degree")->check(CLI::Range(2, 1 << 20));
  gen->add_option("--n", n_opt, "vertex count");
  gen->add_option("--height", height, "height (complete trees)");
  gen->add_option("--seed", seed);
  gen->add_option("--out", out, "output file (default stdout)");

  // embed
  auto* emb = app.add_subcommand("embed", "embed a tree and write the vertex map as CSV");
  std::string tree_path, norm = "lp:2", strategy = "mt", report_path;
  std::size_t max_rounds = 100000;
  ParamArgs params;
  emb->add_option("--tree", tree_path)->required();
  emb->add_option("--norm", norm, "lp:<p> | lp:inf | polytope:<csv> | ellipsoid:<csv>");
  params.add(emb);
  emb->add_option("--seed", seed);
  emb->add_option("--out", out, "output CSV (default stdout)");
  emb->add_option("--max-rounds", max_rounds);
  emb->add_option("--strategy", strategy)->check(CLI::IsMember({"mt", "plain"}));
  emb->add_option("--report", report_path, "JSON run report");

  // verify
  auto* ver = app.add_subcommand("verify", "check a vertex map against the embedding condition");
  std::string emb_path, verify_mode = "pruned";
  double margin = 0.0;
  ver->add_option("--tree", tree_path)->required();
  ver->add_option("--embedding", emb_path)->required();
  ver->add_option("--norm", norm);
  ver->add_option("--margin", margin)->check(CLI::NonNegativeNumber);
  ver->add_option("--verify-mode", verify_mode)->check(CLI::IsMember({"exact", "pruned"}));
  ver->add_option("--report", report_path, "JSON report (default stdout)");

  // check
  auto* chk = app.add_subcommand("check", "structural checks and Monte Carlo validators");
  std::string what, lemma;
  std::optional<std::int64_t> big_n;
  std::optional<double> ell0;
  std::vector<double> p_list{1.0, 2.0, std::numeric_limits<double>::infinity()};
  std::vector<int> m_list{1, 2, 4, 8, 16, 32, 64};
  int k = 2;
  double c1 = 0.25;
  std::size_t trials = 100000;
  bool exploratory = false, find_n0 = false;
  chk->add_option("--what", what)->check(CLI::IsMember({"claim42", "lll-condition", "thinshell", "packing"}));
  chk->add_option("--lemma", lemma)->check(CLI::IsMember({"3.1", "3.2", "3.3", "cases"}));
  chk->add_option("--tree", tree_path);
  chk->add_option("--delta", delta);
  chk->add_option("--N", big_n, "vertex count for the parameter schedule");
  chk->add_option("--ell0", ell0, "local range for claim42 (default: all distances)");
  chk->add_option("--norm", norm);
  params.add(chk);
  chk->add_option("--p", p_list, "exponents for the volume check");
  chk->add_option("--m", m_list, "dimensions for the volume check");
  chk->add_option("--k", k, "number of summed ball vectors");
  chk->add_option("--c1", c1);
  chk->add_option("--trials", trials);
  chk->add_option("--seed", seed);
  chk->add_flag("--exploratory", exploratory, "allow k below the bound's range");
  chk->add_flag("--estimate-n0", find_n0, "search the smallest N satisfying the conditions");
  chk->add_option("--out", out, "JSON output (default stdout)");

  // sweep
  auto* swp = app.add_subcommand("sweep", "run a parameter grid and write trial records as CSV");
  std::string config_path;
  swp->add_option("--config", config_path)->required();
  swp->add_option("--out", out, "CSV output (overrides the config)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) return cmd_gen_tree(kind, delta, n_opt, height, seed, out);
    if (emb->parsed()) return cmd_embed(tree_path, norm, params, seed, out, max_rounds, strategy, report_path);
    if (ver->parsed()) return cmd_verify(tree_path, emb_path, norm, margin, verify_mode, report_path);

    if (swp->parsed()) {
      SweepConfig config = parse_sweep_config(read_text(config_path));
      if (!out.empty()) config.output = out;
      const SweepResult res = sweep(config);
      if (config.output.empty()) {
        std::cout << kSweepHeader << '\n';
        for (const auto& r : res.records) std::cout << format_record(r) << '\n';
      }
      Json summary = Json::array();
      for (const auto& row : res.summary) {
        summary.push_back({{"norm", row.norm}, {"N", row.n}, {"delta", row.delta},
                           {"threshold_m", row.threshold_m ? Json(*row.threshold_m) : Json(nullptr)},
                           {"log_n_over_loglog_n", row.reference}});
      }
      std::cerr << Json{{"records", res.records.size()}, {"reused", res.reused}, {"summary", summary}}.dump(2) << '\n';
      return 0;
    }

    // check
    if (what.empty() == lemma.empty()) throw CLI::ValidationError("check", "give exactly one of --what / --lemma");
    Json j;
    bool pass = true;
    if (what == "claim42") {
      if (tree_path.empty()) throw CLI::ValidationError("--tree", "required");
      const Tree tree = read_tree(tree_path);
      const int d = chk->count("--delta") ? delta : tree_delta(tree);
      double range = ell0 ? *ell0 : static_cast<double>(tree.size() - 1);
      if (!ell0 && big_n) range = params.derive(*big_n, d).ell0;
      const auto rep = check_claim42(tree, range, d);
      j = {{"check", "claim42"}, {"holds", rep.holds}, {"delta", d}, {"max_distance", rep.max_distance},
           {"pairs_checked", rep.pairs_checked}, {"worst_ratio", rep.worst_ratio},
           {"violations", rep.violations.size()}};
      pass = rep.holds;
    } else if (what == "lll-condition") {
      if (find_n0) {
        ConstantsConfig c;
        c.kappa = params.kappa;
        c.cb_l_product = params.cbl;
        const auto est = estimate_n0(delta, c);
        j = {{"check", "lll-condition"}, {"found", est.found}, {"delta", delta}};
        if (est.found) {
          j["log_n"] = est.log_n;
          j["log10_n"] = est.log10_n;
          j["params"] = params_to_json(est.params);
          j["report"] = lll_json(est.report);
        }
        pass = est.found;
      } else {
        std::optional<Tree> tree;
        if (!tree_path.empty()) tree.emplace(read_tree(tree_path));
        if (!big_n && !tree) throw CLI::ValidationError("--N", "give --N or --tree");
        const std::int64_t n = big_n ? *big_n : tree->size();
        const int d = chk->count("--delta") || !tree ? delta : tree_delta(*tree);
        ParamArgs pa = params;
        if (!chk->count("--mode")) pa.mode = "theory";
        const auto p = pa.derive(n, d);
        const auto rep = tree ? check_lll_condition(*tree, p, analytic_prob_bounds(p))
                              : check_lll_condition(p, analytic_prob_bounds(p));
        j = {{"check", "lll-condition"}, {"params", params_to_json(p)}, {"report", lll_json(rep)}};
        pass = rep.holds();
      }
    } else if (what == "thinshell") {
      const int m = params.dim.value_or(256);
      const NormedSpace space = parse_norm_descriptor(norm, m);
      ConstantsConfig c;
      c.kappa = params.kappa;
      Rng rng = make_stream(seed, 0, 0, StreamTag::trial);
      const auto r = thinshell_diagnostic(space, std::max<std::size_t>(trials, 1000), c, rng);
      j = {{"check", "thinshell"}, {"m", r.m}, {"band", r.band}, {"exceed_fraction", r.exceed_fraction},
           {"small_m", r.small_m}, {"histogram", r.histogram}, {"hist_max", r.hist_max},
           {"gaussian_t", r.gaussian_t}, {"gaussian_hits", r.gaussian_hits},
           {"gaussian_trials", r.gaussian_trials}, {"gaussian_bound", r.gaussian_bound}};
    } else if (what == "packing") {
      if (!big_n || !params.dim) throw CLI::ValidationError("packing", "needs --N and --dim");
      std::optional<NormedSpace> space;
      if (chk->count("--norm")) space.emplace(parse_norm_descriptor(norm, *params.dim));
      const auto c = packing_certificate(delta, *big_n, *params.dim, space ? &*space : nullptr);
      j = {{"check", "packing"}, {"n", c.n}, {"delta", c.delta}, {"claimed_m", c.claimed_m},
           {"lower_bound", c.lower_bound}, {"below_bound", c.below_bound}, {"h0", c.h0},
           {"independent_set", c.independent_set}, {"verdict", c.verdict}, {"instance", c.instance}};
      if (c.has_volume) {
        j["log_packed_volume"] = c.log_packed_volume;
        j["log_container_volume"] = c.log_container_volume;
        j["volume_inequality_holds"] = c.volume_inequality_holds;
      }
    } else if (lemma == "3.1") {
      Json rows = Json::array();
      for (double p : p_list) {
        const auto r = check_volume_bound(p, m_list);
        Json per = Json::array();
        for (const auto& row : r.rows) {
          per.push_back({{"m", row.m}, {"log_volume", row.log_volume}, {"constant", row.constant},
                         {"cross_check", std::isnan(row.cross_check) ? Json(nullptr) : Json(row.cross_check)}});
        }
        rows.push_back({{"p", std::isinf(p) ? Json("inf") : Json(p)}, {"max_constant", r.max_constant},
                        {"bounded", r.bounded}, {"rows", per}});
        pass = pass && r.bounded;
      }
      j = {{"check", "lemma 3.1"}, {"cap", 6.0}, {"results", rows}};
    } else if (lemma == "3.2" || lemma == "3.3") {
      const NormedSpace space = parse_norm_descriptor(norm, params.dim.value_or(lemma == "3.2" ? 16 : 64));
      ConstantsConfig cc;
      cc.cb_l_product = params.cbl;
      const McEstimate e = lemma == "3.2"
                               ? mc_large_k_small_ball(space, k, c1, trials, seed, exploratory, cc)
                               : mc_small_k_near_unit(space, k, params.kappa, trials, seed);
      j = estimate_json(e);
      j["check"] = "lemma " + lemma;
      j["m"] = space.dim();
      j["k"] = k;
      for (const auto& w : e.warnings) std::cerr << "warning: " << w << '\n';
      pass = !e.conclusive || e.exploratory || e.consistent();
    } else {  // cases
      if (tree_path.empty()) throw CLI::ValidationError("--tree", "required");
      const Tree tree = read_tree(tree_path);
      const auto p = params.derive(tree.size(), tree_delta(tree));
      const NormedSpace space = parse_norm_descriptor(norm, p.m);
      const auto rep = mc_case_bounds(tree, space, p, trials, seed);
      Json rows = Json::array();
      for (const auto& r : rep.rows) {
        Json row{{"case", r.regime}, {"empty", r.empty}};
        if (!r.empty) {
          row["pair"] = {r.pair.u, r.pair.v};
          row["k"] = r.k;
          row["conditioned"] = r.conditioned;
          row["failures"] = r.failures;
          row["frequency"] = r.frequency;
          row["ci95"] = interval_json(r.ci);
          row["target"] = r.target;
        }
        rows.push_back(row);
      }
      j = {{"check", "cases"}, {"trials", rep.trials}, {"l_free", rep.l_free}, {"params", params_to_json(p)},
           {"rows", rows}};
    }
    j["pass"] = pass;
    emit(j.dump(2) + "\n", out);
    return pass ? 0 : 1;
  } catch (const CLI::Error& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
