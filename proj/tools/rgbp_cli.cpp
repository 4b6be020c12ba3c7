// Command-line driver: model generation, GBP runs, region pursuit, the
// loop-correlation experiment, region-graph transforms and validity checks.
// Exit codes: 0 success, 1 usage, 2 validation failure, 3 infeasible oracle.

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "rgbp/csv.hpp"
#include "rgbp/experiments.hpp"
#include "rgbp/pursuit.hpp"
#include "rgbp/uai.hpp"

using namespace rgbp;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;

struct GbpFlags {
  double damping = 0.5;
  double tolerance = 1e-9;
  int max_iters = 2000;
  std::string schedule = "topdown";
  bool random_init = false;

  GBPOptions options(std::uint64_t seed) const {
    GBPOptions o;
    o.damping = damping;
    o.tolerance = tolerance;
    o.max_iters = max_iters;
    o.schedule = schedule == "random" ? Schedule::random_permutation
                                      : Schedule::topdown_roundrobin;
    o.random_init = random_init;
    o.seed = seed;
    return o;
  }
};

void add_gbp_flags(CLI::App* cmd, GbpFlags& flags) {
  cmd->add_option("--damping", flags.damping, "log-domain damping in [0,1)");
  cmd->add_option("--tolerance", flags.tolerance, "log-message residual tolerance");
  cmd->add_option("--max-iters", flags.max_iters, "sweep budget");
  cmd->add_option("--schedule", flags.schedule, "topdown|random")
      ->check(CLI::IsMember({"topdown", "random"}));
  cmd->add_flag("--random-init", flags.random_init, "seeded random message init");
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);  // CSV line endings stay CRLF
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return os;
}

Region region_from_json(const json& j) {
  Region r;
  if (j.contains("vars")) r.vars = j.at("vars").get<std::vector<int>>();
  if (j.contains("factors")) r.factors = j.at("factors").get<std::vector<int>>();
  std::sort(r.vars.begin(), r.vars.end());
  std::sort(r.factors.begin(), r.factors.end());
  return r;
}

RegionGraph apply_transform_op(const RegionGraph& rg, const FactorGraph& fg, const json& op) {
  const std::string kind = op.at("op").get<std::string>();
  if (kind == "link_birth")
    return link_birth(rg, op.at("ancestor").get<int>(), op.at("descendant").get<int>());
  if (kind == "death") return death(rg, op.at("region").get<int>());
  if (kind == "merge") return merge(rg, op.at("r1").get<int>(), op.at("r2").get<int>());
  if (kind == "split") {
    SplitSpec spec;
    spec.target = op.at("target").get<int>();
    spec.alpha1 = region_from_json(op.at("alpha1"));
    spec.alpha2 = region_from_json(op.at("alpha2"));
    spec.beta = op.contains("beta") ? region_from_json(op.at("beta")) : Region{};
    return split(rg, fg, spec);
  }
  if (kind == "add_outer") return add_outer_region(rg, fg, region_from_json(op.at("region")));
  throw std::runtime_error("unknown transform op: " + kind);
}

int cmd_generate(const std::string& family, int n, int m, double w_max, double a_max,
                 double w_std, double msg_std, bool cluster_boost, std::uint64_t seed,
                 const std::string& out) {
  FactorGraph fg;
  json meta;
  meta["family"] = family;
  meta["seed"] = seed;
  meta["generator"] = "rgbp-0.1.0";
  meta["prng"] = "splitmix64";
  if (family == "grid") {
    fg = gen_grid(n, m, w_max, a_max, seed, cluster_boost);
    meta["n"] = n;
    meta["m"] = m;
    meta["w_max"] = w_max;
    meta["a_max"] = a_max;
    meta["cluster_boost"] = cluster_boost;
    meta["weight_scheme"] =
        "uniform [0,max] per node/edge; cluster_boost doubles weights inside a "
        "random node subset (one reading of mixed-strength clusters)";
  } else if (family == "fc") {
    fg = gen_fully_connected(n, w_max, a_max, seed, cluster_boost);
    meta["n"] = n;
    meta["w_max"] = w_max;
    meta["a_max"] = a_max;
    meta["cluster_boost"] = cluster_boost;
    meta["weight_scheme"] =
        "uniform [0,max] per node/edge; cluster_boost doubles weights inside a "
        "random node subset (one reading of mixed-strength clusters)";
  } else if (family == "loop") {
    fg = gen_loop(n, w_std, msg_std, seed);
    meta["n"] = n;
    meta["w_std"] = w_std;
    meta["msg_std"] = msg_std;
    meta["weight_scheme"] = "log-domain gaussian, zero mean";
  } else {
    fg = gen_tree(n, w_max, a_max, seed);
    meta["n"] = n;
    meta["w_max"] = w_max;
    meta["a_max"] = a_max;
  }
  write_uai_file(fg, out);
  std::ofstream ms(out + ".meta.json");
  ms << meta.dump(2) << "\n";
  std::cout << "wrote " << out << " (" << fg.num_vars() << " variables, "
            << fg.num_factors() << " factors)\n";
  return kExitOk;
}

int cmd_run_gbp(const std::string& model_path, const std::string& rg_path,
                const GbpFlags& flags, std::uint64_t seed,
                const std::filesystem::path& out_dir) {
  auto fg = read_uai_file(model_path);
  RegionGraph rg;
  if (rg_path.empty()) {
    rg = bethe_region_graph(fg);
  } else {
    std::ifstream is(rg_path);
    if (!is) throw std::runtime_error("cannot open " + rg_path);
    rg = read_region_graph(is);
    auto rep = check_validity(rg, fg);
    if (!rep.ok()) {
      std::cerr << "region graph is invalid for this model:\n";
      for (const auto& v : rep.violations) std::cerr << "  " << v << "\n";
      return kExitValidation;
    }
  }
  auto [state, beliefs] = run_gbp(rg, fg, flags.options(seed));

  std::filesystem::create_directories(out_dir);
  {
    auto os = open_out(out_dir / "beliefs.csv");
    os << csv_row({"variable", "state", "belief"});
    auto marg = node_marginals(rg, fg, beliefs);
    for (std::size_t i = 0; i < marg.size(); ++i)
      for (std::size_t s = 0; s < marg[i].size(); ++s)
        os << csv_row({std::to_string(i), std::to_string(s), csv_num(marg[i][s])});
  }
  {
    auto os = open_out(out_dir / "diagnostics.csv");
    os << csv_row({"row", "iteration", "max_residual", "clamp_events", "free_energy",
                   "converged", "zero_counting_regions"});
    for (std::size_t i = 0; i < state.residual_curve.size(); ++i)
      os << csv_row({"sweep", std::to_string(i + 1), csv_num(state.residual_curve[i]),
                     "", "", "", ""});
    os << csv_row({"summary", std::to_string(state.iterations),
                   csv_num(state.max_residual), std::to_string(state.clamp_events),
                   csv_num(rg_free_energy(rg, fg, beliefs)), state.converged ? "1" : "0",
                   state.has_zero_counting_regions ? "1" : "0"});
  }
  std::cout << (state.converged ? "converged" : "did not converge") << " after "
            << state.iterations << " sweeps\n";
  return kExitOk;
}

int cmd_pursue(const std::string& model_path, std::vector<std::string> strategy_names,
               PursuitConfig cfg, int rand_draws, bool no_l1,
               const std::filesystem::path& out_dir) {
  auto fg = read_uai_file(model_path);
  std::vector<Strategy> strategies;
  for (auto& s : strategy_names) strategies.push_back(strategy_from_name(s));
  if (strategies.empty()) {
    std::cerr << "at least one strategy is required\n";
    return kExitUsage;
  }

  bool needs_oracle =
      !no_l1 || std::count(strategies.begin(), strategies.end(), Strategy::OPT) > 0;
  std::optional<ExactResult> oracle;
  if (needs_oracle) {
    if (min_fill_width(fg) > 22) {
      std::cerr << "oracle infeasible: induced width exceeds 22; rerun with --no-l1 "
                   "and without OPT\n";
      return kExitInfeasible;
    }
    oracle = exact_variable_elimination(fg);
  }

  std::filesystem::create_directories(out_dir);
  for (Strategy s : strategies) {
    cfg.strategy = s;
    std::string name = strategy_name(s);
    std::replace(name.begin(), name.end(), '+', 'p');
    std::replace(name.begin(), name.end(), '-', 'm');
    auto path = out_dir / ("trace_" + name + ".csv");
    auto os = open_out(path);
    if (s == Strategy::RAND) {
      auto draws = rand_pursuit_draws(fg, cfg, rand_draws, oracle ? &*oracle : nullptr);
      write_averaged_trace_csv(draws, s, os);
    } else {
      auto trace = region_pursuit(fg, cfg, oracle ? &*oracle : nullptr);
      write_trace_csv(trace, s, os);
    }
    std::cout << "wrote " << path.string() << "\n";
  }
  return kExitOk;
}

int cmd_loop_correlation(int n, int trials, double w_lo, double w_hi, double m_lo,
                         double m_hi, std::uint64_t seed, const std::string& out) {
  auto res = loop_correlation(n, w_lo, w_hi, m_lo, m_hi, trials, seed);
  auto os = open_out(out);
  write_loop_correlation_csv(res, os);
  std::cout << "pearson(|f err|, l1) = " << res.pearson_f_l1
            << ", pearson(|entropy err|, l1) = " << res.pearson_entropy_l1 << "\n";
  return kExitOk;
}

int cmd_transform(const std::string& model_path, const std::string& rg_path,
                  const std::string& spec_path, const std::string& out) {
  auto fg = read_uai_file(model_path);
  std::ifstream rs(rg_path);
  if (!rs) throw std::runtime_error("cannot open " + rg_path);
  auto rg = read_region_graph(rs);
  std::ifstream ss(spec_path);
  if (!ss) throw std::runtime_error("cannot open " + spec_path);
  json spec = json::parse(ss);
  if (!spec.is_array()) spec = json::array({spec});
  for (const auto& op : spec) rg = apply_transform_op(rg, fg, op);
  auto rep = check_validity(rg, fg);
  if (!rep.ok()) {
    std::cerr << "transformed region graph is invalid:\n";
    for (const auto& v : rep.violations) std::cerr << "  " << v << "\n";
    return kExitValidation;
  }
  auto os = open_out(out);
  write_region_graph(rg, os);
  std::cout << "wrote " << out << "\n";
  return kExitOk;
}

int cmd_check(const std::string& model_path, const std::string& rg_path) {
  auto fg = read_uai_file(model_path);
  RegionGraph rg;
  if (rg_path.empty()) {
    rg = bethe_region_graph(fg);
  } else {
    std::ifstream is(rg_path);
    if (!is) throw std::runtime_error("cannot open " + rg_path);
    rg = read_region_graph(is);
  }
  auto rep = check_validity(rg, fg);
  std::cout << "C1 (connectivity): " << (rep.c1_ok ? "ok" : "violated") << "\n";
  std::cout << "C2 (counting sums): " << (rep.c2_ok ? "ok" : "violated") << "\n";
  for (const auto& v : rep.violations) std::cout << "  " << v << "\n";
  auto ext = is_extendable(rg, fg);
  if (ext.extendable) {
    std::cout << "extendable: yes\n";
  } else {
    std::cout << "extendable: no (";
    if (ext.witness_var >= 0) std::cout << "variable " << ext.witness_var;
    else std::cout << "factor " << ext.witness_factor;
    std::cout << " has more than one leaf)\n";
  }
  return rep.ok() ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"region-graph belief propagation and region pursuit"};
  app.require_subcommand(1);
  app.fallthrough();  // --seed / --out-dir may follow the subcommand
  std::uint64_t seed = 1;
  std::string out_dir = ".";
  app.add_option("--seed", seed, "global random seed")->capture_default_str();
  app.add_option("--out-dir", out_dir, "output directory")->capture_default_str();

  auto* gen = app.add_subcommand("generate", "write a model in UAI format");
  std::string family, gen_out = "model.uai";
  int n = 4, m = 4;
  double w_max = 1.0, a_max = 0.5, w_std = 1.0, msg_std = 1.0;
  bool cluster_boost = false;
  gen->add_option("--family", family, "grid|fc|loop|tree")->required()
      ->check(CLI::IsMember({"grid", "fc", "loop", "tree"}));
  gen->add_option("--n", n, "rows / node count");
  gen->add_option("--m", m, "grid columns");
  gen->add_option("--w-max", w_max, "edge weight bound (grid/fc/tree)");
  gen->add_option("--a-max", a_max, "node weight bound (grid/fc/tree)");
  gen->add_option("--w-std", w_std, "edge log-weight std (loop)");
  gen->add_option("--msg-std", msg_std, "node log-weight std (loop)");
  gen->add_flag("--cluster-boost", cluster_boost, "double weights inside a random node subset");
  gen->add_option("--out", gen_out, "output path")->capture_default_str();

  auto* rgbp_cmd = app.add_subcommand("run-gbp", "run GBP and write beliefs + diagnostics");
  std::string model_path, rg_path;
  GbpFlags gbp_flags;
  rgbp_cmd->add_option("--model", model_path, "UAI model file")->required();
  rgbp_cmd->add_option("--rg", rg_path, "region graph file (default: Bethe)");
  add_gbp_flags(rgbp_cmd, gbp_flags);

  auto* pursue = app.add_subcommand("pursue", "run region pursuit, one trace CSV per strategy");
  std::string pursue_model;
  std::vector<std::string> strategies = {"RP"};
  PursuitConfig pursuit_cfg;
  int rand_draws = 10;
  bool no_l1 = false;
  GbpFlags pursue_gbp;
  pursue->add_option("--model", pursue_model, "UAI model file")->required();
  pursue->add_option("--strategies", strategies, "subset of OPT,RP,RP+,RP-,RAND")
      ->delimiter(',');
  pursue->add_option("--K", pursuit_cfg.K, "regions to add in total");
  pursue->add_option("--k", pursuit_cfg.k, "regions per iteration");
  pursue->add_option("--W", pursuit_cfg.W, "maximal region-width");
  pursue->add_option("--max-loop-len", pursuit_cfg.max_loop_len, "chordless cycle cap");
  pursue->add_option("--rand-draws", rand_draws, "draws averaged for RAND");
  pursue->add_flag("--no-l1", no_l1, "skip the exact oracle and L1 column");
  add_gbp_flags(pursue, pursue_gbp);

  auto* loopc = app.add_subcommand("loop-correlation",
                                   "free energy / entropy / marginal errors on single loops");
  int loop_n = 5, trials = 100;
  double w_lo = 0.0, w_hi = 5.0, m_lo = 1.0, m_hi = 1.0;
  std::string loop_out = "loop_correlation.csv";
  loopc->add_option("--n", loop_n, "loop length");
  loopc->add_option("--trials", trials, "trial count");
  loopc->add_option("--w-std-min", w_lo, "edge log-weight std, sweep start");
  loopc->add_option("--w-std-max", w_hi, "edge log-weight std, sweep end");
  loopc->add_option("--msg-std-min", m_lo, "node log-weight std, sweep start");
  loopc->add_option("--msg-std-max", m_hi, "node log-weight std, sweep end");
  loopc->add_option("--out", loop_out, "output CSV")->capture_default_str();

  auto* trans = app.add_subcommand("transform", "apply split/merge/death/link-birth ops");
  std::string t_model, t_rg, t_spec, t_out = "transformed.rg";
  trans->add_option("--model", t_model, "UAI model file")->required();
  trans->add_option("--rg", t_rg, "region graph file")->required();
  trans->add_option("--spec", t_spec, "JSON op or op list")->required();
  trans->add_option("--out", t_out, "output region graph")->capture_default_str();

  auto* check = app.add_subcommand("check", "validity and extendability report");
  std::string c_model, c_rg;
  check->add_option("--model", c_model, "UAI model file")->required();
  check->add_option("--rg", c_rg, "region graph file (default: Bethe)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;  // help/version exit cleanly
  }

  try {
    if (gen->parsed())
      return cmd_generate(family, n, m, w_max, a_max, w_std, msg_std, cluster_boost,
                          seed, gen_out);
    if (rgbp_cmd->parsed()) return cmd_run_gbp(model_path, rg_path, gbp_flags, seed, out_dir);
    if (pursue->parsed()) {
      pursuit_cfg.gbp = pursue_gbp.options(seed);
      pursuit_cfg.seed = seed;
      return cmd_pursue(pursue_model, strategies, pursuit_cfg, rand_draws, no_l1, out_dir);
    }
    if (loopc->parsed())
      return cmd_loop_correlation(loop_n, trials, w_lo, w_hi, m_lo, m_hi, seed, loop_out);
    if (trans->parsed()) return cmd_transform(t_model, t_rg, t_spec, t_out);
    if (check->parsed()) return cmd_check(c_model, c_rg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
