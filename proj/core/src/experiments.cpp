#include "rgbp/experiments.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "rgbp/csv.hpp"

namespace rgbp {

double pearson(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size()) throw std::invalid_argument("pearson: size mismatch");
  const std::size_t n = xs.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / std::sqrt(sxx * syy);
}

LoopCorrelationResult loop_correlation(int n, double w_std_lo, double w_std_hi,
                                       double msg_std_lo, double msg_std_hi,
                                       int trials, std::uint64_t seed,
                                       const GBPOptions& opts) {
  if (trials < 1) throw std::invalid_argument("trials must be positive");
  LoopCorrelationResult res;
  for (int t = 0; t < trials; ++t) {
    double frac = trials == 1 ? 0.0 : static_cast<double>(t) / static_cast<double>(trials - 1);
    LoopTrialRow row;
    row.trial = t;
    row.w_std = w_std_lo + (w_std_hi - w_std_lo) * frac;
    row.msg_std = msg_std_lo + (msg_std_hi - msg_std_lo) * frac;

    FactorGraph fg = gen_loop(n, row.w_std, row.msg_std, seed + static_cast<std::uint64_t>(t));
    ExactResult exact = exact_brute_force(fg);
    row.log_z = exact.log_partition;
    row.exact_entropy = exact_entropy(fg);

    RegionGraph rg = bethe_region_graph(fg);
    auto [state, beliefs] = run_gbp(rg, fg, opts);
    row.converged = state.converged;
    row.bethe_f = rg_free_energy(rg, fg, beliefs);
    row.f_abs_err = std::abs(row.bethe_f - (-exact.log_partition));
    double h = 0.0;
    for (int id : rg.ids())
      h += static_cast<double>(rg.counting(id)) * entropy(beliefs.beliefs.at(id));
    row.bethe_entropy = h;
    row.entropy_abs_err = std::abs(row.bethe_entropy - row.exact_entropy);
    row.l1_error = avg_l1_error(node_marginals(rg, fg, beliefs), exact);
    res.rows.push_back(row);
  }
  std::vector<double> f_err, h_err, l1;
  for (const auto& r : res.rows) {
    f_err.push_back(r.f_abs_err);
    h_err.push_back(r.entropy_abs_err);
    l1.push_back(r.l1_error);
  }
  res.pearson_f_l1 = pearson(f_err, l1);
  res.pearson_entropy_l1 = pearson(h_err, l1);
  return res;
}

void write_loop_correlation_csv(const LoopCorrelationResult& res, std::ostream& os) {
  os << csv_row({"row", "trial", "w_std", "msg_std", "log_z", "bethe_f", "f_abs_err",
                 "exact_entropy", "bethe_entropy", "entropy_abs_err", "l1_error",
                 "converged", "pearson_f_l1", "pearson_entropy_l1"});
  for (const auto& r : res.rows)
    os << csv_row({"trial", std::to_string(r.trial), csv_num(r.w_std), csv_num(r.msg_std),
                   csv_num(r.log_z), csv_num(r.bethe_f), csv_num(r.f_abs_err),
                   csv_num(r.exact_entropy), csv_num(r.bethe_entropy),
                   csv_num(r.entropy_abs_err), csv_num(r.l1_error),
                   r.converged ? "1" : "0", "", ""});
  os << csv_row({"summary", "", "", "", "", "", "", "", "", "", "", "",
                 csv_num(res.pearson_f_l1), csv_num(res.pearson_entropy_l1)});
}

namespace {

std::string chosen_label(const std::vector<Region>& regions) {
  std::string out;
  for (std::size_t i = 0; i < regions.size(); ++i) {
    if (i) out += '|';
    out += region_label(regions[i]);
  }
  return out;
}

std::string chosen_score(const PursuitRecord& rec) {
  if (rec.chosen.empty() || rec.scores.empty()) return "";
  // score of the first chosen region
  for (const auto& sc : rec.scores)
    if (sc.valid && sc.region == rec.chosen.front()) return csv_num(sc.score);
  return "";
}

const std::vector<std::string> kTraceHeader = {
    "iteration", "strategy",  "chosen_region", "score",
    "free_energy", "l1_error", "gbp_iters",    "converged"};

}  // namespace

void write_trace_csv(const PursuitTrace& trace, Strategy strategy, std::ostream& os) {
  os << csv_row(kTraceHeader);
  for (const auto& rec : trace.records) {
    os << csv_row({std::to_string(rec.iteration),
                   rec.iteration == 0 ? "baseline" : strategy_name(strategy),
                   chosen_label(rec.chosen), chosen_score(rec),
                   csv_num(rec.free_energy),
                   rec.l1_error ? csv_num(*rec.l1_error) : "",
                   std::to_string(rec.gbp_iters), rec.converged ? "1" : "0"});
  }
}

void write_averaged_trace_csv(const std::vector<PursuitTrace>& traces,
                              Strategy strategy, std::ostream& os) {
  if (traces.empty()) throw std::invalid_argument("no traces to average");
  const std::size_t len = traces.front().records.size();
  for (const auto& t : traces)
    if (t.records.size() != len) throw std::invalid_argument("trace length mismatch");
  // identical values average to themselves bit-exactly, so the shared
  // baseline row stays byte-identical with the single-run traces
  auto mean = [&](auto&& get) {
    double first = get(traces.front());
    bool all_equal = true;
    double sum = 0.0;
    for (const auto& t : traces) {
      double v = get(t);
      if (v != first) all_equal = false;
      sum += v;
    }
    return all_equal ? first : sum / static_cast<double>(traces.size());
  };
  os << csv_row(kTraceHeader);
  for (std::size_t i = 0; i < len; ++i) {
    bool have_l1 = true;
    for (const auto& t : traces)
      if (!t.records[i].l1_error) have_l1 = false;
    double f = mean([&](const PursuitTrace& t) { return t.records[i].free_energy; });
    double iters = mean([&](const PursuitTrace& t) {
      return static_cast<double>(t.records[i].gbp_iters);
    });
    double conv = mean([&](const PursuitTrace& t) {
      return t.records[i].converged ? 1.0 : 0.0;
    });
    os << csv_row({std::to_string(traces.front().records[i].iteration),
                   i == 0 ? "baseline" : strategy_name(strategy), "", "",
                   csv_num(f),
                   have_l1 ? csv_num(mean([&](const PursuitTrace& t) {
                     return *t.records[i].l1_error;
                   }))
                           : "",
                   csv_num(iters), csv_num(conv)});
  }
}

std::vector<PursuitTrace> rand_pursuit_draws(const FactorGraph& fg, PursuitConfig config,
                                             int draws, const ExactResult* oracle) {
  if (draws < 1) throw std::invalid_argument("draws must be positive");
  config.strategy = Strategy::RAND;
  std::vector<PursuitTrace> out;
  out.reserve(static_cast<std::size_t>(draws));
  for (int d = 0; d < draws; ++d) {
    PursuitConfig c = config;
    c.seed = config.seed + static_cast<std::uint64_t>(d);
    out.push_back(region_pursuit(fg, c, oracle));
  }
  return out;
}

}  // namespace rgbp
