#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rgbp/pursuit.hpp"

namespace rgbp {

struct LoopTrialRow {
  int trial = 0;
  double w_std = 0.0;
  double msg_std = 0.0;
  double log_z = 0.0;
  double bethe_f = 0.0;
  double f_abs_err = 0.0;
  double exact_entropy = 0.0;
  double bethe_entropy = 0.0;
  double entropy_abs_err = 0.0;
  double l1_error = 0.0;
  bool converged = false;
};

struct LoopCorrelationResult {
  std::vector<LoopTrialRow> rows;
  double pearson_f_l1 = 0.0;        // NaN when undefined (fewer than 2 rows)
  double pearson_entropy_l1 = 0.0;
};

/// Ordinary BP on single loops of n binary variables: per trial, the edge
/// and unary log-weight standard deviations sweep their ranges evenly, a
/// model is drawn, and the exact free energy / entropy / node marginals are
/// compared with the converged Bethe quantities. The summary carries the
/// Pearson correlation of |free-energy error| and |entropy error| with the
/// average L1 marginal error.
LoopCorrelationResult loop_correlation(int n, double w_std_lo, double w_std_hi,
                                       double msg_std_lo, double msg_std_hi,
                                       int trials, std::uint64_t seed,
                                       const GBPOptions& opts = {});

void write_loop_correlation_csv(const LoopCorrelationResult& res, std::ostream& os);

double pearson(const std::vector<double>& xs, const std::vector<double>& ys);

/// One trace row per pursuit record. The iteration-0 row is labelled
/// "baseline" so traces of different strategies on the same model share it
/// byte-for-byte. Multi-region batches join labels with '|'.
void write_trace_csv(const PursuitTrace& trace, Strategy strategy, std::ostream& os);

/// Mean free energy / L1 / sweep count over several traces (the RAND
/// averaging mode); `converged` becomes the converged fraction. All traces
/// must have equal length.
void write_averaged_trace_csv(const std::vector<PursuitTrace>& traces,
                              Strategy strategy, std::ostream& os);

/// Runs `draws` RAND pursuits with seeds base_seed, base_seed+1, ...
std::vector<PursuitTrace> rand_pursuit_draws(const FactorGraph& fg,
                                             PursuitConfig config, int draws,
                                             const ExactResult* oracle);

}  // namespace rgbp
