#pragma once

#include <optional>
#include <vector>

#include "rgbp/factor_graph.hpp"
#include "rgbp/graph.hpp"

namespace rgbp {

enum class ExactMethod { brute_force, variable_elimination };

struct ExactResult {
  std::vector<std::vector<double>> node_marginals;  // one vector per variable
  double log_partition = 0.0;
  ExactMethod method = ExactMethod::brute_force;
};

/// Full enumeration with log-sum-exp accumulation. Requires the joint state
/// count to be at most 2^22.
ExactResult exact_brute_force(const FactorGraph& fg);

/// Bucket elimination; the default ordering is greedy min-fill with ties
/// broken by lowest variable id. One elimination run per queried marginal.
/// Throws std::runtime_error when the induced width exceeds 22.
ExactResult exact_variable_elimination(
    const FactorGraph& fg, std::optional<std::vector<int>> order = std::nullopt);

/// (1/|V|) sum_i sum_x |b_i(x) - p_i(x)|.
double avg_l1_error(const std::vector<std::vector<double>>& approx,
                    const ExactResult& exact);

/// Interaction graph of the model: one vertex per variable, factor scopes
/// fully connected.
UGraph interaction_graph(const FactorGraph& fg);

/// Induced width of the min-fill ordering on the interaction graph.
int min_fill_width(const FactorGraph& fg);

/// Exact joint entropy -sum p log p by enumeration (same size cap as
/// exact_brute_force).
double exact_entropy(const FactorGraph& fg);

}  // namespace rgbp
