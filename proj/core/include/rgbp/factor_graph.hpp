#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rgbp/table.hpp"

namespace rgbp {

using VarId = int;
using FactorId = int;
using Assignment = std::vector<int>;

struct Factor {
  FactorId id = -1;
  std::vector<VarId> scope;       // sorted, duplicate-free
  std::vector<double> log_table;  // row-major, last scope variable fastest

  std::size_t table_size() const { return log_table.size(); }
  /// Linear-domain copy of the table (interface form).
  std::vector<double> linear_table() const;
};

/// Discrete factor-graph model. Immutable after construction; the joint is
/// the normalized product of the factor tables.
class FactorGraph {
 public:
  FactorGraph() = default;

  int num_vars() const { return static_cast<int>(cards_.size()); }
  int num_factors() const { return static_cast<int>(factors_.size()); }
  int card(VarId i) const { return cards_.at(static_cast<std::size_t>(i)); }
  const std::vector<int>& cardinalities() const { return cards_; }
  const Factor& factor(FactorId a) const { return factors_.at(static_cast<std::size_t>(a)); }
  const std::vector<Factor>& factors() const { return factors_; }
  const std::vector<FactorId>& factors_of_var(VarId i) const {
    return var_factors_.at(static_cast<std::size_t>(i));
  }

  std::vector<int> cards_for(std::span<const int> scope) const;

  bool valid_assignment(const Assignment& x) const;
  double log_joint(const Assignment& x) const;

 private:
  friend FactorGraph build_factor_graph(
      std::vector<int> cardinalities,
      const std::vector<std::pair<std::vector<VarId>, std::vector<double>>>& factors);

  std::vector<int> cards_;
  std::vector<Factor> factors_;
  std::vector<std::vector<FactorId>> var_factors_;
};

/// Validates and assembles a model. Tables are given in the linear domain;
/// they are stored in the log domain internally.
/// Throws std::invalid_argument on: size mismatch, negative or non-finite
/// table entry, empty or invalid scope, isolated variable, all-zero table.
FactorGraph build_factor_graph(
    std::vector<int> cardinalities,
    const std::vector<std::pair<std::vector<VarId>, std::vector<double>>>& factors);

/// prod_a psi_a(x_a), accumulated in the log domain and exponentiated.
double unnormalized_joint(const FactorGraph& fg, const Assignment& x);

/// n x m spin grid: binary variables, psi_i(x) = exp(a_i x) and
/// psi_ij = exp(W_ij x_i x_j) with x in {-1,+1} (state 0 -> -1), a_i drawn
/// uniformly from [0, a_max] and W_ij from [0, w_max]. Unary factors come
/// first in variable order, then the pairwise factors in row-major order
/// (right edge, then down edge). With cluster_boost, weights inside a random
/// node subset are doubled.
FactorGraph gen_grid(int n, int m, double w_max, double a_max,
                     std::uint64_t seed, bool cluster_boost = false);

/// Fully connected spin model on n nodes: n unary factors then n(n-1)/2
/// pairwise factors in lexicographic pair order; weights as in gen_grid.
FactorGraph gen_fully_connected(int n, double w_max, double a_max,
                                std::uint64_t seed, bool cluster_boost = false);

/// Single cycle of n binary variables; unary log-weights drawn from
/// N(0, msg_std) and edge log-weights from N(0, w_std).
FactorGraph gen_loop(int n, double w_std, double msg_std, std::uint64_t seed);

/// Random tree on n binary variables (each node attaches to a uniformly
/// chosen earlier node), unary plus pairwise weights as in gen_grid.
FactorGraph gen_tree(int n, double w_max, double a_max, std::uint64_t seed);

}  // namespace rgbp
