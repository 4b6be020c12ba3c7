#include "rgbp/factor_graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rgbp/prng.hpp"

namespace rgbp {

std::vector<double> Factor::linear_table() const {
  std::vector<double> out(log_table.size());
  for (std::size_t i = 0; i < log_table.size(); ++i) out[i] = std::exp(log_table[i]);
  return out;
}

std::vector<int> FactorGraph::cards_for(std::span<const int> scope) const {
  std::vector<int> out(scope.size());
  for (std::size_t i = 0; i < scope.size(); ++i) out[i] = card(scope[i]);
  return out;
}

bool FactorGraph::valid_assignment(const Assignment& x) const {
  if (static_cast<int>(x.size()) != num_vars()) return false;
  for (int i = 0; i < num_vars(); ++i)
    if (x[static_cast<std::size_t>(i)] < 0 || x[static_cast<std::size_t>(i)] >= card(i))
      return false;
  return true;
}

double FactorGraph::log_joint(const Assignment& x) const {
  if (!valid_assignment(x)) throw std::invalid_argument("invalid assignment");
  double lj = 0.0;
  for (const Factor& f : factors_) {
    std::size_t idx = 0;
    for (VarId v : f.scope) idx = idx * static_cast<std::size_t>(card(v)) +
                                  static_cast<std::size_t>(x[static_cast<std::size_t>(v)]);
    lj += f.log_table[idx];
  }
  return lj;
}

FactorGraph build_factor_graph(
    std::vector<int> cardinalities,
    const std::vector<std::pair<std::vector<VarId>, std::vector<double>>>& factors) {
  FactorGraph fg;
  if (cardinalities.empty()) throw std::invalid_argument("model has no variables");
  for (int c : cardinalities)
    if (c < 2) throw std::invalid_argument("cardinality must be at least 2");
  fg.cards_ = std::move(cardinalities);
  fg.var_factors_.assign(fg.cards_.size(), {});

  fg.factors_.reserve(factors.size());
  for (std::size_t a = 0; a < factors.size(); ++a) {
    const auto& [scope, table] = factors[a];
    if (scope.empty()) throw std::invalid_argument("empty scope");
    if (!std::is_sorted(scope.begin(), scope.end()))
      throw std::invalid_argument("factor scope must be sorted ascending");
    if (std::adjacent_find(scope.begin(), scope.end()) != scope.end())
      throw std::invalid_argument("duplicate variable in scope");
    Factor f;
    f.id = static_cast<FactorId>(a);
    f.scope = scope;
    std::size_t expected = 1;
    for (VarId v : f.scope) {
      if (v < 0 || v >= fg.num_vars()) throw std::invalid_argument("scope references unknown variable");
      expected *= static_cast<std::size_t>(fg.card(v));
    }
    if (table.size() != expected) throw std::invalid_argument("size mismatch");
    bool any_positive = false;
    f.log_table.resize(table.size());
    for (std::size_t i = 0; i < table.size(); ++i) {
      double x = table[i];
      if (!(x >= 0.0) || !std::isfinite(x))
        throw std::invalid_argument("negative or non-finite table entry");
      if (x > 0.0) any_positive = true;
      f.log_table[i] = x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
    }
    if (!any_positive) throw std::invalid_argument("factor table is identically zero");
    for (VarId v : f.scope) fg.var_factors_[static_cast<std::size_t>(v)].push_back(f.id);
    fg.factors_.push_back(std::move(f));
  }

  for (int i = 0; i < fg.num_vars(); ++i)
    if (fg.var_factors_[static_cast<std::size_t>(i)].empty())
      throw std::invalid_argument("isolated variable");
  return fg;
}

double unnormalized_joint(const FactorGraph& fg, const Assignment& x) {
  return std::exp(fg.log_joint(x));
}

namespace {

// state 0 <-> spin -1, state 1 <-> spin +1
std::vector<double> unary_spin_table(double a) {
  return {std::exp(-a), std::exp(a)};
}

std::vector<double> pair_spin_table(double w) {
  return {std::exp(w), std::exp(-w), std::exp(-w), std::exp(w)};
}

FactorGraph spin_model(int n_vars, const std::vector<std::pair<int, int>>& edges,
                       const std::vector<double>& alpha, const std::vector<double>& w) {
  std::vector<std::pair<std::vector<VarId>, std::vector<double>>> factors;
  factors.reserve(alpha.size() + w.size());
  for (int i = 0; i < n_vars; ++i)
    factors.push_back({{i}, unary_spin_table(alpha[static_cast<std::size_t>(i)])});
  for (std::size_t e = 0; e < edges.size(); ++e) {
    auto [i, j] = edges[e];
    if (i > j) std::swap(i, j);
    factors.push_back({{i, j}, pair_spin_table(w[e])});
  }
  std::vector<int> cards(static_cast<std::size_t>(n_vars), 2);
  return build_factor_graph(std::move(cards), factors);
}

void apply_cluster_boost(SplitMix64& rng, int n_vars,
                         const std::vector<std::pair<int, int>>& edges,
                         std::vector<double>& alpha, std::vector<double>& w) {
  std::vector<char> in_cluster(static_cast<std::size_t>(n_vars));
  for (int i = 0; i < n_vars; ++i) in_cluster[static_cast<std::size_t>(i)] = rng.next() & 1u;
  for (int i = 0; i < n_vars; ++i)
    if (in_cluster[static_cast<std::size_t>(i)]) alpha[static_cast<std::size_t>(i)] *= 2.0;
  for (std::size_t e = 0; e < edges.size(); ++e)
    if (in_cluster[static_cast<std::size_t>(edges[e].first)] &&
        in_cluster[static_cast<std::size_t>(edges[e].second)])
      w[e] *= 2.0;
}

}  // namespace

FactorGraph gen_grid(int n, int m, double w_max, double a_max,
                     std::uint64_t seed, bool cluster_boost) {
  if (n < 2 || m < 2) throw std::invalid_argument("grid needs n, m >= 2");
  if (w_max < 0 || a_max < 0) throw std::invalid_argument("weight bounds must be >= 0");
  const int nv = n * m;
  std::vector<std::pair<int, int>> edges;
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < m; ++c) {
      int v = r * m + c;
      if (c + 1 < m) edges.push_back({v, v + 1});
      if (r + 1 < n) edges.push_back({v, v + m});
    }
  SplitMix64 rng(seed);
  std::vector<double> alpha(static_cast<std::size_t>(nv));
  for (auto& a : alpha) a = rng.uniform(0.0, a_max);
  std::vector<double> w(edges.size());
  for (auto& x : w) x = rng.uniform(0.0, w_max);
  if (cluster_boost) apply_cluster_boost(rng, nv, edges, alpha, w);
  return spin_model(nv, edges, alpha, w);
}

FactorGraph gen_fully_connected(int n, double w_max, double a_max,
                                std::uint64_t seed, bool cluster_boost) {
  if (n < 3) throw std::invalid_argument("fully connected model needs n >= 3");
  if (w_max < 0 || a_max < 0) throw std::invalid_argument("weight bounds must be >= 0");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j});
  SplitMix64 rng(seed);
  std::vector<double> alpha(static_cast<std::size_t>(n));
  for (auto& a : alpha) a = rng.uniform(0.0, a_max);
  std::vector<double> w(edges.size());
  for (auto& x : w) x = rng.uniform(0.0, w_max);
  if (cluster_boost) apply_cluster_boost(rng, n, edges, alpha, w);
  return spin_model(n, edges, alpha, w);
}

FactorGraph gen_loop(int n, double w_std, double msg_std, std::uint64_t seed) {
  if (n < 3) throw std::invalid_argument("loop needs n >= 3");
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i) edges.push_back({i, (i + 1) % n});
  SplitMix64 rng(seed);
  std::vector<double> alpha(static_cast<std::size_t>(n));
  for (auto& a : alpha) a = rng.gaussian(msg_std);
  std::vector<double> w(edges.size());
  for (auto& x : w) x = rng.gaussian(w_std);
  return spin_model(n, edges, alpha, w);
}

FactorGraph gen_tree(int n, double w_max, double a_max, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("tree needs n >= 2");
  SplitMix64 rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int i = 1; i < n; ++i)
    edges.push_back({static_cast<int>(rng.below(static_cast<std::uint64_t>(i))), i});
  std::vector<double> alpha(static_cast<std::size_t>(n));
  for (auto& a : alpha) a = rng.uniform(0.0, a_max);
  std::vector<double> w(edges.size());
  for (auto& x : w) x = rng.uniform(0.0, w_max);
  return spin_model(n, edges, alpha, w);
}

}  // namespace rgbp
