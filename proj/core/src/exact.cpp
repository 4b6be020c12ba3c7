#include "rgbp/exact.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "rgbp/graph.hpp"
#include "rgbp/table.hpp"

namespace rgbp {

namespace {

constexpr std::size_t kMaxStates = std::size_t{1} << 22;
constexpr int kWidthCap = 22;

std::size_t joint_state_count(const FactorGraph& fg) {
  std::size_t n = 1;
  for (int i = 0; i < fg.num_vars(); ++i) {
    n *= static_cast<std::size_t>(fg.card(i));
    if (n > kMaxStates) return n;
  }
  return n;
}

}  // namespace

UGraph interaction_graph(const FactorGraph& fg) {
  UGraph g(fg.num_vars());
  for (const Factor& f : fg.factors())
    for (std::size_t i = 0; i < f.scope.size(); ++i)
      for (std::size_t j = i + 1; j < f.scope.size(); ++j)
        g.add_edge(f.scope[i], f.scope[j]);
  return g;
}

int min_fill_width(const FactorGraph& fg) {
  return min_fill_order(interaction_graph(fg)).second;
}

ExactResult exact_brute_force(const FactorGraph& fg) {
  const std::size_t total = joint_state_count(fg);
  if (total > kMaxStates) throw std::runtime_error("state space too large");
  const int n = fg.num_vars();

  // Pass 1: max log joint; pass 2: shifted sums.
  std::vector<int> x(static_cast<std::size_t>(n), 0);
  auto advance = [&]() {
    for (int i = n - 1; i >= 0; --i) {
      if (++x[static_cast<std::size_t>(i)] < fg.card(i)) return true;
      x[static_cast<std::size_t>(i)] = 0;
    }
    return false;
  };
  double max_lj = -std::numeric_limits<double>::infinity();
  do {
    max_lj = std::max(max_lj, fg.log_joint(x));
  } while (advance());
  if (max_lj == -std::numeric_limits<double>::infinity())
    throw std::runtime_error("model has zero total mass");

  std::vector<std::vector<double>> marg(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) marg[static_cast<std::size_t>(i)].assign(static_cast<std::size_t>(fg.card(i)), 0.0);
  double z = 0.0;
  std::fill(x.begin(), x.end(), 0);
  do {
    double w = std::exp(fg.log_joint(x) - max_lj);
    z += w;
    for (int i = 0; i < n; ++i)
      marg[static_cast<std::size_t>(i)][static_cast<std::size_t>(x[static_cast<std::size_t>(i)])] += w;
  } while (advance());

  ExactResult res;
  res.method = ExactMethod::brute_force;
  res.log_partition = max_lj + std::log(z);
  res.node_marginals.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    auto& m = marg[static_cast<std::size_t>(i)];
    for (double& p : m) p /= z;
    res.node_marginals[static_cast<std::size_t>(i)] = m;
  }
  return res;
}

double exact_entropy(const FactorGraph& fg) {
  const std::size_t total = joint_state_count(fg);
  if (total > kMaxStates) throw std::runtime_error("state space too large");
  const int n = fg.num_vars();
  std::vector<int> x(static_cast<std::size_t>(n), 0);
  auto advance = [&]() {
    for (int i = n - 1; i >= 0; --i) {
      if (++x[static_cast<std::size_t>(i)] < fg.card(i)) return true;
      x[static_cast<std::size_t>(i)] = 0;
    }
    return false;
  };
  double log_z = exact_brute_force(fg).log_partition;
  double h = 0.0;
  do {
    double lp = fg.log_joint(x) - log_z;
    double p = std::exp(lp);
    if (p > 0.0) h -= p * lp;
  } while (advance());
  return h;
}

namespace {

// Sums out all variables not in `keep` (which must be sorted), following
// `order` restricted to the eliminated variables. Returns the combined table
// over `keep` (unnormalized, log domain).
LogTable eliminate_to(const FactorGraph& fg, const std::vector<int>& order,
                      const std::vector<int>& keep) {
  std::vector<LogTable> tables;
  tables.reserve(static_cast<std::size_t>(fg.num_factors()));
  for (const Factor& f : fg.factors()) {
    LogTable t;
    t.scope = f.scope;
    t.cards = fg.cards_for(f.scope);
    t.v = f.log_table;
    tables.push_back(std::move(t));
  }

  for (int v : order) {
    if (std::binary_search(keep.begin(), keep.end(), v)) continue;
    std::vector<LogTable> bucket;
    std::vector<LogTable> rest;
    for (auto& t : tables) {
      if (std::binary_search(t.scope.begin(), t.scope.end(), v))
        bucket.push_back(std::move(t));
      else
        rest.push_back(std::move(t));
    }
    if (bucket.empty()) continue;
    std::vector<int> union_scope;
    for (const auto& t : bucket) {
      std::vector<int> merged;
      std::set_union(union_scope.begin(), union_scope.end(), t.scope.begin(),
                     t.scope.end(), std::back_inserter(merged));
      union_scope = std::move(merged);
    }
    if (static_cast<int>(union_scope.size()) > kWidthCap + 1)
      throw std::runtime_error("induced width exceeds cap");
    LogTable prod = make_log_table(union_scope, fg.cards_for(union_scope));
    for (const auto& t : bucket) add_embedded(prod, t.scope, t.v);
    std::vector<int> onto;
    for (int u : union_scope)
      if (u != v) onto.push_back(u);
    rest.push_back(lse_marginal(prod, onto));
    tables = std::move(rest);
  }

  LogTable out = make_log_table(keep, fg.cards_for(keep));
  for (const auto& t : tables) add_embedded(out, t.scope, t.v);
  return out;
}

}  // namespace

ExactResult exact_variable_elimination(const FactorGraph& fg,
                                       std::optional<std::vector<int>> order) {
  std::vector<int> elim_order;
  if (order && !order->empty()) {
    elim_order = *order;
    std::vector<int> sorted = elim_order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> expect(static_cast<std::size_t>(fg.num_vars()));
    for (int i = 0; i < fg.num_vars(); ++i) expect[static_cast<std::size_t>(i)] = i;
    if (sorted != expect)
      throw std::invalid_argument("ordering must be a permutation of all variables");
    if (induced_width(interaction_graph(fg), elim_order) > kWidthCap)
      throw std::runtime_error("induced width exceeds cap");
  } else {
    auto [mf_order, width] = min_fill_order(interaction_graph(fg));
    if (width > kWidthCap) throw std::runtime_error("induced width exceeds cap");
    elim_order = std::move(mf_order);
  }

  ExactResult res;
  res.method = ExactMethod::variable_elimination;
  LogTable scalar = eliminate_to(fg, elim_order, {});
  res.log_partition = scalar.v.at(0);
  res.node_marginals.resize(static_cast<std::size_t>(fg.num_vars()));
  for (int i = 0; i < fg.num_vars(); ++i) {
    LogTable m = eliminate_to(fg, elim_order, {i});
    normalize_lse(m);
    res.node_marginals[static_cast<std::size_t>(i)] = probabilities(m);
  }
  return res;
}

double avg_l1_error(const std::vector<std::vector<double>>& approx,
                    const ExactResult& exact) {
  if (approx.size() != exact.node_marginals.size())
    throw std::invalid_argument("dimension mismatch");
  double total = 0.0;
  for (std::size_t i = 0; i < approx.size(); ++i) {
    if (approx[i].size() != exact.node_marginals[i].size())
      throw std::invalid_argument("dimension mismatch");
    for (std::size_t s = 0; s < approx[i].size(); ++s)
      total += std::abs(approx[i][s] - exact.node_marginals[i][s]);
  }
  return total / static_cast<double>(approx.size());
}

}  // namespace rgbp
