#include "rgbp/gbp.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "rgbp/prng.hpp"

namespace rgbp {

namespace {

const double kLogBeliefFloor = std::log(1e-300);
const double kLogMessageFloor = std::log(1e-30);

std::vector<int> topological_ids(const RegionGraph& rg) {
  auto ids = rg.ids();
  std::map<int, int> indeg;
  for (int id : ids) indeg[id] = static_cast<int>(rg.parents(id).size());
  std::deque<int> ready;
  for (int id : ids)
    if (indeg[id] == 0) ready.push_back(id);
  std::vector<int> topo;
  while (!ready.empty()) {
    int u = ready.front();
    ready.pop_front();
    topo.push_back(u);
    for (int c : rg.children(u))
      if (--indeg[c] == 0) ready.push_back(c);
  }
  if (topo.size() != ids.size()) throw std::runtime_error("cycle detected");
  return topo;
}

struct Context {
  const RegionGraph* rg = nullptr;
  const FactorGraph* fg = nullptr;
  std::vector<int> topo;                     // alive region ids, parents first
  std::map<int, int> pos;                    // region id -> topo index
  std::vector<EdgeKey> edges;                // grouped by parent topo position
  std::map<EdgeKey, int> edge_index;
  std::vector<std::vector<int>> out_edges;   // per topo position
  std::vector<std::vector<int>> uset;        // per topo position, edge indices
  std::vector<LogTable> local_logpot;        // per topo position
};

Context build_context(const RegionGraph& rg, const FactorGraph& fg) {
  Context ctx;
  ctx.rg = &rg;
  ctx.fg = &fg;
  ctx.topo = topological_ids(rg);
  for (std::size_t i = 0; i < ctx.topo.size(); ++i) ctx.pos[ctx.topo[i]] = static_cast<int>(i);

  for (int id : ctx.topo)
    for (int c : rg.children(id)) ctx.edges.push_back({id, c});
  for (std::size_t e = 0; e < ctx.edges.size(); ++e) ctx.edge_index[ctx.edges[e]] = static_cast<int>(e);

  ctx.out_edges.resize(ctx.topo.size());
  for (std::size_t e = 0; e < ctx.edges.size(); ++e)
    ctx.out_edges[static_cast<std::size_t>(ctx.pos[ctx.edges[e].parent])].push_back(static_cast<int>(e));

  // shadows (self + descendants) -> uset = edges into the shadow from outside
  ctx.uset.resize(ctx.topo.size());
  for (std::size_t i = 0; i < ctx.topo.size(); ++i) {
    int id = ctx.topo[i];
    auto dec = rg.descendants(id);
    dec.push_back(id);
    std::sort(dec.begin(), dec.end());
    for (std::size_t e = 0; e < ctx.edges.size(); ++e) {
      bool dst_in = std::binary_search(dec.begin(), dec.end(), ctx.edges[e].child);
      bool src_in = std::binary_search(dec.begin(), dec.end(), ctx.edges[e].parent);
      if (dst_in && !src_in) ctx.uset[i].push_back(static_cast<int>(e));
    }
  }

  ctx.local_logpot.reserve(ctx.topo.size());
  for (int id : ctx.topo) {
    const Region& r = rg.region(id);
    LogTable t = make_log_table(r.vars, fg.cards_for(r.vars));
    for (FactorId a : r.factors) {
      const Factor& f = fg.factor(a);
      add_embedded(t, f.scope, f.log_table);
    }
    ctx.local_logpot.push_back(std::move(t));
  }
  return ctx;
}

LogTable uniform_message(const Region& child, const FactorGraph& fg) {
  LogTable t = make_log_table(child.vars, fg.cards_for(child.vars));
  double u = -std::log(static_cast<double>(t.size()));
  std::fill(t.v.begin(), t.v.end(), u);
  return t;
}

LogTable belief_in_context(const Context& ctx, const std::vector<LogTable>& msgs, int pos) {
  LogTable b = ctx.local_logpot[static_cast<std::size_t>(pos)];
  for (int e : ctx.uset[static_cast<std::size_t>(pos)])
    add_embedded(b, msgs[static_cast<std::size_t>(e)].scope, msgs[static_cast<std::size_t>(e)].v);
  normalize_lse(b);
  return b;
}

// m_new = marg(b_parent) / b_child * m_old, clamped, normalized, damped.
LogTable apply_update(const LogTable& m_old, const LogTable& b_parent,
                      const LogTable& b_child, double damping, long long* clamps) {
  LogTable marg = lse_marginal(b_parent, m_old.scope);
  LogTable m_new = m_old;
  for (std::size_t i = 0; i < m_new.v.size(); ++i) {
    if (b_child.v[i] < kLogBeliefFloor) {
      m_new.v[i] = kLogMessageFloor;
      if (clamps) ++*clamps;
      continue;
    }
    double x = marg.v[i] - b_child.v[i] + m_old.v[i];
    if (!std::isfinite(x) || x < kLogMessageFloor) {
      x = kLogMessageFloor;
      if (clamps) ++*clamps;
    }
    m_new.v[i] = x;
  }
  normalize_lse(m_new);
  if (damping > 0.0) {
    for (std::size_t i = 0; i < m_new.v.size(); ++i)
      m_new.v[i] = (1.0 - damping) * m_new.v[i] + damping * m_old.v[i];
    normalize_lse(m_new);
  }
  return m_new;
}

}  // namespace

std::vector<EdgeKey> u_set(const RegionGraph& rg, int r) {
  auto dec = rg.descendants(r);
  dec.push_back(r);
  std::sort(dec.begin(), dec.end());
  std::vector<EdgeKey> out;
  for (int id : rg.ids())
    for (int c : rg.children(id)) {
      bool dst_in = std::binary_search(dec.begin(), dec.end(), c);
      bool src_in = std::binary_search(dec.begin(), dec.end(), id);
      if (dst_in && !src_in) out.push_back({id, c});
    }
  std::sort(out.begin(), out.end());
  return out;
}

LogTable compute_belief(const RegionGraph& rg, const FactorGraph& fg,
                        const GBPState& state, int r) {
  const Region& region = rg.region(r);
  LogTable b = make_log_table(region.vars, fg.cards_for(region.vars));
  for (FactorId a : region.factors) {
    const Factor& f = fg.factor(a);
    add_embedded(b, f.scope, f.log_table);
  }
  for (const EdgeKey& e : u_set(rg, r)) {
    auto it = state.messages.find(e);
    if (it == state.messages.end()) throw std::invalid_argument("state is missing a message");
    add_embedded(b, it->second.scope, it->second.v);
  }
  normalize_lse(b);
  return b;
}

LogTable update_message(const RegionGraph& rg, const FactorGraph& fg,
                        const GBPState& state, EdgeKey edge, double damping,
                        long long* clamp_events) {
  if (!rg.alive(edge.parent) || !rg.alive(edge.child) || !rg.has_edge(edge.parent, edge.child))
    throw std::invalid_argument("unknown edge");
  auto it = state.messages.find(edge);
  if (it == state.messages.end()) throw std::invalid_argument("state is missing a message");
  LogTable b_parent = compute_belief(rg, fg, state, edge.parent);
  LogTable b_child = compute_belief(rg, fg, state, edge.child);
  return apply_update(it->second, b_parent, b_child, damping, clamp_events);
}

std::pair<GBPState, BeliefSet> run_gbp(const RegionGraph& rg, const FactorGraph& fg,
                                       const GBPOptions& opts, const GBPState* init,
                                       const std::set<EdgeKey>* update_only) {
  if (opts.damping < 0.0 || opts.damping >= 1.0)
    throw std::invalid_argument("damping must lie in [0, 1)");
  if (!(opts.tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");

  Context ctx = build_context(rg, fg);
  const std::size_t n_edges = ctx.edges.size();

  std::vector<LogTable> msgs;
  msgs.reserve(n_edges);
  SplitMix64 rng(opts.seed);
  for (std::size_t e = 0; e < n_edges; ++e) {
    const Region& child = rg.region(ctx.edges[e].child);
    LogTable m = uniform_message(child, fg);
    if (init) {
      auto it = init->messages.find(ctx.edges[e]);
      if (it != init->messages.end() && it->second.scope == m.scope) m = it->second;
    } else if (opts.random_init) {
      for (double& x : m.v) x = rng.uniform(-0.5, 0.5);
      normalize_lse(m);
    }
    msgs.push_back(std::move(m));
  }

  std::vector<char> updatable(n_edges, 1);
  if (update_only)
    for (std::size_t e = 0; e < n_edges; ++e)
      updatable[e] = update_only->count(ctx.edges[e]) ? 1 : 0;

  GBPState state;
  for (int id : ctx.topo)
    if (rg.counting(id) == 0) state.has_zero_counting_regions = true;

  double residual = std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < opts.max_iters; ++iter) {
    residual = 0.0;
    if (opts.schedule == Schedule::topdown_roundrobin) {
      for (std::size_t p = 0; p < ctx.topo.size(); ++p) {
        bool any = false;
        for (int e : ctx.out_edges[p])
          if (updatable[static_cast<std::size_t>(e)]) any = true;
        if (!any) continue;
        LogTable b_parent = belief_in_context(ctx, msgs, static_cast<int>(p));
        for (int e : ctx.out_edges[p]) {
          if (!updatable[static_cast<std::size_t>(e)]) continue;
          int child_pos = ctx.pos[ctx.edges[static_cast<std::size_t>(e)].child];
          LogTable b_child = belief_in_context(ctx, msgs, child_pos);
          LogTable m = apply_update(msgs[static_cast<std::size_t>(e)], b_parent, b_child,
                                    opts.damping, &state.clamp_events);
          for (std::size_t i = 0; i < m.v.size(); ++i)
            residual = std::max(residual,
                                std::abs(m.v[i] - msgs[static_cast<std::size_t>(e)].v[i]));
          msgs[static_cast<std::size_t>(e)] = std::move(m);
        }
      }
    } else {
      std::vector<int> order;
      for (std::size_t e = 0; e < n_edges; ++e)
        if (updatable[e]) order.push_back(static_cast<int>(e));
      SplitMix64 sweep_rng(opts.seed ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(iter + 1)));
      for (std::size_t i = order.size(); i > 1; --i)
        std::swap(order[i - 1], order[static_cast<std::size_t>(sweep_rng.below(i))]);
      for (int e : order) {
        int parent_pos = ctx.pos[ctx.edges[static_cast<std::size_t>(e)].parent];
        int child_pos = ctx.pos[ctx.edges[static_cast<std::size_t>(e)].child];
        LogTable b_parent = belief_in_context(ctx, msgs, parent_pos);
        LogTable b_child = belief_in_context(ctx, msgs, child_pos);
        LogTable m = apply_update(msgs[static_cast<std::size_t>(e)], b_parent, b_child,
                                  opts.damping, &state.clamp_events);
        for (std::size_t i = 0; i < m.v.size(); ++i)
          residual = std::max(residual,
                              std::abs(m.v[i] - msgs[static_cast<std::size_t>(e)].v[i]));
        msgs[static_cast<std::size_t>(e)] = std::move(m);
      }
    }
    state.residual_curve.push_back(residual);
    if (residual < opts.tolerance) {
      ++iter;
      state.converged = true;
      break;
    }
  }
  state.iterations = iter;
  state.max_residual = residual;

  for (std::size_t e = 0; e < n_edges; ++e) state.messages[ctx.edges[e]] = msgs[e];

  BeliefSet beliefs;
  for (std::size_t p = 0; p < ctx.topo.size(); ++p)
    beliefs.beliefs[ctx.topo[p]] = belief_in_context(ctx, msgs, static_cast<int>(p));
  return {std::move(state), std::move(beliefs)};
}

double region_free_energy(const RegionGraph& rg, const FactorGraph& fg,
                          const BeliefSet& beliefs, int r) {
  auto it = beliefs.beliefs.find(r);
  if (it == beliefs.beliefs.end()) throw std::invalid_argument("missing belief for region");
  const LogTable& b = it->second;
  const Region& region = rg.region(r);
  LogTable w = make_log_table(region.vars, fg.cards_for(region.vars));
  for (FactorId a : region.factors) {
    const Factor& f = fg.factor(a);
    add_embedded(w, f.scope, f.log_table);
  }
  return -expectation(b, w.v) - entropy(b);
}

double rg_free_energy(const RegionGraph& rg, const FactorGraph& fg,
                      const BeliefSet& beliefs) {
  double f = 0.0;
  for (int id : rg.ids())
    f += static_cast<double>(rg.counting(id)) * region_free_energy(rg, fg, beliefs, id);
  return f;
}

std::vector<std::vector<double>> node_marginals(const RegionGraph& rg,
                                                const FactorGraph& fg,
                                                const BeliefSet& beliefs) {
  std::vector<std::vector<double>> out(static_cast<std::size_t>(fg.num_vars()));
  for (int i = 0; i < fg.num_vars(); ++i) {
    int best = -1;
    for (int id : rg.ids()) {
      const auto& vars = rg.region(id).vars;
      if (!std::binary_search(vars.begin(), vars.end(), i)) continue;
      if (best < 0 || vars.size() < rg.region(best).vars.size()) best = id;
    }
    if (best < 0) throw std::invalid_argument("no region contains variable " + std::to_string(i));
    LogTable m = lse_marginal(beliefs.beliefs.at(best), std::vector<int>{i});
    normalize_lse(m);
    out[static_cast<std::size_t>(i)] = probabilities(m);
  }
  return out;
}

}  // namespace rgbp
