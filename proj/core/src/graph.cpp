#include "rgbp/graph.hpp"

#include <bit>
#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace rgbp {

std::vector<int> UGraph::neighbors(int u) const {
  std::vector<int> out;
  for (int v = 0; v < n_; ++v)
    if (at(u, v)) out.push_back(v);
  return out;
}

int UGraph::degree(int u) const {
  int d = 0;
  for (int v = 0; v < n_; ++v) d += at(u, v) ? 1 : 0;
  return d;
}

namespace {

int fill_in_count(const UGraph& g, const std::vector<char>& gone, int u) {
  std::vector<int> nb;
  for (int v = 0; v < g.num_vertices(); ++v)
    if (!gone[static_cast<std::size_t>(v)] && v != u && g.has_edge(u, v)) nb.push_back(v);
  int fill = 0;
  for (std::size_t i = 0; i < nb.size(); ++i)
    for (std::size_t j = i + 1; j < nb.size(); ++j)
      if (!g.has_edge(nb[i], nb[j])) ++fill;
  return fill;
}

void eliminate(UGraph& g, std::vector<char>& gone, int u, int* width_out) {
  std::vector<int> nb;
  for (int v = 0; v < g.num_vertices(); ++v)
    if (!gone[static_cast<std::size_t>(v)] && v != u && g.has_edge(u, v)) nb.push_back(v);
  if (width_out) *width_out = std::max(*width_out, static_cast<int>(nb.size()));
  for (std::size_t i = 0; i < nb.size(); ++i)
    for (std::size_t j = i + 1; j < nb.size(); ++j) g.add_edge(nb[i], nb[j]);
  gone[static_cast<std::size_t>(u)] = 1;
}

}  // namespace

std::pair<std::vector<int>, int> min_fill_order(UGraph g) {
  const int n = g.num_vertices();
  std::vector<char> gone(static_cast<std::size_t>(n), 0);
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n));
  int width = 0;
  for (int step = 0; step < n; ++step) {
    int best = -1, best_fill = 0;
    for (int u = 0; u < n; ++u) {
      if (gone[static_cast<std::size_t>(u)]) continue;
      int fill = fill_in_count(g, gone, u);
      if (best < 0 || fill < best_fill) {
        best = u;
        best_fill = fill;
      }
    }
    order.push_back(best);
    eliminate(g, gone, best, &width);
  }
  return {order, width};
}

int induced_width(UGraph g, const std::vector<int>& order) {
  std::vector<char> gone(static_cast<std::size_t>(g.num_vertices()), 0);
  int width = 0;
  for (int u : order) eliminate(g, gone, u, &width);
  return width;
}

int treewidth_exact(const UGraph& g) {
  const int n = g.num_vertices();
  if (n == 0) return 0;
  if (n > 22) throw std::invalid_argument("treewidth_exact: too many vertices");
  std::vector<std::uint32_t> adj(static_cast<std::size_t>(n), 0);
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v)
      if (g.has_edge(u, v)) adj[static_cast<std::size_t>(u)] |= 1u << v;

  // Q(S, v): neighbors of the component of v in G[S + v], outside S + v.
  auto elim_degree = [&](std::uint32_t s, int v) {
    std::uint32_t comp = 1u << v;
    std::uint32_t frontier = comp;
    std::uint32_t reach = adj[static_cast<std::size_t>(v)];
    while (true) {
      std::uint32_t grow = reach & s & ~comp;
      if (!grow) break;
      comp |= grow;
      frontier = grow;
      std::uint32_t acc = 0;
      while (frontier) {
        int w = std::countr_zero(frontier);
        frontier &= frontier - 1;
        acc |= adj[static_cast<std::size_t>(w)];
      }
      reach |= acc;
    }
    return std::popcount(reach & ~s & ~(1u << v));
  };

  const std::uint32_t full = n == 32 ? ~0u : (1u << n) - 1;
  std::vector<std::int8_t> f(static_cast<std::size_t>(full) + 1, 0);
  // subsets in increasing popcount order is implied by numeric order here
  // only for the recurrence f(S) = min_v max(f(S\v), deg): S\v < S numerically.
  for (std::uint32_t s = 1; s <= full; ++s) {
    int best = n;
    std::uint32_t rest = s;
    while (rest) {
      int v = std::countr_zero(rest);
      rest &= rest - 1;
      std::uint32_t prev = s & ~(1u << v);
      int cand = std::max(static_cast<int>(f[prev]), elim_degree(prev, v));
      best = std::min(best, cand);
    }
    f[s] = static_cast<std::int8_t>(best);
  }
  return f[full];
}

int treewidth_brute_force(const UGraph& g) {
  const int n = g.num_vertices();
  if (n > 8) throw std::invalid_argument("treewidth_brute_force: n too large");
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  int best = n;
  do {
    UGraph h = g;
    std::vector<char> gone(static_cast<std::size_t>(n), 0);
    int width = 0;
    for (int u : perm) {
      eliminate(h, gone, u, &width);
      if (width >= best) break;
    }
    best = std::min(best, width);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

std::vector<std::vector<int>> connected_components(const UGraph& g) {
  const int n = g.num_vertices();
  std::vector<int> comp(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> out;
  for (int s = 0; s < n; ++s) {
    if (comp[static_cast<std::size_t>(s)] >= 0) continue;
    std::vector<int> stack = {s};
    comp[static_cast<std::size_t>(s)] = static_cast<int>(out.size());
    std::vector<int> verts;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      verts.push_back(u);
      for (int v = 0; v < n; ++v)
        if (g.has_edge(u, v) && comp[static_cast<std::size_t>(v)] < 0) {
          comp[static_cast<std::size_t>(v)] = static_cast<int>(out.size());
          stack.push_back(v);
        }
    }
    std::sort(verts.begin(), verts.end());
    out.push_back(std::move(verts));
  }
  return out;
}

namespace {

struct BicompState {
  const UGraph* g;
  std::vector<int> disc, low;
  std::vector<std::pair<int, int>> edge_stack;
  std::vector<std::vector<int>> comps;
  int timer = 0;

  void pop_component(std::pair<int, int> until) {
    std::vector<int> verts;
    for (;;) {
      auto e = edge_stack.back();
      edge_stack.pop_back();
      verts.push_back(e.first);
      verts.push_back(e.second);
      if (e == until) break;
    }
    std::sort(verts.begin(), verts.end());
    verts.erase(std::unique(verts.begin(), verts.end()), verts.end());
    comps.push_back(std::move(verts));
  }

  void dfs(int u, int parent) {
    disc[static_cast<std::size_t>(u)] = low[static_cast<std::size_t>(u)] = timer++;
    for (int v = 0; v < g->num_vertices(); ++v) {
      if (!g->has_edge(u, v)) continue;
      if (disc[static_cast<std::size_t>(v)] < 0) {
        edge_stack.push_back({u, v});
        dfs(v, u);
        low[static_cast<std::size_t>(u)] =
            std::min(low[static_cast<std::size_t>(u)], low[static_cast<std::size_t>(v)]);
        if (low[static_cast<std::size_t>(v)] >= disc[static_cast<std::size_t>(u)])
          pop_component({u, v});
      } else if (v != parent && disc[static_cast<std::size_t>(v)] < disc[static_cast<std::size_t>(u)]) {
        edge_stack.push_back({u, v});
        low[static_cast<std::size_t>(u)] =
            std::min(low[static_cast<std::size_t>(u)], disc[static_cast<std::size_t>(v)]);
      }
    }
  }
};

}  // namespace

std::vector<std::vector<int>> biconnected_components(const UGraph& g) {
  const int n = g.num_vertices();
  BicompState st;
  st.g = &g;
  st.disc.assign(static_cast<std::size_t>(n), -1);
  st.low.assign(static_cast<std::size_t>(n), -1);
  for (int s = 0; s < n; ++s) {
    if (st.disc[static_cast<std::size_t>(s)] >= 0) continue;
    st.dfs(s, -1);
    if (g.degree(s) == 0) st.comps.push_back({s});
  }
  return st.comps;
}

namespace {

// Extends an induced path s, v1, ..., last (all > s except s itself, no
// chords); closes a cycle when the next vertex is adjacent to s.
void extend_chordless(const UGraph& g, std::vector<int>& path, int max_len,
                      std::vector<std::vector<int>>& out) {
  const int s = path.front();
  const int last = path.back();
  for (int w = s + 1; w < g.num_vertices(); ++w) {
    if (!g.has_edge(last, w)) continue;
    if (std::find(path.begin(), path.end(), w) != path.end()) continue;
    bool chord = false;
    for (std::size_t i = 1; i + 1 < path.size(); ++i)
      if (g.has_edge(path[i], w)) {
        chord = true;
        break;
      }
    if (chord) continue;
    if (g.has_edge(s, w)) {
      // closing edge; reflection canonical form needs w > path[1]
      if (path.size() >= 2 && w > path[1]) {
        std::vector<int> cycle = path;
        cycle.push_back(w);
        out.push_back(std::move(cycle));
      }
      continue;  // any extension past w would leave a chord (s, w)
    }
    if (static_cast<int>(path.size()) + 1 >= max_len) continue;
    path.push_back(w);
    extend_chordless(g, path, max_len, out);
    path.pop_back();
  }
}

}  // namespace

std::vector<std::vector<int>> chordless_cycles(const UGraph& g, int max_len) {
  std::vector<std::vector<int>> out;
  if (max_len < 3) return out;
  for (int s = 0; s < g.num_vertices(); ++s)
    for (int v1 = s + 1; v1 < g.num_vertices(); ++v1) {
      if (!g.has_edge(s, v1)) continue;
      std::vector<int> path = {s, v1};
      extend_chordless(g, path, max_len, out);
    }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace rgbp
