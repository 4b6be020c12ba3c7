#include "rgbp/transforms.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>

#include "rgbp/graph.hpp"

namespace rgbp {

namespace {

std::vector<int> sorted_union(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

bool disjoint(const std::vector<int>& a, const std::vector<int>& b) {
  std::vector<int> inter;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(inter));
  return inter.empty();
}

// Interaction graph over an arbitrary variable subset, vertices indexed by
// position in `vars`.
UGraph local_interaction_graph(const std::vector<VarId>& vars,
                               const std::vector<FactorId>& factor_ids,
                               const FactorGraph& fg) {
  UGraph g(static_cast<int>(vars.size()));
  auto pos = [&](VarId v) {
    return static_cast<int>(std::lower_bound(vars.begin(), vars.end(), v) - vars.begin());
  };
  for (FactorId a : factor_ids) {
    const auto& scope = fg.factor(a).scope;
    for (std::size_t i = 0; i < scope.size(); ++i)
      for (std::size_t j = i + 1; j < scope.size(); ++j)
        g.add_edge(pos(scope[i]), pos(scope[j]));
  }
  return g;
}

// Merges every pair of identical regions where the preconditions of the
// merge rule hold; complains about copies that cannot be merged.
RegionGraph resolve_copies(RegionGraph rg) {
  for (;;) {
    auto ids = rg.ids();
    int a = -1, b = -1;
    bool found_copy = false;
    for (std::size_t i = 0; i < ids.size() && a < 0; ++i)
      for (std::size_t j = i + 1; j < ids.size(); ++j)
        if (rg.region(ids[i]) == rg.region(ids[j])) {
          found_copy = true;
          int x = ids[i], y = ids[j];
          if (!rg.has_edge(x, y)) std::swap(x, y);
          if (rg.has_edge(x, y)) {
            auto dec_x = rg.descendants(x);
            auto dec_y = rg.descendants(y);
            bool ok = true;
            for (int d : dec_x)
              if (d != y && !std::binary_search(dec_y.begin(), dec_y.end(), d)) ok = false;
            if (ok) {
              a = x;
              b = y;
              break;
            }
          }
        }
    if (a < 0) {
      if (found_copy) throw std::invalid_argument("split produced an unresolvable copy");
      return rg;
    }
    rg = merge(rg, a, b);
  }
}

}  // namespace

RegionGraph link_birth(const RegionGraph& rg, int ancestor, int descendant) {
  auto dec = rg.descendants(ancestor);
  if (!std::binary_search(dec.begin(), dec.end(), descendant))
    throw std::invalid_argument("not a strict descendant");
  if (rg.has_edge(ancestor, descendant)) throw std::invalid_argument("edge exists");
  RegionGraph out = rg;
  out.add_edge(ancestor, descendant);
  out.recompute_counting();
  return out;
}

RegionGraph merge(const RegionGraph& rg, int r1, int r2) {
  if (!rg.alive(r1) || !rg.alive(r2) || r1 == r2)
    throw std::invalid_argument("merge needs two distinct regions");
  if (!(rg.region(r1) == rg.region(r2)))
    throw std::invalid_argument("regions not identical");
  if (!rg.has_edge(r1, r2)) throw std::invalid_argument("first region is not a parent of the second");
  auto dec1 = rg.descendants(r1);
  auto dec2 = rg.descendants(r2);
  for (int d : dec1)
    if (d != r2 && !std::binary_search(dec2.begin(), dec2.end(), d))
      throw std::invalid_argument("descendant condition fails");

  std::set<int> new_parents, new_children;
  for (int p : rg.parents(r1)) new_parents.insert(p);
  for (int p : rg.parents(r2)) new_parents.insert(p);
  for (int c : rg.children(r1)) new_children.insert(c);
  for (int c : rg.children(r2)) new_children.insert(c);
  new_parents.erase(r1);
  new_parents.erase(r2);
  new_children.erase(r1);
  new_children.erase(r2);

  RegionGraph out = rg;
  Region merged = rg.region(r1);
  out.remove_region(r1);
  out.remove_region(r2);
  int id = out.add_region_unchecked(std::move(merged));
  for (int p : new_parents) out.add_edge(p, id);
  for (int c : new_children) out.add_edge(id, c);
  out.recompute_counting();
  return out;
}

RegionGraph death(const RegionGraph& rg, int r) {
  if (rg.counting(r) != 0) throw std::invalid_argument("counting number is not zero");
  auto ps = rg.parents(r);
  auto cs = rg.children(r);
  RegionGraph out = rg;
  out.remove_region(r);
  for (int p : ps)
    for (int c : cs)
      if (!out.has_edge(p, c)) out.add_edge(p, c);
  out.recompute_counting();
  return out;
}

RegionGraph split(const RegionGraph& rg, const FactorGraph& fg, const SplitSpec& spec) {
  if (!rg.alive(spec.target)) throw std::invalid_argument("unknown region id");
  if (!rg.is_outer(spec.target)) throw std::invalid_argument("target is not an outer region");
  const Region& target = rg.region(spec.target);

  // alpha1 / alpha2 / beta must partition the target.
  if (!disjoint(spec.alpha1.vars, spec.alpha2.vars) ||
      !disjoint(spec.alpha1.vars, spec.beta.vars) ||
      !disjoint(spec.alpha2.vars, spec.beta.vars) ||
      sorted_union(sorted_union(spec.alpha1.vars, spec.alpha2.vars), spec.beta.vars) !=
          target.vars)
    throw std::invalid_argument("alpha1/alpha2/beta do not partition the target variables");
  if (!disjoint(spec.alpha1.factors, spec.alpha2.factors) ||
      !disjoint(spec.alpha1.factors, spec.beta.factors) ||
      !disjoint(spec.alpha2.factors, spec.beta.factors) ||
      sorted_union(sorted_union(spec.alpha1.factors, spec.alpha2.factors),
                   spec.beta.factors) != target.factors)
    throw std::invalid_argument("alpha1/alpha2/beta do not partition the target factors");
  if (spec.alpha1.vars.empty() || spec.alpha2.vars.empty())
    throw std::invalid_argument("split sides must be nonempty");

  Region a1{sorted_union(spec.alpha1.vars, spec.beta.vars),
            sorted_union(spec.alpha1.factors, spec.beta.factors)};
  Region a2{sorted_union(spec.alpha2.vars, spec.beta.vars),
            sorted_union(spec.alpha2.factors, spec.beta.factors)};
  Region b{spec.beta.vars, spec.beta.factors};

  // Factor homes must close over their side's variables.
  auto factors_fit = [&](const Region& part) {
    for (FactorId f : part.factors) {
      const auto& scope = fg.factor(f).scope;
      if (!std::includes(part.vars.begin(), part.vars.end(), scope.begin(), scope.end()))
        return false;
    }
    return true;
  };
  if (!factors_fit(a1) || !factors_fit(a2) ||
      !factors_fit(Region{b.vars.empty() ? std::vector<int>{} : b.vars, b.factors}))
    throw std::invalid_argument("factor assignment does not respect the partition");

  // beta must separate alpha1 from alpha2 in the target's interaction graph.
  UGraph ig = local_interaction_graph(target.vars, target.factors, fg);
  {
    std::vector<char> is_beta(target.vars.size(), 0);
    std::map<VarId, int> pos;
    for (std::size_t i = 0; i < target.vars.size(); ++i) pos[target.vars[i]] = static_cast<int>(i);
    for (VarId v : spec.beta.vars) is_beta[static_cast<std::size_t>(pos[v])] = 1;
    std::vector<int> side(target.vars.size(), 0);  // 1 = alpha1, 2 = alpha2
    for (VarId v : spec.alpha1.vars) side[static_cast<std::size_t>(pos[v])] = 1;
    for (VarId v : spec.alpha2.vars) side[static_cast<std::size_t>(pos[v])] = 2;
    // BFS over non-beta vertices from each alpha1 vertex
    const int n = ig.num_vertices();
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack;
    for (int s = 0; s < n; ++s)
      if (side[static_cast<std::size_t>(s)] == 1 && !seen[static_cast<std::size_t>(s)]) {
        stack.push_back(s);
        seen[static_cast<std::size_t>(s)] = 1;
        while (!stack.empty()) {
          int u = stack.back();
          stack.pop_back();
          if (side[static_cast<std::size_t>(u)] == 2)
            throw std::invalid_argument("beta does not separate alpha1 from alpha2");
          for (int v = 0; v < n; ++v)
            if (ig.has_edge(u, v) && !is_beta[static_cast<std::size_t>(v)] &&
                !seen[static_cast<std::size_t>(v)]) {
              seen[static_cast<std::size_t>(v)] = 1;
              stack.push_back(v);
            }
        }
      }
  }

  // Every child must live inside one of the two new outer regions.
  for (int c : rg.children(spec.target)) {
    const Region& child = rg.region(c);
    if (!is_subregion(child, a1) && !is_subregion(child, a2))
      throw std::invalid_argument("a child region fits in neither side of the split");
  }

  auto dec_target = rg.descendants(spec.target);
  auto old_children = rg.children(spec.target);

  RegionGraph out = rg;
  out.remove_region(spec.target);

  int id_a1 = out.add_region(a1);
  int id_a2 = out.add_region(a2);

  int id_b = -1;
  if (!b.vars.empty()) {
    // a transient copy of an existing region is allowed here; it is merged
    // away (or rejected) by resolve_copies below
    id_b = out.add_region_unchecked(b);
    out.add_edge(id_a1, id_b);
    out.add_edge(id_a2, id_b);
    // connect the new child to everything it contains inside Dec(target):
    // maximal subregions first, then direct edges to whatever is still
    // unreachable (so all of them end up descendants of r_beta).
    std::vector<int> contained;
    for (int d : dec_target)
      if (is_subregion(out.region(d), b)) contained.push_back(d);
    std::vector<int> maximal;
    for (int d : contained) {
      bool dominated = false;
      for (int e : contained)
        if (e != d && is_subregion(out.region(d), out.region(e)) &&
            !(out.region(d) == out.region(e)))
          dominated = true;
      if (!dominated) maximal.push_back(d);
    }
    for (int d : maximal) out.add_edge(id_b, d);
    for (int d : contained) {
      auto dec_b = out.descendants(id_b);
      if (!std::binary_search(dec_b.begin(), dec_b.end(), d)) out.add_edge(id_b, d);
    }
  } else if (!b.factors.empty()) {
    throw std::invalid_argument("beta factors without beta variables");
  }

  // Former children that are not under the new child region attach to the
  // side that contains them.
  for (int c : old_children) {
    bool under_b = false;
    if (id_b >= 0) {
      auto dec_b = out.descendants(id_b);
      under_b = std::binary_search(dec_b.begin(), dec_b.end(), c) || c == id_b;
    }
    if (under_b) continue;
    if (is_subregion(out.region(c), a1)) out.add_edge(id_a1, c);
    if (is_subregion(out.region(c), a2)) out.add_edge(id_a2, c);
  }

  out.recompute_counting();
  out = resolve_copies(out);

  auto rep = check_validity(out, fg);
  if (!rep.ok())
    throw std::logic_error("split produced an invalid region graph: " +
                           (rep.violations.empty() ? std::string("?") : rep.violations.front()));
  return out;
}

Region strip_pendant_trees(const Region& candidate, const FactorGraph& fg) {
  std::vector<VarId> vars = candidate.vars;
  std::vector<FactorId> factors = candidate.factors;
  for (;;) {
    if (vars.empty()) break;
    UGraph g = local_interaction_graph(vars, factors, fg);
    int victim = -1;
    for (int i = 0; i < g.num_vertices(); ++i)
      if (g.degree(i) <= 1) {
        victim = i;
        break;
      }
    if (victim < 0) break;
    VarId v = vars[static_cast<std::size_t>(victim)];
    vars.erase(vars.begin() + victim);
    std::vector<FactorId> kept;
    for (FactorId a : factors) {
      const auto& scope = fg.factor(a).scope;
      if (!std::binary_search(scope.begin(), scope.end(), v)) kept.push_back(a);
    }
    factors = std::move(kept);
  }
  return {std::move(vars), std::move(factors)};
}

std::vector<Region> decompose_weakly_irreducible(const Region& candidate,
                                                 const FactorGraph& fg) {
  std::vector<Region> result;
  std::vector<Region> work = {candidate};
  while (!work.empty()) {
    Region r = strip_pendant_trees(work.back(), fg);
    work.pop_back();
    if (r.vars.empty()) continue;

    UGraph g = local_interaction_graph(r.vars, r.factors, fg);
    auto split_into = [&](std::vector<std::vector<int>> vertex_sets) {
      // canonical order, factors assigned to the first piece that fits
      std::vector<std::vector<VarId>> var_sets;
      for (auto& vs : vertex_sets) {
        std::vector<VarId> vars;
        for (int idx : vs) vars.push_back(r.vars[static_cast<std::size_t>(idx)]);
        std::sort(vars.begin(), vars.end());
        var_sets.push_back(std::move(vars));
      }
      std::sort(var_sets.begin(), var_sets.end());
      std::vector<Region> pieces;
      for (auto& vars : var_sets) pieces.push_back({vars, {}});
      for (FactorId a : r.factors) {
        const auto& scope = fg.factor(a).scope;
        for (auto& piece : pieces)
          if (std::includes(piece.vars.begin(), piece.vars.end(), scope.begin(), scope.end())) {
            piece.factors.push_back(a);
            break;
          }
      }
      for (auto& piece : pieces) work.push_back(std::move(piece));
    };

    auto comps = connected_components(g);
    if (comps.size() > 1) {
      split_into(std::move(comps));
      continue;
    }
    auto bicomps = biconnected_components(g);
    if (bicomps.size() <= 1) {
      result.push_back(std::move(r));
    } else {
      split_into(std::move(bicomps));
    }
  }
  std::sort(result.begin(), result.end(), region_less);
  result.erase(std::unique(result.begin(), result.end()), result.end());
  return result;
}

WidthResult region_width(const Region& candidate, const FactorGraph& fg,
                         const std::vector<std::vector<VarId>>& child_scopes) {
  const auto& vars = candidate.vars;
  UGraph g = local_interaction_graph(vars, candidate.factors, fg);
  auto pos = [&](VarId v) {
    auto it = std::lower_bound(vars.begin(), vars.end(), v);
    if (it == vars.end() || *it != v)
      throw std::invalid_argument("child scope escapes candidate variables");
    return static_cast<int>(it - vars.begin());
  };
  for (const auto& scope : child_scopes)
    for (std::size_t i = 0; i < scope.size(); ++i)
      for (std::size_t j = i + 1; j < scope.size(); ++j)
        g.add_edge(pos(scope[i]), pos(scope[j]));

  WidthResult res;
  if (g.num_vertices() <= 14) {
    res.width = treewidth_exact(g);
    res.exact = true;
  } else {
    res.width = min_fill_order(g).second;
    res.exact = false;
  }
  return res;
}

}  // namespace rgbp
