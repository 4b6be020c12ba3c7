#pragma once

#include <vector>

#include "rgbp/region_graph.hpp"

namespace rgbp {

/// Split instruction for an outer region: alpha1/alpha2/beta partition the
/// target's variables and factors, beta separating alpha1 from alpha2 in the
/// target's interaction graph. beta may be empty (disjoint split).
struct SplitSpec {
  int target = -1;
  Region alpha1, alpha2, beta;  // beta.vars may be empty
};

/// Adds an edge from a region to a strict non-child descendant. Counting
/// numbers (and hence the free energy) are unchanged.
RegionGraph link_birth(const RegionGraph& rg, int ancestor, int descendant);

/// Replaces the outer target with r_{alpha1+beta} and r_{alpha2+beta} over a
/// new shared child r_beta. Copies produced in the process are merged when
/// the merge preconditions hold; otherwise the split is rejected.
RegionGraph split(const RegionGraph& rg, const FactorGraph& fg, const SplitSpec& spec);

/// Collapses two identical regions where r1 is a parent of r2 and
/// Dec(r1) - {r2} is contained in Dec(r2).
RegionGraph merge(const RegionGraph& rg, int r1, int r2);

/// Removes a region with counting number zero, connecting its parents to
/// its children. No surviving counting number changes.
RegionGraph death(const RegionGraph& rg, int r);

/// Repeatedly removes variables of interaction-graph degree <= 1 (and the
/// factors mentioning them). The result may be empty ("fully tree-like").
Region strip_pendant_trees(const Region& candidate, const FactorGraph& fg);

/// Pendant stripping, then connected components, then recursive splitting at
/// articulation vertices into biconnected pieces. Unary factors sitting on a
/// cut vertex go to the canonically first piece containing them.
std::vector<Region> decompose_weakly_irreducible(const Region& candidate,
                                                 const FactorGraph& fg);

struct WidthResult {
  int width = 0;
  bool exact = true;  // false -> min-fill upper bound
};

/// Treewidth of the graph on the candidate's variables where each factor
/// scope and each child scope forms a clique. Exact (subset DP) up to 14
/// variables, min-fill upper bound beyond.
WidthResult region_width(const Region& candidate, const FactorGraph& fg,
                         const std::vector<std::vector<VarId>>& child_scopes);

}  // namespace rgbp
