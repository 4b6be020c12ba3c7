#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "rgbp/factor_graph.hpp"

namespace rgbp {

/// A set of variables plus a subset of the factors whose scopes lie inside
/// that set. Identity is the (vars, factors) pair; the graph never stores
/// two regions with the same identity.
struct Region {
  std::vector<VarId> vars;        // sorted
  std::vector<FactorId> factors;  // sorted

  bool operator==(const Region&) const = default;
};

/// Lexicographic (vars, factors) order; the canonical tie-break everywhere.
bool region_less(const Region& a, const Region& b);
bool is_subregion(const Region& a, const Region& b);  // a contained in b
std::string region_label(const Region& r);            // "0 1 4 5" style

/// Throws unless vars are sorted/unique/nonempty, factor ids exist and every
/// factor scope is contained in vars.
void validate_region(const Region& r, const FactorGraph& fg);

/// Directed acyclic graph over regions with parent->child edges and integer
/// counting numbers c_r = 1 - sum of ancestors' c. Value type; mutations
/// invalidate counting numbers until recompute_counting() runs (every
/// public construction/transform in this library leaves them fresh).
class RegionGraph {
 public:
  int add_region(Region r);             // throws on duplicate or empty vars
  /// Skips the duplicate check; used by transforms that hold copies
  /// transiently. Stored graphs handed to callers never contain copies.
  int add_region_unchecked(Region r);
  /// Places the region at an explicit id (deserialization keeps file ids
  /// stable); gaps below become dead slots.
  void add_region_with_id(int id, Region r);
  void remove_region(int id);           // detaches all edges
  void add_edge(int parent, int child); // child must be a subregion of parent
  void remove_edge(int parent, int child);
  bool has_edge(int parent, int child) const;

  bool alive(int id) const;
  int num_regions() const { return alive_count_; }
  std::vector<int> ids() const;  // alive ids, ascending
  const Region& region(int id) const;
  const std::vector<int>& parents(int id) const;
  const std::vector<int>& children(int id) const;
  long long counting(int id) const;

  int find_region(const Region& r) const;  // -1 when absent
  std::vector<int> ancestors(int id) const;
  std::vector<int> descendants(int id) const;
  bool is_outer(int id) const { return parents(id).empty(); }

  /// Recomputes every counting number in topological order; throws
  /// std::runtime_error("cycle detected") when the edge set is cyclic.
  void recompute_counting();

 private:
  struct Node {
    Region region;
    std::vector<int> parents, children;
    bool alive = false;
  };
  void check_id(int id) const;

  std::vector<Node> nodes_;
  std::vector<long long> counting_;
  int alive_count_ = 0;
};

/// Counting numbers of an acyclic graph, keyed by region id; does not
/// mutate rg. Throws std::runtime_error("cycle detected") on cycles.
std::map<int, long long> compute_counting_numbers(const RegionGraph& rg);

struct ValidityReport {
  bool c1_ok = true;
  bool c2_ok = true;
  std::vector<std::string> violations;
  bool ok() const { return c1_ok && c2_ok; }
};

/// C1: for each variable and factor, the induced subgraph of regions
/// containing it is weakly connected. C2: its counting numbers sum to 1
/// (exact integer arithmetic). Also reports factors of fg not covered by
/// any region.
ValidityReport check_validity(const RegionGraph& rg, const FactorGraph& fg);

struct ExtendabilityReport {
  bool extendable = true;
  int witness_var = -1;     // set when some RG(i) has != 1 leaf
  int witness_factor = -1;  // set when some RG(a) has != 1 leaf
};

/// True iff every RG(i) and RG(a) has exactly one leaf, so any new outer
/// region can be added while preserving validity.
ExtendabilityReport is_extendable(const RegionGraph& rg, const FactorGraph& fg);

/// Two-layer base approximation: one outer region per factor (scope plus
/// that factor), one inner region per variable, edges from factor regions
/// to the variable regions they contain. GBP on it is ordinary BP.
RegionGraph bethe_region_graph(const FactorGraph& fg);

/// Existing regions contained in `candidate` that are maximal under
/// containment among such regions. Throws if candidate is already present.
std::vector<int> direct_subregions(const RegionGraph& rg, const Region& candidate);

/// Inserts `candidate` as a new outer region connected to all its direct
/// subregions and recomputes counting numbers. Requires an extendable base
/// and that the candidate's factors are already placed somewhere in rg.
/// Validity of the result is verified; extendability is not guaranteed and
/// should be re-checked by the caller when it matters.
RegionGraph add_outer_region(const RegionGraph& rg, const FactorGraph& fg,
                             const Region& candidate);

/// Plain-text serialization: "R <id> vars: ... factors: ..." lines, then
/// "E <parent> <child>" lines, then "C <id> <counting>" lines. Counting
/// lines are optional on input and always recomputed.
void write_region_graph(const RegionGraph& rg, std::ostream& os);
std::string region_graph_to_text(const RegionGraph& rg);
RegionGraph read_region_graph(std::istream& is);
RegionGraph region_graph_from_text(const std::string& text);

}  // namespace rgbp
