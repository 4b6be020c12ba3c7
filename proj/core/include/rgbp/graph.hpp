#pragma once

#include <utility>
#include <vector>

namespace rgbp {

/// Small undirected simple graph with adjacency-matrix storage; vertices are
/// 0..n-1. Used for interaction graphs, elimination orderings and treewidth.
class UGraph {
 public:
  explicit UGraph(int n) : n_(n), adj_(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0) {}

  int num_vertices() const { return n_; }
  void add_edge(int u, int v) {
    if (u == v) return;
    at(u, v) = at(v, u) = 1;
  }
  bool has_edge(int u, int v) const { return at(u, v) != 0; }
  std::vector<int> neighbors(int u) const;
  int degree(int u) const;

 private:
  char& at(int u, int v) { return adj_[static_cast<std::size_t>(u) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(v)]; }
  char at(int u, int v) const { return adj_[static_cast<std::size_t>(u) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(v)]; }

  int n_;
  std::vector<char> adj_;
};

/// Greedy min-fill elimination ordering; ties broken by lowest vertex id.
/// Returns the ordering and the induced width (max neighbor count at
/// elimination time).
std::pair<std::vector<int>, int> min_fill_order(UGraph g);

/// Induced width of a caller-supplied elimination ordering.
int induced_width(UGraph g, const std::vector<int>& order);

/// Exact treewidth by dynamic programming over vertex subsets
/// (Bodlaender et al.); requires n <= 22 or so in principle, intended for
/// n <= 14 here.
int treewidth_exact(const UGraph& g);

/// Exhaustive check over all n! elimination orders; test oracle, n <= 8.
int treewidth_brute_force(const UGraph& g);

std::vector<std::vector<int>> connected_components(const UGraph& g);

/// Biconnected components as vertex sets (bridges appear as 2-vertex sets);
/// isolated vertices are returned as singleton sets.
std::vector<std::vector<int>> biconnected_components(const UGraph& g);

/// All chordless cycles of length 3..max_len, canonicalized so the smallest
/// vertex comes first, followed by its smaller cycle-neighbor. The result is
/// sorted lexicographically.
std::vector<std::vector<int>> chordless_cycles(const UGraph& g, int max_len);

}  // namespace rgbp
