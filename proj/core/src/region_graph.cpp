#include "rgbp/region_graph.hpp"

#include <cstdint>
#include <bit>
#include <algorithm>
#include <deque>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace rgbp {

bool region_less(const Region& a, const Region& b) {
  if (a.vars != b.vars) return a.vars < b.vars;
  return a.factors < b.factors;
}

bool is_subregion(const Region& a, const Region& b) {
  return std::includes(b.vars.begin(), b.vars.end(), a.vars.begin(), a.vars.end()) &&
         std::includes(b.factors.begin(), b.factors.end(), a.factors.begin(),
                       a.factors.end());
}

std::string region_label(const Region& r) {
  std::string s;
  for (std::size_t i = 0; i < r.vars.size(); ++i) {
    if (i) s += ' ';
    s += std::to_string(r.vars[i]);
  }
  return s;
}

void validate_region(const Region& r, const FactorGraph& fg) {
  if (r.vars.empty()) throw std::invalid_argument("region has no variables");
  if (!std::is_sorted(r.vars.begin(), r.vars.end()) ||
      std::adjacent_find(r.vars.begin(), r.vars.end()) != r.vars.end())
    throw std::invalid_argument("region variables must be sorted and unique");
  for (VarId v : r.vars)
    if (v < 0 || v >= fg.num_vars()) throw std::invalid_argument("region references unknown variable");
  if (!std::is_sorted(r.factors.begin(), r.factors.end()) ||
      std::adjacent_find(r.factors.begin(), r.factors.end()) != r.factors.end())
    throw std::invalid_argument("region factors must be sorted and unique");
  for (FactorId a : r.factors) {
    if (a < 0 || a >= fg.num_factors()) throw std::invalid_argument("region references unknown factor");
    const auto& scope = fg.factor(a).scope;
    if (!std::includes(r.vars.begin(), r.vars.end(), scope.begin(), scope.end()))
      throw std::invalid_argument("factor scope escapes region variables");
  }
}

void RegionGraph::check_id(int id) const {
  if (id < 0 || id >= static_cast<int>(nodes_.size()) || !nodes_[static_cast<std::size_t>(id)].alive)
    throw std::invalid_argument("unknown region id " + std::to_string(id));
}

bool RegionGraph::alive(int id) const {
  return id >= 0 && id < static_cast<int>(nodes_.size()) && nodes_[static_cast<std::size_t>(id)].alive;
}

int RegionGraph::add_region(Region r) {
  if (find_region(r) >= 0) throw std::invalid_argument("duplicate region");
  return add_region_unchecked(std::move(r));
}

int RegionGraph::add_region_unchecked(Region r) {
  if (r.vars.empty()) throw std::invalid_argument("region has no variables");
  Node n;
  n.region = std::move(r);
  n.alive = true;
  nodes_.push_back(std::move(n));
  counting_.push_back(0);
  ++alive_count_;
  return static_cast<int>(nodes_.size()) - 1;
}

void RegionGraph::add_region_with_id(int id, Region r) {
  if (id < 0) throw std::invalid_argument("region id must be nonnegative");
  if (r.vars.empty()) throw std::invalid_argument("region has no variables");
  if (find_region(r) >= 0) throw std::invalid_argument("duplicate region");
  if (alive(id)) throw std::invalid_argument("region id already in use");
  while (static_cast<int>(nodes_.size()) <= id) {
    nodes_.push_back({});
    counting_.push_back(0);
  }
  nodes_[static_cast<std::size_t>(id)].region = std::move(r);
  nodes_[static_cast<std::size_t>(id)].alive = true;
  ++alive_count_;
}

void RegionGraph::remove_region(int id) {
  check_id(id);
  Node& n = nodes_[static_cast<std::size_t>(id)];
  for (int p : n.parents) {
    auto& ch = nodes_[static_cast<std::size_t>(p)].children;
    ch.erase(std::remove(ch.begin(), ch.end(), id), ch.end());
  }
  for (int c : n.children) {
    auto& pa = nodes_[static_cast<std::size_t>(c)].parents;
    pa.erase(std::remove(pa.begin(), pa.end(), id), pa.end());
  }
  n.parents.clear();
  n.children.clear();
  n.alive = false;
  --alive_count_;
}

void RegionGraph::add_edge(int parent, int child) {
  check_id(parent);
  check_id(child);
  if (parent == child) throw std::invalid_argument("self edge");
  if (has_edge(parent, child)) throw std::invalid_argument("edge exists");
  if (!is_subregion(region(child), region(parent)))
    throw std::invalid_argument("child is not a subregion of parent");
  nodes_[static_cast<std::size_t>(parent)].children.push_back(child);
  nodes_[static_cast<std::size_t>(child)].parents.push_back(parent);
  std::sort(nodes_[static_cast<std::size_t>(parent)].children.begin(),
            nodes_[static_cast<std::size_t>(parent)].children.end());
  std::sort(nodes_[static_cast<std::size_t>(child)].parents.begin(),
            nodes_[static_cast<std::size_t>(child)].parents.end());
}

void RegionGraph::remove_edge(int parent, int child) {
  check_id(parent);
  check_id(child);
  auto& ch = nodes_[static_cast<std::size_t>(parent)].children;
  auto it = std::find(ch.begin(), ch.end(), child);
  if (it == ch.end()) throw std::invalid_argument("no such edge");
  ch.erase(it);
  auto& pa = nodes_[static_cast<std::size_t>(child)].parents;
  pa.erase(std::find(pa.begin(), pa.end(), parent));
}

bool RegionGraph::has_edge(int parent, int child) const {
  check_id(parent);
  check_id(child);
  const auto& ch = nodes_[static_cast<std::size_t>(parent)].children;
  return std::binary_search(ch.begin(), ch.end(), child);
}

std::vector<int> RegionGraph::ids() const {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(alive_count_));
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i)
    if (nodes_[static_cast<std::size_t>(i)].alive) out.push_back(i);
  return out;
}

const Region& RegionGraph::region(int id) const {
  check_id(id);
  return nodes_[static_cast<std::size_t>(id)].region;
}

const std::vector<int>& RegionGraph::parents(int id) const {
  check_id(id);
  return nodes_[static_cast<std::size_t>(id)].parents;
}

const std::vector<int>& RegionGraph::children(int id) const {
  check_id(id);
  return nodes_[static_cast<std::size_t>(id)].children;
}

long long RegionGraph::counting(int id) const {
  check_id(id);
  return counting_[static_cast<std::size_t>(id)];
}

int RegionGraph::find_region(const Region& r) const {
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i)
    if (nodes_[static_cast<std::size_t>(i)].alive && nodes_[static_cast<std::size_t>(i)].region == r)
      return i;
  return -1;
}

std::vector<int> RegionGraph::ancestors(int id) const {
  check_id(id);
  std::vector<char> seen(nodes_.size(), 0);
  std::deque<int> queue(parents(id).begin(), parents(id).end());
  std::vector<int> out;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    if (seen[static_cast<std::size_t>(u)]) continue;
    seen[static_cast<std::size_t>(u)] = 1;
    out.push_back(u);
    for (int p : parents(u)) queue.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> RegionGraph::descendants(int id) const {
  check_id(id);
  std::vector<char> seen(nodes_.size(), 0);
  std::deque<int> queue(children(id).begin(), children(id).end());
  std::vector<int> out;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    if (seen[static_cast<std::size_t>(u)]) continue;
    seen[static_cast<std::size_t>(u)] = 1;
    out.push_back(u);
    for (int c : children(u)) queue.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void RegionGraph::recompute_counting() {
  // Kahn topological order over alive nodes.
  std::vector<int> indeg(nodes_.size(), 0);
  std::deque<int> ready;
  int n_alive = 0;
  for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
    if (!nodes_[static_cast<std::size_t>(i)].alive) continue;
    ++n_alive;
    indeg[static_cast<std::size_t>(i)] = static_cast<int>(parents(i).size());
    if (indeg[static_cast<std::size_t>(i)] == 0) ready.push_back(i);
  }
  std::vector<int> topo;
  topo.reserve(static_cast<std::size_t>(n_alive));
  while (!ready.empty()) {
    int u = ready.front();
    ready.pop_front();
    topo.push_back(u);
    for (int c : children(u))
      if (--indeg[static_cast<std::size_t>(c)] == 0) ready.push_back(c);
  }
  if (static_cast<int>(topo.size()) != n_alive) throw std::runtime_error("cycle detected");

  // Ancestor sets as bitsets, built top-down.
  const std::size_t words = (nodes_.size() + 63) / 64;
  std::vector<std::uint64_t> anc(nodes_.size() * words, 0);
  auto row = [&](int id) { return anc.begin() + static_cast<long>(id) * static_cast<long>(words); };
  for (int u : topo) {
    auto ru = row(u);
    for (int p : parents(u)) {
      auto rp = row(p);
      for (std::size_t w = 0; w < words; ++w) ru[static_cast<long>(w)] |= rp[static_cast<long>(w)];
      ru[p / 64] |= 1ull << (p % 64);
    }
    long long c = 1;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t bits = ru[static_cast<long>(w)];
      while (bits) {
        int b = std::countr_zero(bits);
        bits &= bits - 1;
        c -= counting_[w * 64 + static_cast<std::size_t>(b)];
      }
    }
    counting_[static_cast<std::size_t>(u)] = c;
  }
}

std::map<int, long long> compute_counting_numbers(const RegionGraph& rg) {
  RegionGraph copy = rg;
  copy.recompute_counting();
  std::map<int, long long> out;
  for (int id : copy.ids()) out[id] = copy.counting(id);
  return out;
}

ValidityReport check_validity(const RegionGraph& rg, const FactorGraph& fg) {
  ValidityReport rep;
  auto ids = rg.ids();

  auto check_group = [&](const std::vector<int>& group, const std::string& what) {
    if (group.empty()) {
      rep.c2_ok = false;
      rep.violations.push_back(what + " is not covered by any region");
      return;
    }
    long long total = 0;
    for (int id : group) total += rg.counting(id);
    if (total != 1) {
      rep.c2_ok = false;
      rep.violations.push_back("counting numbers of " + what + " sum to " +
                               std::to_string(total));
    }
    // weak connectivity of the induced subgraph
    std::map<int, int> pos;
    for (std::size_t i = 0; i < group.size(); ++i) pos[group[i]] = static_cast<int>(i);
    std::vector<char> seen(group.size(), 0);
    std::deque<int> queue = {group[0]};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
      int u = queue.front();
      queue.pop_front();
      auto visit = [&](int v) {
        auto it = pos.find(v);
        if (it != pos.end() && !seen[static_cast<std::size_t>(it->second)]) {
          seen[static_cast<std::size_t>(it->second)] = 1;
          ++reached;
          queue.push_back(v);
        }
      };
      for (int p : rg.parents(u)) visit(p);
      for (int c : rg.children(u)) visit(c);
    }
    if (reached != group.size()) {
      rep.c1_ok = false;
      rep.violations.push_back("regions containing " + what + " are disconnected");
    }
  };

  for (int i = 0; i < fg.num_vars(); ++i) {
    std::vector<int> group;
    for (int id : ids) {
      const auto& vars = rg.region(id).vars;
      if (std::binary_search(vars.begin(), vars.end(), i)) group.push_back(id);
    }
    check_group(group, "variable " + std::to_string(i));
  }
  for (int a = 0; a < fg.num_factors(); ++a) {
    std::vector<int> group;
    for (int id : ids) {
      const auto& fs = rg.region(id).factors;
      if (std::binary_search(fs.begin(), fs.end(), a)) group.push_back(id);
    }
    check_group(group, "factor " + std::to_string(a));
  }
  return rep;
}

ExtendabilityReport is_extendable(const RegionGraph& rg, const FactorGraph& fg) {
  ExtendabilityReport rep;
  auto ids = rg.ids();

  auto leaf_count = [&](const std::vector<int>& group) {
    int leaves = 0;
    for (int id : group) {
      bool has_out = false;
      for (int c : rg.children(id))
        if (std::find(group.begin(), group.end(), c) != group.end()) {
          has_out = true;
          break;
        }
      if (!has_out) ++leaves;
    }
    return leaves;
  };

  for (int i = 0; i < fg.num_vars(); ++i) {
    std::vector<int> group;
    for (int id : ids) {
      const auto& vars = rg.region(id).vars;
      if (std::binary_search(vars.begin(), vars.end(), i)) group.push_back(id);
    }
    if (leaf_count(group) != 1) {
      rep.extendable = false;
      rep.witness_var = i;
      return rep;
    }
  }
  for (int a = 0; a < fg.num_factors(); ++a) {
    std::vector<int> group;
    for (int id : ids) {
      const auto& fs = rg.region(id).factors;
      if (std::binary_search(fs.begin(), fs.end(), a)) group.push_back(id);
    }
    if (leaf_count(group) != 1) {
      rep.extendable = false;
      rep.witness_factor = a;
      return rep;
    }
  }
  return rep;
}

RegionGraph bethe_region_graph(const FactorGraph& fg) {
  RegionGraph rg;
  std::vector<int> var_region(static_cast<std::size_t>(fg.num_vars()));
  for (int i = 0; i < fg.num_vars(); ++i)
    var_region[static_cast<std::size_t>(i)] = rg.add_region({{i}, {}});
  for (const Factor& f : fg.factors()) {
    int outer = rg.add_region({f.scope, {f.id}});
    for (VarId v : f.scope) rg.add_edge(outer, var_region[static_cast<std::size_t>(v)]);
  }
  rg.recompute_counting();
  return rg;
}

std::vector<int> direct_subregions(const RegionGraph& rg, const Region& candidate) {
  if (rg.find_region(candidate) >= 0) throw std::invalid_argument("duplicate region");
  std::vector<int> subs;
  for (int id : rg.ids())
    if (is_subregion(rg.region(id), candidate)) subs.push_back(id);
  std::vector<int> maximal;
  for (int id : subs) {
    bool dominated = false;
    for (int other : subs) {
      if (other == id) continue;
      if (is_subregion(rg.region(id), rg.region(other)) &&
          !(rg.region(id) == rg.region(other))) {
        dominated = true;
        break;
      }
    }
    if (!dominated) maximal.push_back(id);
  }
  return maximal;
}

RegionGraph add_outer_region(const RegionGraph& rg, const FactorGraph& fg,
                             const Region& candidate) {
  validate_region(candidate, fg);
  auto ext = is_extendable(rg, fg);
  if (!ext.extendable) throw std::invalid_argument("base region graph is not extendable");

  std::vector<char> placed(static_cast<std::size_t>(fg.num_factors()), 0);
  for (int id : rg.ids())
    for (FactorId a : rg.region(id).factors) placed[static_cast<std::size_t>(a)] = 1;
  for (FactorId a : candidate.factors)
    if (!placed[static_cast<std::size_t>(a)])
      throw std::invalid_argument("candidate factor not placed in base graph");

  auto subs = direct_subregions(rg, candidate);  // throws on duplicates
  RegionGraph out = rg;
  int id = out.add_region(candidate);
  for (int s : subs) out.add_edge(id, s);
  out.recompute_counting();
  auto rep = check_validity(out, fg);
  if (!rep.ok())
    throw std::logic_error("add_outer_region produced an invalid region graph: " +
                           (rep.violations.empty() ? std::string("?") : rep.violations.front()));
  return out;
}

void write_region_graph(const RegionGraph& rg, std::ostream& os) {
  for (int id : rg.ids()) {
    const Region& r = rg.region(id);
    os << "R " << id << " vars:";
    for (VarId v : r.vars) os << " " << v;
    os << " factors:";
    for (FactorId a : r.factors) os << " " << a;
    os << "\n";
  }
  for (int id : rg.ids())
    for (int c : rg.children(id)) os << "E " << id << " " << c << "\n";
  for (int id : rg.ids()) os << "C " << id << " " << rg.counting(id) << "\n";
}

std::string region_graph_to_text(const RegionGraph& rg) {
  std::ostringstream os;
  write_region_graph(rg, os);
  return os.str();
}

RegionGraph read_region_graph(std::istream& is) {
  struct Parsed {
    int id;
    Region region;
  };
  std::vector<Parsed> regions;
  std::vector<std::pair<int, int>> edges;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string tag;
    if (!(ls >> tag) || tag[0] == '#') continue;
    if (tag == "R") {
      Parsed p;
      std::string kw;
      if (!(ls >> p.id >> kw) || kw != "vars:")
        throw std::runtime_error("region graph: bad R line: " + line);
      std::string tok;
      bool in_factors = false;
      while (ls >> tok) {
        if (tok == "factors:") {
          in_factors = true;
          continue;
        }
        int v = std::stoi(tok);
        (in_factors ? p.region.factors : p.region.vars).push_back(v);
      }
      if (!in_factors) throw std::runtime_error("region graph: missing factors: in " + line);
      regions.push_back(std::move(p));
    } else if (tag == "E") {
      int a, b;
      if (!(ls >> a >> b)) throw std::runtime_error("region graph: bad E line: " + line);
      edges.push_back({a, b});
    } else if (tag == "C") {
      // counting numbers are recomputed
    } else {
      throw std::runtime_error("region graph: unknown line tag: " + tag);
    }
  }
  RegionGraph rg;
  std::sort(regions.begin(), regions.end(),
            [](const Parsed& a, const Parsed& b) { return a.id < b.id; });
  for (auto& p : regions) {
    std::sort(p.region.vars.begin(), p.region.vars.end());
    std::sort(p.region.factors.begin(), p.region.factors.end());
    if (p.id < 0) throw std::runtime_error("region graph: negative region id");
    rg.add_region_with_id(p.id, std::move(p.region));  // file ids stay stable
  }
  for (auto [a, b] : edges) {
    if (!rg.alive(a) || !rg.alive(b))
      throw std::runtime_error("region graph: edge references unknown region");
    rg.add_edge(a, b);
  }
  rg.recompute_counting();
  return rg;
}

RegionGraph region_graph_from_text(const std::string& text) {
  std::istringstream is(text);
  return read_region_graph(is);
}

}  // namespace rgbp
