#include "rgbp/uai.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "rgbp/table.hpp"

namespace rgbp {

namespace {

std::string fmt17(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

long read_count(std::istream& is, const char* what) {
  long x;
  if (!(is >> x) || x < 0) throw std::runtime_error(std::string("uai: bad ") + what);
  return x;
}

}  // namespace

void write_uai(const FactorGraph& fg, std::ostream& os) {
  os << "MARKOV\n" << fg.num_vars() << "\n";
  for (int i = 0; i < fg.num_vars(); ++i) os << fg.card(i) << (i + 1 < fg.num_vars() ? " " : "\n");
  os << fg.num_factors() << "\n";
  for (const Factor& f : fg.factors()) {
    os << f.scope.size();
    for (VarId v : f.scope) os << " " << v;
    os << "\n";
  }
  os << "\n";
  for (const Factor& f : fg.factors()) {
    auto lin = f.linear_table();
    os << lin.size() << "\n";
    for (std::size_t i = 0; i < lin.size(); ++i)
      os << fmt17(lin[i]) << (i + 1 < lin.size() ? " " : "\n");
    os << "\n";
  }
}

void write_uai_file(const FactorGraph& fg, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  write_uai(fg, os);
  if (!os) throw std::runtime_error("write failed: " + path);
}

FactorGraph read_uai(std::istream& is) {
  std::string header;
  if (!(is >> header)) throw std::runtime_error("uai: empty input");
  if (header != "MARKOV") throw std::runtime_error("uai: expected MARKOV header");
  long n_vars = read_count(is, "variable count");
  std::vector<int> cards(static_cast<std::size_t>(n_vars));
  for (auto& c : cards) c = static_cast<int>(read_count(is, "cardinality"));
  long n_factors = read_count(is, "factor count");
  std::vector<std::vector<int>> scopes(static_cast<std::size_t>(n_factors));
  for (auto& scope : scopes) {
    long k = read_count(is, "scope size");
    scope.resize(static_cast<std::size_t>(k));
    for (auto& v : scope) {
      v = static_cast<int>(read_count(is, "scope entry"));
      if (v >= n_vars) throw std::runtime_error("uai: scope references unknown variable");
    }
  }
  std::vector<std::pair<std::vector<VarId>, std::vector<double>>> factors;
  factors.reserve(scopes.size());
  for (auto& scope : scopes) {
    long m = read_count(is, "table size");
    std::vector<double> values(static_cast<std::size_t>(m));
    for (auto& x : values)
      if (!(is >> x)) throw std::runtime_error("uai: bad table entry");
    std::vector<int> fcards(scope.size());
    std::size_t expected = 1;
    for (std::size_t i = 0; i < scope.size(); ++i) {
      fcards[i] = cards[static_cast<std::size_t>(scope[i])];
      expected *= static_cast<std::size_t>(fcards[i]);
    }
    if (values.size() != expected) throw std::runtime_error("uai: size mismatch");
    sort_scope_and_table(scope, fcards, values);
    factors.push_back({std::move(scope), std::move(values)});
  }
  return build_factor_graph(std::move(cards), factors);
}

FactorGraph read_uai_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  return read_uai(is);
}

}  // namespace rgbp
