#pragma once

#include <span>
#include <vector>

namespace rgbp {

/// Dense table over a sorted set of discrete variables, stored in the log
/// domain. Layout is row-major with the last scope variable fastest.
struct LogTable {
  std::vector<int> scope;  // sorted variable ids
  std::vector<int> cards;  // cardinality per scope entry
  std::vector<double> v;   // log values

  std::size_t size() const { return v.size(); }
};

double log_add(double a, double b);

/// All-zeros (log of all-ones) table over `scope`; `cards` matched per entry.
LogTable make_log_table(std::vector<int> scope, std::vector<int> cards);

/// big.v += values embedded along `scope`, which must be a subset of
/// big.scope. Used both for factor potentials and for messages.
void add_embedded(LogTable& big, std::span<const int> scope,
                  std::span<const double> values);

/// Log-sum-exp marginal onto `onto` (a sorted subset of t.scope; may be
/// empty, leaving a scalar table).
LogTable lse_marginal(const LogTable& t, std::span<const int> onto);

/// log of the sum of exp over all entries.
double lse_total(const LogTable& t);

/// Shift so the table sums to one; returns the shift (the log normalizer).
double normalize_lse(LogTable& t);

/// exp of a normalized log table.
std::vector<double> probabilities(const LogTable& t);

/// -sum p log p over a normalized log table, with 0 log 0 = 0.
double entropy(const LogTable& normalized);

/// sum_x p(x) w(x) over a normalized log table and an aligned weight array;
/// entries with p = 0 contribute 0 even when w is -inf.
double expectation(const LogTable& normalized, std::span<const double> w);

/// Reorders a row-major table given over `scope` (possibly unsorted) into
/// the canonical sorted-scope layout. Throws on duplicate variables.
void sort_scope_and_table(std::vector<int>& scope, std::vector<int>& cards,
                          std::vector<double>& values);

}  // namespace rgbp
