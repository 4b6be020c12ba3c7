#include "rgbp/table.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace rgbp {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::size_t table_size(std::span<const int> cards) {
  std::size_t n = 1;
  for (int c : cards) n *= static_cast<std::size_t>(c);
  return n;
}

// Per-superscope-position stride into the subscope table (0 if absent).
std::vector<std::size_t> position_strides(const std::vector<int>& sup_scope,
                                          const std::vector<int>& sup_cards,
                                          std::span<const int> sub_scope,
                                          std::span<const int> sub_cards) {
  std::vector<std::size_t> strides(sup_scope.size(), 0);
  std::size_t stride = 1;
  for (int i = static_cast<int>(sub_scope.size()) - 1; i >= 0; --i) {
    auto it = std::lower_bound(sup_scope.begin(), sup_scope.end(), sub_scope[i]);
    if (it == sup_scope.end() || *it != sub_scope[i])
      throw std::logic_error("embed: scope is not a subset");
    strides[static_cast<std::size_t>(it - sup_scope.begin())] = stride;
    stride *= static_cast<std::size_t>(sub_cards[static_cast<std::size_t>(i)]);
  }
  (void)sup_cards;
  return strides;
}

// Walks all joint states of `cards` in row-major order, tracking the
// corresponding index into a sub-table via per-position strides.
template <typename F>
void odometer(std::span<const int> cards, std::span<const std::size_t> strides,
              F&& f) {
  const int k = static_cast<int>(cards.size());
  if (k == 0) {
    f(std::size_t{0}, std::size_t{0});
    return;
  }
  std::vector<int> digit(static_cast<std::size_t>(k), 0);
  std::size_t sub = 0;
  std::size_t big = 0;
  for (;;) {
    f(big, sub);
    ++big;
    int d = k - 1;
    for (;;) {
      ++digit[static_cast<std::size_t>(d)];
      sub += strides[static_cast<std::size_t>(d)];
      if (digit[static_cast<std::size_t>(d)] < cards[static_cast<std::size_t>(d)]) break;
      sub -= strides[static_cast<std::size_t>(d)] *
             static_cast<std::size_t>(cards[static_cast<std::size_t>(d)]);
      digit[static_cast<std::size_t>(d)] = 0;
      --d;
      if (d < 0) return;
    }
  }
}

}  // namespace

double log_add(double a, double b) {
  if (a == kNegInf) return b;
  if (b == kNegInf) return a;
  double m = std::max(a, b);
  return m + std::log1p(std::exp(std::min(a, b) - m));
}

LogTable make_log_table(std::vector<int> scope, std::vector<int> cards) {
  LogTable t;
  t.scope = std::move(scope);
  t.cards = std::move(cards);
  t.v.assign(table_size(t.cards), 0.0);
  return t;
}

void add_embedded(LogTable& big, std::span<const int> scope,
                  std::span<const double> values) {
  if (scope.size() == big.scope.size() &&
      std::equal(scope.begin(), scope.end(), big.scope.begin())) {
    for (std::size_t i = 0; i < big.v.size(); ++i) big.v[i] += values[i];
    return;
  }
  std::vector<int> sub_cards(scope.size());
  for (std::size_t i = 0; i < scope.size(); ++i) {
    auto it = std::lower_bound(big.scope.begin(), big.scope.end(), scope[i]);
    if (it == big.scope.end() || *it != scope[i])
      throw std::logic_error("add_embedded: scope is not a subset");
    sub_cards[i] = big.cards[static_cast<std::size_t>(it - big.scope.begin())];
  }
  auto strides = position_strides(big.scope, big.cards, scope, sub_cards);
  odometer(big.cards, strides, [&](std::size_t bi, std::size_t si) {
    big.v[bi] += values[si];
  });
}

LogTable lse_marginal(const LogTable& t, std::span<const int> onto) {
  std::vector<int> out_cards(onto.size());
  for (std::size_t i = 0; i < onto.size(); ++i) {
    auto it = std::lower_bound(t.scope.begin(), t.scope.end(), onto[i]);
    if (it == t.scope.end() || *it != onto[i])
      throw std::logic_error("lse_marginal: target scope not contained");
    out_cards[i] = t.cards[static_cast<std::size_t>(it - t.scope.begin())];
  }
  LogTable out;
  out.scope.assign(onto.begin(), onto.end());
  out.cards = std::move(out_cards);
  out.v.assign(table_size(out.cards), kNegInf);
  auto strides = position_strides(t.scope, t.cards, onto, out.cards);
  odometer(t.cards, strides, [&](std::size_t bi, std::size_t si) {
    out.v[si] = log_add(out.v[si], t.v[bi]);
  });
  return out;
}

double lse_total(const LogTable& t) {
  double m = kNegInf;
  for (double x : t.v) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : t.v) s += std::exp(x - m);
  return m + std::log(s);
}

double normalize_lse(LogTable& t) {
  double z = lse_total(t);
  if (!std::isfinite(z)) throw std::runtime_error("normalize: zero or non-finite mass");
  for (double& x : t.v) x -= z;
  return z;
}

std::vector<double> probabilities(const LogTable& t) {
  std::vector<double> p(t.v.size());
  for (std::size_t i = 0; i < t.v.size(); ++i) p[i] = std::exp(t.v[i]);
  return p;
}

double entropy(const LogTable& normalized) {
  double h = 0.0;
  for (double lv : normalized.v) {
    double p = std::exp(lv);
    if (p > 0.0) h -= p * lv;
  }
  return h;
}

double expectation(const LogTable& normalized, std::span<const double> w) {
  if (w.size() != normalized.v.size())
    throw std::logic_error("expectation: size mismatch");
  double e = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    double p = std::exp(normalized.v[i]);
    if (p > 0.0) e += p * w[i];
  }
  return e;
}

void sort_scope_and_table(std::vector<int>& scope, std::vector<int>& cards,
                          std::vector<double>& values) {
  const std::size_t k = scope.size();
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::sort(perm.begin(), perm.end(),
            [&](std::size_t a, std::size_t b) { return scope[a] < scope[b]; });
  for (std::size_t i = 0; i + 1 < k; ++i)
    if (scope[perm[i]] == scope[perm[i + 1]])
      throw std::invalid_argument("duplicate variable in scope");
  bool sorted = std::is_sorted(scope.begin(), scope.end());
  std::vector<int> new_scope(k), new_cards(k);
  for (std::size_t i = 0; i < k; ++i) {
    new_scope[i] = scope[perm[i]];
    new_cards[i] = cards[perm[i]];
  }
  if (!sorted) {
    // old strides, then re-index every entry of the permuted layout
    std::vector<std::size_t> old_stride(k, 1);
    for (int i = static_cast<int>(k) - 2; i >= 0; --i)
      old_stride[static_cast<std::size_t>(i)] =
          old_stride[static_cast<std::size_t>(i) + 1] *
          static_cast<std::size_t>(cards[static_cast<std::size_t>(i) + 1]);
    std::vector<std::size_t> strides(k);
    for (std::size_t i = 0; i < k; ++i) strides[i] = old_stride[perm[i]];
    std::vector<double> out(values.size());
    std::vector<std::size_t> sstrides(strides.begin(), strides.end());
    std::vector<int> dims(new_cards.begin(), new_cards.end());
    std::size_t idx = 0;
    std::vector<int> digit(k, 0);
    std::size_t old_idx = 0;
    for (;;) {
      out[idx++] = values[old_idx];
      if (idx == values.size()) break;
      int d = static_cast<int>(k) - 1;
      for (;;) {
        ++digit[static_cast<std::size_t>(d)];
        old_idx += sstrides[static_cast<std::size_t>(d)];
        if (digit[static_cast<std::size_t>(d)] < dims[static_cast<std::size_t>(d)]) break;
        old_idx -= sstrides[static_cast<std::size_t>(d)] *
                   static_cast<std::size_t>(dims[static_cast<std::size_t>(d)]);
        digit[static_cast<std::size_t>(d)] = 0;
        --d;
      }
    }
    values = std::move(out);
  }
  scope = std::move(new_scope);
  cards = std::move(new_cards);
}

}  // namespace rgbp
