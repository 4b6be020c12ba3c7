#include "stationarity_probe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rgbp::testing {

namespace {

struct Column {
  EdgeKey edge;
  int state;  // perturbed entry of the edge's message
};

}  // namespace

std::vector<ConsistentDirection> consistent_message_directions(
    const RegionGraph& rg, const FactorGraph& fg, const GBPState& state,
    int max_directions) {
  auto ids = rg.ids();
  std::vector<EdgeKey> edges;
  for (int id : ids)
    for (int c : rg.children(id)) edges.push_back({id, c});
  std::sort(edges.begin(), edges.end());

  // columns: per edge, entries 0..D-2 (the last entry is pinned so per-edge
  // constants are excluded from the search space)
  std::vector<Column> cols;
  for (const auto& e : edges) {
    std::size_t dim = state.messages.at(e).v.size();
    for (int s = 0; s + 1 < static_cast<int>(dim); ++s) cols.push_back({e, s});
  }

  std::map<int, LogTable> belief;
  std::map<int, std::vector<EdgeKey>> uset_of;
  for (int id : ids) {
    belief[id] = compute_belief(rg, fg, state, id);
    uset_of[id] = u_set(rg, id);
  }

  // first-order belief variation of region `id` under a unit bump of column
  // `col`: delta_b(x) = b(x) (phi(x) - <phi>_b) with phi = [x_edge == s]
  auto delta_b = [&](int id, const Column& col) -> std::vector<double> {
    const LogTable& b = belief[id];
    std::vector<double> out(b.v.size(), 0.0);
    const auto& us = uset_of[id];
    if (std::find(us.begin(), us.end(), col.edge) == us.end()) return out;
    const LogTable& m = state.messages.at(col.edge);
    LogTable proj = make_log_table(b.scope, b.cards);
    std::vector<double> ind(m.v.size(), 0.0);
    ind[static_cast<std::size_t>(col.state)] = 1.0;
    add_embedded(proj, m.scope, ind);  // phi(x) in proj.v, linear values
    double mean = 0.0;
    for (std::size_t i = 0; i < b.v.size(); ++i) mean += std::exp(b.v[i]) * proj.v[i];
    for (std::size_t i = 0; i < b.v.size(); ++i)
      out[i] = std::exp(b.v[i]) * (proj.v[i] - mean);
    return out;
  };

  // constraint rows: per edge (alpha -> delta), per child state y:
  // sum_{x: x|delta = y} delta_b_alpha(x) - delta_b_delta(y) = 0
  std::vector<std::vector<double>> matrix;
  for (const auto& e : edges) {
    const LogTable& bd = belief[e.child];
    const LogTable& ba = belief[e.parent];
    std::vector<std::size_t> child_index(ba.v.size(), 0);
    for (std::size_t s = 0; s < bd.v.size(); ++s) {
      std::vector<double> ind(bd.v.size(), 0.0);
      ind[s] = 1.0;
      LogTable tmp = make_log_table(ba.scope, ba.cards);
      add_embedded(tmp, bd.scope, ind);
      for (std::size_t i = 0; i < tmp.v.size(); ++i)
        if (tmp.v[i] > 0.5) child_index[i] = s;
    }
    std::vector<std::vector<double>> rows(bd.v.size(),
                                          std::vector<double>(cols.size(), 0.0));
    for (std::size_t c = 0; c < cols.size(); ++c) {
      auto da = delta_b(e.parent, cols[c]);
      auto dd = delta_b(e.child, cols[c]);
      for (std::size_t i = 0; i < da.size(); ++i) rows[child_index[i]][c] += da[i];
      for (std::size_t s = 0; s < dd.size(); ++s) rows[s][c] -= dd[s];
    }
    for (auto& r : rows) matrix.push_back(std::move(r));
  }

  // Gaussian elimination; null-space basis from the free columns.
  const std::size_t n_rows = matrix.size();
  const std::size_t n_cols = cols.size();
  std::vector<int> pivot_of_col(n_cols, -1);
  std::size_t rank = 0;
  for (std::size_t c = 0; c < n_cols && rank < n_rows; ++c) {
    std::size_t best = rank;
    for (std::size_t r = rank; r < n_rows; ++r)
      if (std::abs(matrix[r][c]) > std::abs(matrix[best][c])) best = r;
    if (std::abs(matrix[best][c]) < 1e-9) continue;
    std::swap(matrix[rank], matrix[best]);
    double piv = matrix[rank][c];
    for (std::size_t cc = 0; cc < n_cols; ++cc) matrix[rank][cc] /= piv;
    for (std::size_t r = 0; r < n_rows; ++r) {
      if (r == rank) continue;
      double f = matrix[r][c];
      if (f == 0.0) continue;
      for (std::size_t cc = 0; cc < n_cols; ++cc) matrix[r][cc] -= f * matrix[rank][cc];
    }
    pivot_of_col[c] = static_cast<int>(rank);
    ++rank;
  }

  std::vector<ConsistentDirection> out;
  for (std::size_t free_col = 0; free_col < n_cols; ++free_col) {
    if (pivot_of_col[free_col] >= 0) continue;
    std::vector<double> d(n_cols, 0.0);
    d[free_col] = 1.0;
    for (std::size_t c = 0; c < n_cols; ++c)
      if (pivot_of_col[c] >= 0)
        d[c] = -matrix[static_cast<std::size_t>(pivot_of_col[c])][free_col];
    double norm = 0.0;
    for (double x : d) norm = std::max(norm, std::abs(x));
    if (norm == 0.0) continue;
    ConsistentDirection dir;
    for (std::size_t c = 0; c < n_cols; ++c) {
      auto& vec = dir.delta_log_m[cols[c].edge];
      if (vec.empty()) vec.assign(state.messages.at(cols[c].edge).v.size(), 0.0);
      vec[static_cast<std::size_t>(cols[c].state)] = d[c] / norm;
    }
    for (const auto& e : edges)
      if (!dir.delta_log_m.count(e))
        dir.delta_log_m[e].assign(state.messages.at(e).v.size(), 0.0);
    double change = 0.0;
    for (int id : ids) {
      const LogTable& b = belief[id];
      LogTable shift = make_log_table(b.scope, b.cards);
      for (const auto& e : uset_of[id])
        add_embedded(shift, state.messages.at(e).scope, dir.delta_log_m.at(e));
      double mean = 0.0;
      for (std::size_t i = 0; i < b.v.size(); ++i) mean += std::exp(b.v[i]) * shift.v[i];
      for (std::size_t i = 0; i < b.v.size(); ++i)
        change = std::max(change, std::abs(std::exp(b.v[i]) * (shift.v[i] - mean)));
    }
    dir.belief_change = change;
    out.push_back(std::move(dir));
    if (static_cast<int>(out.size()) >= max_directions) break;
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ConsistentDirection& a, const ConsistentDirection& b) {
                     return a.belief_change > b.belief_change;
                   });
  return out;
}

double perturbed_free_energy(const RegionGraph& rg, const FactorGraph& fg,
                             const GBPState& state, const ConsistentDirection& dir,
                             double eps) {
  GBPState shifted = state;
  for (auto& [edge, msg] : shifted.messages) {
    auto it = dir.delta_log_m.find(edge);
    if (it == dir.delta_log_m.end()) continue;
    for (std::size_t i = 0; i < msg.v.size(); ++i) msg.v[i] += eps * it->second[i];
    normalize_lse(msg);
  }
  BeliefSet beliefs;
  for (int id : rg.ids()) beliefs.beliefs[id] = compute_belief(rg, fg, shifted, id);
  return rg_free_energy(rg, fg, beliefs);
}

std::vector<BeliefDirection> consistent_belief_directions(const RegionGraph& rg,
                                                          const BeliefSet& beliefs,
                                                          int max_directions) {
  auto ids = rg.ids();
  // column layout: one unknown per belief entry
  std::map<int, std::size_t> offset;
  std::size_t n_cols = 0;
  for (int id : ids) {
    offset[id] = n_cols;
    n_cols += beliefs.beliefs.at(id).v.size();
  }

  std::vector<std::vector<double>> matrix;
  // normalization rows
  for (int id : ids) {
    std::vector<double> row(n_cols, 0.0);
    const auto& b = beliefs.beliefs.at(id);
    for (std::size_t i = 0; i < b.v.size(); ++i) row[offset[id] + i] = 1.0;
    matrix.push_back(std::move(row));
  }
  // edge marginalization rows
  for (int id : ids)
    for (int c : rg.children(id)) {
      const LogTable& ba = beliefs.beliefs.at(id);
      const LogTable& bc = beliefs.beliefs.at(c);
      std::vector<std::size_t> child_index(ba.v.size(), 0);
      for (std::size_t s = 0; s < bc.v.size(); ++s) {
        std::vector<double> ind(bc.v.size(), 0.0);
        ind[s] = 1.0;
        LogTable tmp = make_log_table(ba.scope, ba.cards);
        add_embedded(tmp, bc.scope, ind);
        for (std::size_t i = 0; i < tmp.v.size(); ++i)
          if (tmp.v[i] > 0.5) child_index[i] = s;
      }
      std::vector<std::vector<double>> rows(bc.v.size(),
                                            std::vector<double>(n_cols, 0.0));
      for (std::size_t i = 0; i < ba.v.size(); ++i)
        rows[child_index[i]][offset[id] + i] += 1.0;
      for (std::size_t s = 0; s < bc.v.size(); ++s) rows[s][offset[c] + s] -= 1.0;
      for (auto& r : rows) matrix.push_back(std::move(r));
    }

  // Gaussian elimination; free columns span the tangent space.
  const std::size_t n_rows = matrix.size();
  std::vector<int> pivot_of_col(n_cols, -1);
  std::size_t rank = 0;
  for (std::size_t c = 0; c < n_cols && rank < n_rows; ++c) {
    std::size_t best = rank;
    for (std::size_t r = rank; r < n_rows; ++r)
      if (std::abs(matrix[r][c]) > std::abs(matrix[best][c])) best = r;
    if (std::abs(matrix[best][c]) < 1e-9) continue;
    std::swap(matrix[rank], matrix[best]);
    double piv = matrix[rank][c];
    for (std::size_t cc = 0; cc < n_cols; ++cc) matrix[rank][cc] /= piv;
    for (std::size_t r = 0; r < n_rows; ++r) {
      if (r == rank) continue;
      double f = matrix[r][c];
      if (f == 0.0) continue;
      for (std::size_t cc = 0; cc < n_cols; ++cc) matrix[r][cc] -= f * matrix[rank][cc];
    }
    pivot_of_col[c] = static_cast<int>(rank);
    ++rank;
  }

  std::vector<BeliefDirection> out;
  for (std::size_t free_col = 0; free_col < n_cols; ++free_col) {
    if (pivot_of_col[free_col] >= 0) continue;
    std::vector<double> d(n_cols, 0.0);
    d[free_col] = 1.0;
    for (std::size_t c = 0; c < n_cols; ++c)
      if (pivot_of_col[c] >= 0)
        d[c] = -matrix[static_cast<std::size_t>(pivot_of_col[c])][free_col];
    // normalize so the largest *relative* change max |delta_b / b| is one;
    // eps then acts as a log-domain perturbation size
    double norm = 0.0;
    for (int id : ids) {
      const auto& b = beliefs.beliefs.at(id);
      for (std::size_t i = 0; i < b.v.size(); ++i)
        norm = std::max(norm, std::abs(d[offset[id] + i]) / std::exp(b.v[i]));
    }
    if (norm < 1e-12) continue;
    BeliefDirection dir;
    dir.magnitude = 1.0;
    for (int id : ids) {
      const auto& b = beliefs.beliefs.at(id);
      std::vector<double> db(b.v.size());
      for (std::size_t i = 0; i < b.v.size(); ++i) db[i] = d[offset[id] + i] / norm;
      dir.delta_b[id] = std::move(db);
    }
    out.push_back(std::move(dir));
    if (static_cast<int>(out.size()) >= max_directions) break;
  }
  return out;
}

double perturbed_free_energy_beliefs(const RegionGraph& rg, const FactorGraph& fg,
                                     const BeliefSet& beliefs,
                                     const BeliefDirection& dir, double eps) {
  BeliefSet shifted = beliefs;
  for (auto& [id, b] : shifted.beliefs) {
    const auto& db = dir.delta_b.at(id);
    for (std::size_t i = 0; i < b.v.size(); ++i) {
      double p = std::exp(b.v[i]) + eps * db[i];
      if (p <= 0.0) throw std::invalid_argument("belief perturbation too large");
      b.v[i] = std::log(p);
    }
  }
  return rg_free_energy(rg, fg, shifted);
}

}  // namespace rgbp::testing
