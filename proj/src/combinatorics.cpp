#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>

#include "kpack/errors.hpp"
#include "kpack/matching.hpp"

namespace kpack {

bool is_multigraphic(const std::vector<int>& d) {
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] < 0) throw PreconditionError("degree sequence has a negative entry");
    if (i > 0 && d[i] > d[i - 1]) throw PreconditionError("degree sequence must be sorted descending");
  }
  if (d.empty()) return true;
  long long sum = std::accumulate(d.begin(), d.end(), 0LL);
  return sum % 2 == 0 && d[0] <= sum - d[0];
}

std::vector<std::pair<int, int>> realize_multigraph(const std::vector<int>& d) {
  if (!is_multigraphic(d)) throw PreconditionError("degree sequence is not multigraphic");
  // max-heap on (residual, -index) so ties go to the smaller index
  std::priority_queue<std::pair<int, int>> heap;
  for (int i = 0; i < static_cast<int>(d.size()); ++i)
    if (d[i] > 0) heap.push({d[i], -i});
  std::vector<std::pair<int, int>> edges;
  while (!heap.empty()) {
    auto [da, ia] = heap.top();
    heap.pop();
    if (heap.empty()) throw InternalError("largest-first pairing left a lone vertex");
    auto [db, ib] = heap.top();
    heap.pop();
    int u = -ia, v = -ib;
    edges.push_back({std::min(u, v), std::max(u, v)});
    if (da > 1) heap.push({da - 1, ia});
    if (db > 1) heap.push({db - 1, ib});
  }
  return edges;
}

// ---- transversals -----------------------------------------------------------

bool transversal_hypotheses_hold(const Rectangle& rect) {
  if (rect.s > rect.r) return false;
  if (static_cast<int>(rect.colored.size()) > rect.r) return false;
  std::vector<int> per_row(rect.s, 0), per_col(rect.r, 0);
  for (const Cell& c : rect.colored) {
    if (c.row < 0 || c.row >= rect.s || c.col < 0 || c.col >= rect.r) return false;
    ++per_row[c.row];
    ++per_col[c.col];
  }
  for (int x : per_col)
    if (x > 1) return false;
  for (int x : per_row)
    if (x > rect.r - 1) return false;
  return true;
}

namespace {

struct SubRect {
  std::vector<int> rows, cols;
};

bool sub_hypotheses(const Rectangle& rect, const SubRect& sr) {
  int s = static_cast<int>(sr.rows.size()), r = static_cast<int>(sr.cols.size());
  if (s > r) return false;
  int total = 0;
  for (int row : sr.rows) {
    int cnt = 0;
    for (int col : sr.cols) cnt += rect.colored.count({row, col});
    if (cnt > r - 1) return false;
    total += cnt;
  }
  return total <= r;  // column condition is inherited
}

// Row with most coloured cells, then an uncoloured cell in it; columns that
// carry a coloured cell are tried first so the remainder keeps the hypotheses.
bool induct(const Rectangle& rect, SubRect sr, std::vector<Cell>& out) {
  if (sr.rows.empty()) return true;
  int best_row = sr.rows[0], best = -1;
  for (int row : sr.rows) {
    int cnt = 0;
    for (int col : sr.cols) cnt += rect.colored.count({row, col});
    if (cnt > best) best = cnt, best_row = row;
  }
  std::vector<int> candidates;
  for (int pass = 0; pass < 2; ++pass)
    for (int col : sr.cols) {
      if (rect.colored.count({best_row, col})) continue;
      bool has_colour = false;
      for (int row : sr.rows) has_colour |= rect.colored.count({row, col}) > 0;
      if (has_colour == (pass == 0)) candidates.push_back(col);
    }
  for (int col : candidates) {
    SubRect next;
    for (int row : sr.rows)
      if (row != best_row) next.rows.push_back(row);
    for (int c : sr.cols)
      if (c != col) next.cols.push_back(c);
    if (!sub_hypotheses(rect, next)) continue;
    out.push_back({best_row, col});
    if (induct(rect, next, out)) return true;
    out.pop_back();
  }
  return false;
}

}  // namespace

std::optional<std::vector<Cell>> find_transversal(const Rectangle& rect) {
  if (rect.s < 0 || rect.r < 0) throw PreconditionError("rectangle dimensions must be nonnegative");
  std::vector<Cell> out;
  if (transversal_hypotheses_hold(rect)) {
    SubRect all;
    for (int i = 0; i < rect.s; ++i) all.rows.push_back(i);
    for (int j = 0; j < rect.r; ++j) all.cols.push_back(j);
    if (induct(rect, all, out)) {
      std::sort(out.begin(), out.end());
      return out;
    }
    out.clear();
  }
  // outside the hypotheses: it is a bipartite matching of rows into columns
  BipartiteGraph b{rect.s, rect.r, std::vector<std::vector<int>>(rect.s)};
  for (int i = 0; i < rect.s; ++i)
    for (int j = 0; j < rect.r; ++j)
      if (!rect.colored.count({i, j})) b.adj[i].push_back(j);
  auto mate = max_bipartite_matching(b);
  for (int i = 0; i < rect.s; ++i) {
    if (mate[i] < 0) return std::nullopt;
    out.push_back({i, mate[i]});
  }
  return out;
}

}  // namespace kpack
