#pragma once
// Brute-force checkers for the matching engine, shared with the acceptance driver.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "kpack/matching.hpp"

namespace kpack::oracles {

// exhaustive loopless multigraph search: pair up degree stubs recursively
inline bool multigraph_exists(std::vector<int> d) {
  auto it = std::max_element(d.begin(), d.end());
  if (it == d.end() || *it == 0) return true;
  int i = static_cast<int>(it - d.begin());
  for (int j = 0; j < static_cast<int>(d.size()); ++j) {
    if (j == i || d[j] == 0) continue;
    --d[i], --d[j];
    if (multigraph_exists(d)) return true;
    ++d[i], ++d[j];
  }
  return false;
}

inline void descending(int len, int maxv, int budget, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == len) {
    out.push_back(cur);
    return;
  }
  for (int v = std::min(maxv, budget); v >= 0; --v) {
    cur.push_back(v);
    descending(len, v, budget - v, cur, out);
    cur.pop_back();
  }
}

inline bool brute_transversal(const Rectangle& rect) {
  std::vector<int> cols(rect.r);
  std::iota(cols.begin(), cols.end(), 0);
  std::function<bool(int, std::vector<char>&)> go = [&](int row, std::vector<char>& used) {
    if (row == rect.s) return true;
    for (int c = 0; c < rect.r; ++c) {
      if (used[c] || rect.colored.count({row, c})) continue;
      used[c] = 1;
      if (go(row + 1, used)) return true;
      used[c] = 0;
    }
    return false;
  };
  std::vector<char> used(rect.r, 0);
  return go(0, used);
}

inline bool valid_transversal(const Rectangle& rect, const std::vector<Cell>& t) {
  if (static_cast<int>(t.size()) != rect.s) return false;
  std::set<int> rows, cols;
  for (const Cell& c : t) {
    if (rect.colored.count(c)) return false;
    rows.insert(c.row);
    cols.insert(c.col);
  }
  return static_cast<int>(rows.size()) == rect.s && static_cast<int>(cols.size()) == rect.s;
}

// all simple paths, any even one between co-partners?
inline bool brute_even_path(const MultipartiteGraph& h) {
  int n = h.num_vertices();
  for (int c = 0; c < h.r(); ++c) {
    int x = h.class_begin(c), y = x + 1;
    std::vector<char> on(n, 0);
    std::function<bool(int, int)> go = [&](int u, int len) {
      if (u == y) return len % 2 == 0;
      for (int w = 0; w < n; ++w) {
        if (on[w] || !h.adjacent(u, w)) continue;
        on[w] = 1;
        if (go(w, len + 1)) return true;
        on[w] = 0;
      }
      return false;
    };
    on[x] = 1;
    if (go(x, 0)) return true;
  }
  return false;
}

// balanced perfect matching search, optionally demanding each edge stay inside X or Y
inline bool brute_balanced_matching(const MultipartiteGraph& g) {
  int n = g.num_vertices();
  int r = g.r();
  int pairs = r * (r - 1) / 2;
  if ((n / 2) % pairs != 0) return false;
  int cap = n / 2 / pairs;
  std::map<std::pair<int, int>, int> cnt;
  std::vector<char> used(n, 0);
  std::function<bool()> go = [&]() {
    int u = -1;
    for (int v = 0; v < n; ++v)
      if (!used[v]) {
        u = v;
        break;
      }
    if (u < 0) return true;
    used[u] = 1;
    for (int w = u + 1; w < n; ++w) {
      if (used[w] || !g.adjacent(u, w)) continue;
      auto key = std::make_pair(g.class_of(u), g.class_of(w));
      if (cnt[key] >= cap) continue;
      ++cnt[key];
      used[w] = 1;
      if (go()) return true;
      used[w] = 0;
      --cnt[key];
    }
    used[u] = 0;
    return false;
  };
  return go();
}

inline bool recount_ok(const MultipartiteGraph& g, const CliquePacking& m, int p) {
  std::vector<int> cover(g.num_vertices(), 0);
  for (const auto& c : m.cliques) {
    if (static_cast<int>(c.size()) != p) return false;
    for (std::size_t i = 0; i < c.size(); ++i) {
      ++cover[c[i]];
      for (std::size_t j = i + 1; j < c.size(); ++j)
        if (!g.adjacent(c[i], c[j])) return false;
    }
  }
  return std::all_of(cover.begin(), cover.end(), [](int x) { return x == 1; });
}

inline std::map<std::vector<int>, int> recount_indices(const MultipartiteGraph& g, const CliquePacking& m) {
  std::map<std::vector<int>, int> out;
  for (const auto& c : m.cliques) {
    std::vector<int> idx;
    for (int v : c) idx.push_back(g.class_of(v));
    std::sort(idx.begin(), idx.end());
    ++out[idx];
  }
  return out;
}

}  // namespace kpack::oracles
