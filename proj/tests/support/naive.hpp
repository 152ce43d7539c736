#pragma once
// Full-enumeration checkers written straight from the definitions. They use
// an edge set built from g.edges() and plain integer counting, not the
// library's density or bitset helpers.

#include <functional>
#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "kpack/graph.hpp"

namespace kpack::naive {

using EdgeSet = std::set<std::pair<int, int>>;

inline EdgeSet edge_set(const MultipartiteGraph& g) {
  EdgeSet s;
  for (auto [u, v] : g.edges()) s.insert({u, v});
  return s;
}

inline bool has(const EdgeSet& e, int u, int v) { return e.count({std::min(u, v), std::max(u, v)}) > 0; }

// d(A, B) >= q  <=>  edges * den >= q_num * |A||B| (q = num/den), with d = 1 on empty sides
inline bool density_at_least(const EdgeSet& e, const std::vector<int>& a, const std::vector<int>& b,
                             std::int64_t num, std::int64_t den) {
  if (a.empty() || b.empty()) return true;
  std::int64_t cnt = 0;
  for (int u : a)
    for (int w : b) cnt += has(e, u, w);
  return cnt * den >= num * static_cast<std::int64_t>(a.size() * b.size());
}

inline bool density_at_most(const EdgeSet& e, const std::vector<int>& a, const std::vector<int>& b,
                            std::int64_t num, std::int64_t den) {
  if (a.empty() || b.empty()) return true;
  std::int64_t cnt = 0;
  for (int u : a)
    for (int w : b) cnt += has(e, u, w);
  return cnt * den <= num * static_cast<std::int64_t>(a.size() * b.size());
}

// All size-t subsets of a class, as sorted id lists.
inline std::vector<std::vector<int>> subsets(const MultipartiteGraph& g, int c, int t) {
  std::vector<std::vector<int>> out;
  const int m = g.class_size(c);
  for (int mask = 0; mask < (1 << m); ++mask) {
    if (__builtin_popcount(mask) != t) continue;
    std::vector<int> s;
    for (int o = 0; o < m; ++o)
      if (mask >> o & 1) s.push_back(g.id(c, o));
    out.push_back(s);
  }
  return out;
}

inline std::vector<int> complement(const MultipartiteGraph& g, int c, const std::vector<int>& s) {
  std::vector<int> out;
  for (int v = g.class_begin(c); v < g.class_end(c); ++v)
    if (!std::binary_search(s.begin(), s.end(), v)) out.push_back(v);
  return out;
}

// Runs f on every choice of one size-t subset per class; stops when f returns true.
inline bool for_each_choice(const MultipartiteGraph& g, int t,
                            const std::function<bool(const std::vector<std::vector<int>>&)>& f) {
  std::vector<std::vector<std::vector<int>>> opts(g.r());
  for (int c = 0; c < g.r(); ++c) opts[c] = subsets(g, c, t);
  std::vector<std::vector<int>> pick(g.r());
  std::function<bool(int)> rec = [&](int c) -> bool {
    if (c == g.r()) return f(pick);
    for (const auto& s : opts[c]) {
      pick[c] = s;
      if (rec(c + 1)) return true;
    }
    return false;
  };
  return rec(0);
}

// d is num/den. Class sizes must be p*n.
inline bool splittable(const MultipartiteGraph& g, int p, std::int64_t num, std::int64_t den) {
  const int n = g.class_size(0) / p;
  const auto e = edge_set(g);
  for (int pp = 1; pp < p; ++pp) {
    bool found = for_each_choice(g, pp * n, [&](const std::vector<std::vector<int>>& S) {
      for (int i = 0; i < g.r(); ++i)
        for (int j = 0; j < g.r(); ++j) {
          if (i == j) continue;
          if (!density_at_least(e, S[i], complement(g, j, S[j]), den - num, den)) return false;
        }
      return true;
    });
    if (found) return true;
  }
  return false;
}

inline bool pair_complete_sets(const MultipartiteGraph& g, const EdgeSet& e, const std::vector<std::vector<int>>& S,
                               std::int64_t num, std::int64_t den) {
  for (int i = 0; i < g.r(); ++i)
    for (int j = 0; j < g.r(); ++j) {
      if (i == j) continue;
      const auto Ti = complement(g, i, S[i]), Tj = complement(g, j, S[j]);
      if (!density_at_least(e, S[i], S[j], den - num, den)) return false;
      if (!density_at_least(e, Ti, Tj, den - num, den)) return false;
      if (!density_at_most(e, S[i], Tj, num, den)) return false;
    }
  return true;
}

inline bool pair_complete(const MultipartiteGraph& g, std::int64_t num, std::int64_t den) {
  const auto e = edge_set(g);
  return for_each_choice(g, g.class_size(0) / 2, [&](const std::vector<std::vector<int>>& S) {
    return pair_complete_sets(g, e, S, num, den);
  });
}

}  // namespace kpack::naive
