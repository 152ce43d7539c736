#include "kpack/kernels.hpp"

#include <limits>

namespace kpack {

namespace {

void extend_cliques(const MultipartiteGraph& g, int p, Clique& cur, const Bitset& cand,
                    std::size_t start, std::vector<Clique>& out) {
  if (static_cast<int>(cur.size()) == p) {
    out.push_back(cur);
    return;
  }
  for (std::size_t v = cand.next(start); v < cand.size(); v = cand.next(v + 1)) {
    cur.push_back(static_cast<int>(v));
    extend_cliques(g, p, cur, cand & g.neighbors(static_cast<int>(v)), v + 1, out);
    cur.pop_back();
  }
}

std::vector<Clique> cliques_from(const MultipartiteGraph& g, int p, int u) {
  std::vector<Clique> out;
  Clique cur{u};
  if (p == 1) {
    out.push_back(cur);
    return out;
  }
  extend_cliques(g, p, cur, g.neighbors(u), static_cast<std::size_t>(u) + 1, out);
  return out;
}

// Depth-first completion of a selection whose first `depth` groups are fixed.
bool complete_selection(const SelectionProblem& prob, std::vector<int>& pick,
                        std::vector<Bitset>& allowed, std::size_t depth) {
  const std::size_t groups = prob.group_sizes.size();
  if (depth == groups) return true;
  const Bitset& mine = allowed[depth];
  for (std::size_t x = mine.first(); x < mine.size(); x = mine.next(x + 1)) {
    std::vector<Bitset> saved(allowed.begin() + depth + 1, allowed.end());
    bool dead = false;
    for (std::size_t b = depth + 1; b < groups && !dead; ++b) {
      allowed[b] &= prob.compat[depth][b][x];
      dead = allowed[b].none();
    }
    if (!dead) {
      pick[depth] = static_cast<int>(x);
      if (complete_selection(prob, pick, allowed, depth + 1)) return true;
    }
    std::copy(saved.begin(), saved.end(), allowed.begin() + depth + 1);
  }
  return false;
}

std::optional<std::vector<int>> solve_from_first(const SelectionProblem& prob, int x0) {
  const std::size_t groups = prob.group_sizes.size();
  std::vector<Bitset> allowed;
  for (int s : prob.group_sizes) {
    Bitset b(static_cast<std::size_t>(s));
    b.set_range(0, static_cast<std::size_t>(s));
    allowed.push_back(std::move(b));
  }
  for (std::size_t b = 1; b < groups; ++b) {
    allowed[b] &= prob.compat[0][b][x0];
    if (allowed[b].none()) return std::nullopt;
  }
  std::vector<int> pick(groups, -1);
  pick[0] = x0;
  if (complete_selection(prob, pick, allowed, 1)) return pick;
  return std::nullopt;
}

}  // namespace

std::vector<Clique> enumerate_cliques_serial(const MultipartiteGraph& g, int p) {
  std::vector<Clique> out;
  for (int u = 0; u < g.num_vertices(); ++u) {
    auto part = cliques_from(g, p, u);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

std::vector<Clique> enumerate_cliques_parallel(const MultipartiteGraph& g, int p) {
  const int n = g.num_vertices();
  std::vector<std::vector<Clique>> parts(n);
#pragma omp parallel for schedule(dynamic, 4)
  for (int u = 0; u < n; ++u) parts[u] = cliques_from(g, p, u);
  std::vector<Clique> out;
  for (auto& part : parts) out.insert(out.end(), part.begin(), part.end());
  return out;
}

std::optional<std::vector<int>> find_selection_serial(const SelectionProblem& prob) {
  if (prob.group_sizes.empty()) return std::vector<int>{};
  for (int x0 = 0; x0 < prob.group_sizes[0]; ++x0)
    if (auto sol = solve_from_first(prob, x0)) return sol;
  return std::nullopt;
}

std::optional<std::vector<int>> find_selection_parallel(const SelectionProblem& prob) {
  if (prob.group_sizes.empty()) return std::vector<int>{};
  const int first = prob.group_sizes[0];
  std::vector<std::optional<std::vector<int>>> found(first);
  int best = std::numeric_limits<int>::max();
#pragma omp parallel for schedule(dynamic, 1)
  for (int x0 = 0; x0 < first; ++x0) {
    int seen;
#pragma omp atomic read
    seen = best;
    if (x0 > seen) continue;
    found[x0] = solve_from_first(prob, x0);
    if (found[x0]) {
#pragma omp critical
      if (x0 < best) best = x0;
    }
  }
  for (int x0 = 0; x0 < first; ++x0)
    if (found[x0]) return found[x0];
  return std::nullopt;
}

}  // namespace kpack
