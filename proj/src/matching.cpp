#include <algorithm>
#include <functional>
#include <limits>
#include <queue>

#include "kpack/errors.hpp"
#include "kpack/matching.hpp"

namespace kpack {

std::vector<int> max_bipartite_matching(const BipartiteGraph& b) {
  const int L = b.left, R = b.right;
  if (static_cast<int>(b.adj.size()) != L) throw PreconditionError("bipartite adjacency size mismatch");
  for (const auto& row : b.adj)
    for (int v : row)
      if (v < 0 || v >= R) throw PreconditionError("bipartite neighbour out of range");
  const int INF = std::numeric_limits<int>::max();
  std::vector<int> mate_l(L, -1), mate_r(R, -1), dist(L);

  auto bfs = [&] {
    std::queue<int> q;
    bool found = false;
    for (int u = 0; u < L; ++u) {
      if (mate_l[u] < 0) {
        dist[u] = 0;
        q.push(u);
      } else {
        dist[u] = INF;
      }
    }
    while (!q.empty()) {
      int u = q.front();
      q.pop();
      for (int v : b.adj[u]) {
        int w = mate_r[v];
        if (w < 0) {
          found = true;
        } else if (dist[w] == INF) {
          dist[w] = dist[u] + 1;
          q.push(w);
        }
      }
    }
    return found;
  };
  std::function<bool(int)> dfs = [&](int u) -> bool {
    for (int v : b.adj[u]) {
      int w = mate_r[v];
      if (w < 0 || (dist[w] == dist[u] + 1 && dfs(w))) {
        mate_l[u] = v;
        mate_r[v] = u;
        return true;
      }
    }
    dist[u] = INF;
    return false;
  };
  while (bfs())
    for (int u = 0; u < L; ++u)
      if (mate_l[u] < 0) dfs(u);
  return mate_l;
}

RegularMatchingResult regular_bipartite_perfect_matching(const BipartiteGraph& b) {
  RegularMatchingResult res;
  res.regular = b.left == b.right && b.left > 0;
  std::vector<int> right_deg(b.right, 0);
  int deg = b.adj.empty() ? 0 : static_cast<int>(b.adj[0].size());
  for (const auto& row : b.adj) {
    if (static_cast<int>(row.size()) != deg) res.regular = false;
    for (int v : row) ++right_deg[v];
  }
  for (int d : right_deg)
    if (d != deg) res.regular = false;
  if (deg < 1) res.regular = false;
  res.degree = res.regular ? deg : 0;
  if (b.left != b.right) return res;
  auto mate = max_bipartite_matching(b);
  if (std::all_of(mate.begin(), mate.end(), [](int m) { return m >= 0; })) res.matching = mate;
  else if (res.regular)
    throw InternalError("regular bipartite graph without a perfect matching");
  return res;
}

// ---- blossom ----------------------------------------------------------------

namespace {

class Blossom {
 public:
  explicit Blossom(const std::vector<std::vector<int>>& adj)
      : adj_(adj), n_(static_cast<int>(adj.size())), match_(n_, -1), p_(n_), base_(n_), used_(n_),
        blossom_(n_) {}

  std::vector<int> run() {
    // greedy start keeps the augmentation count low
    for (int v = 0; v < n_; ++v)
      if (match_[v] < 0)
        for (int u : adj_[v])
          if (match_[u] < 0 && u != v) {
            match_[u] = v;
            match_[v] = u;
            break;
          }
    for (int v = 0; v < n_; ++v) {
      if (match_[v] >= 0) continue;
      int u = find_path(v);
      while (u >= 0) {
        int pv = p_[u], ppv = match_[pv];
        match_[u] = pv;
        match_[pv] = u;
        u = ppv;
      }
    }
    return match_;
  }

 private:
  int lca(int a, int b) {
    std::vector<char> seen(n_, 0);
    while (true) {
      a = base_[a];
      seen[a] = 1;
      if (match_[a] < 0) break;
      a = p_[match_[a]];
    }
    while (true) {
      b = base_[b];
      if (seen[b]) return b;
      b = p_[match_[b]];
    }
  }

  void mark_path(int v, int b, int child) {
    while (base_[v] != b) {
      blossom_[base_[v]] = blossom_[base_[match_[v]]] = 1;
      p_[v] = child;
      child = match_[v];
      v = p_[match_[v]];
    }
  }

  int find_path(int root) {
    std::fill(used_.begin(), used_.end(), 0);
    std::fill(p_.begin(), p_.end(), -1);
    for (int i = 0; i < n_; ++i) base_[i] = i;
    used_[root] = 1;
    std::queue<int> q;
    q.push(root);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (int to : adj_[v]) {
        if (base_[v] == base_[to] || match_[v] == to) continue;
        if (to == root || (match_[to] >= 0 && p_[match_[to]] >= 0)) {
          int cur = lca(v, to);
          std::fill(blossom_.begin(), blossom_.end(), 0);
          mark_path(v, cur, to);
          mark_path(to, cur, v);
          for (int i = 0; i < n_; ++i)
            if (blossom_[base_[i]]) {
              base_[i] = cur;
              if (!used_[i]) {
                used_[i] = 1;
                q.push(i);
              }
            }
        } else if (p_[to] < 0) {
          p_[to] = v;
          if (match_[to] < 0) return to;
          used_[match_[to]] = 1;
          q.push(match_[to]);
        }
      }
    }
    return -1;
  }

  const std::vector<std::vector<int>>& adj_;
  int n_;
  std::vector<int> match_, p_, base_;
  std::vector<char> used_, blossom_;
};

}  // namespace

std::vector<int> maximum_matching(const std::vector<std::vector<int>>& adj) {
  return Blossom(adj).run();
}

std::vector<int> maximum_matching(const MultipartiteGraph& g) {
  std::vector<std::vector<int>> adj(g.num_vertices());
  for (int u = 0; u < g.num_vertices(); ++u) adj[u] = g.neighbors(u).to_vector();
  return maximum_matching(adj);
}

// ---- even paths ---------------------------------------------------------------

std::optional<EvenPath> even_path_between_copartners(const MultipartiteGraph& h) {
  for (int c = 0; c < h.r(); ++c)
    if (h.class_size(c) != 2) throw PreconditionError("even path search needs classes of size exactly 2");
  const int n = h.num_vertices();
  for (int c = 0; c < h.r(); ++c) {
    const int x = h.class_begin(c), y = x + 1;
    // parity walk first: no even walk means no even path
    std::vector<char> seen(2 * n, 0);
    std::queue<int> q;
    q.push(2 * x);
    seen[2 * x] = 1;
    while (!q.empty()) {
      int s = q.front();
      q.pop();
      int u = s / 2, par = s % 2;
      h.neighbors(u).for_each([&](std::size_t w) {
        int t = 2 * static_cast<int>(w) + (1 - par);
        if (!seen[t]) seen[t] = 1, q.push(t);
      });
    }
    if (!seen[2 * y]) continue;
    // simple even path by depth-first search
    std::vector<int> path{x};
    std::vector<char> on(n, 0);
    on[x] = 1;
    std::function<bool(int)> dfs = [&](int u) -> bool {
      bool hit = false;
      h.neighbors(u).for_each([&](std::size_t w_) {
        if (hit) return;
        int w = static_cast<int>(w_);
        if (on[w]) return;
        if (w == y) {
          if (path.size() % 2 == 0) {  // size-1 edges so far, plus this one
            path.push_back(y);
            hit = true;
          }
          return;
        }
        on[w] = 1;
        path.push_back(w);
        if (dfs(w)) {
          hit = true;
          return;
        }
        path.pop_back();
        on[w] = 0;
      });
      return hit;
    };
    if (dfs(x)) return EvenPath{c, path};
  }
  return std::nullopt;
}

}  // namespace kpack
