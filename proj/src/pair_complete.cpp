#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "kpack/errors.hpp"
#include "kpack/matching.hpp"

namespace kpack {

namespace {

constexpr int kAttempts = 24;

// Perfect matching of the union of `sets` with exactly `s` edges per class
// pair. sets[c] has s*(r-1) vertices.
std::optional<std::vector<Clique>> balanced_side(const MultipartiteGraph& g,
                                                 std::vector<std::vector<int>> sets, int s,
                                                 std::mt19937_64& rng) {
  const int r = g.r();
  std::vector<Clique> out;
  if (s == 0) return out;
  if (r == 2) {
    BipartiteGraph b{s, s, std::vector<std::vector<int>>(s)};
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j)
        if (g.adjacent(sets[0][i], sets[1][j])) b.adj[i].push_back(j);
    auto mate = max_bipartite_matching(b);
    for (int i = 0; i < s; ++i) {
      if (mate[i] < 0) return std::nullopt;
      out.push_back({std::min(sets[0][i], sets[1][mate[i]]), std::max(sets[0][i], sets[1][mate[i]])});
    }
    return out;
  }
  if (r == 3) {
    // any perfect matching here is balanced: class sizes force the counts
    std::vector<int> verts;
    for (auto& v : sets) verts.insert(verts.end(), v.begin(), v.end());
    std::sort(verts.begin(), verts.end());
    std::vector<std::vector<int>> adj(verts.size());
    for (std::size_t i = 0; i < verts.size(); ++i)
      for (std::size_t j = 0; j < verts.size(); ++j)
        if (g.adjacent(verts[i], verts[j])) adj[i].push_back(static_cast<int>(j));
    auto mate = maximum_matching(adj);
    for (std::size_t i = 0; i < verts.size(); ++i) {
      if (mate[i] < 0) return std::nullopt;
      if (static_cast<int>(i) < mate[i]) out.push_back({verts[i], verts[mate[i]]});
    }
    return out;
  }
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    if (attempt > 0)
      for (auto& v : sets) std::shuffle(v.begin(), v.end(), rng);
    out.clear();
    bool ok = true;
    for (int c = 0; c < r && ok; ++c)
      for (int d = c + 1; d < r && ok; ++d) {
        // group (c,d) is chunk number (d - (d>c)) of class c
        auto chunk = [&](int a, int b) {
          int slot = b - (b > a ? 1 : 0);
          return std::vector<int>(sets[a].begin() + slot * s, sets[a].begin() + (slot + 1) * s);
        };
        auto A = chunk(c, d), B = chunk(d, c);
        BipartiteGraph b{s, s, std::vector<std::vector<int>>(s)};
        for (int i = 0; i < s; ++i)
          for (int j = 0; j < s; ++j)
            if (g.adjacent(A[i], B[j])) b.adj[i].push_back(j);
        auto mate = max_bipartite_matching(b);
        for (int i = 0; i < s && ok; ++i) {
          if (mate[i] < 0) ok = false;
          else out.push_back({A[i], B[mate[i]]});
        }
      }
    if (ok) return out;
  }
  return std::nullopt;
}

std::optional<std::vector<Clique>> try_build(const MultipartiteGraph& g,
                                             const std::vector<std::vector<int>>& X,
                                             const std::vector<std::vector<int>>& Y, int n_prime,
                                             int& corrections) {
  const int r = g.r();
  std::vector<int> order(r), a(r);
  for (int j = 0; j < r; ++j) {
    a[j] = static_cast<int>(X[j].size()) - n_prime;
    if (a[j] < 0) return std::nullopt;
  }
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int u, int v) { return a[u] > a[v]; });
  std::vector<int> seq(r);
  for (int i = 0; i < r; ++i) seq[i] = a[order[i]];
  if (!is_multigraphic(seq)) return std::nullopt;
  std::vector<std::pair<int, int>> pairs;
  for (auto [u, v] : realize_multigraph(seq)) pairs.push_back({std::min(order[u], order[v]), std::max(order[u], order[v])});
  const int L = static_cast<int>(pairs.size());
  const int y_left = g.class_size(0) - n_prime - (r - 1) * L;
  if (y_left < 0 || y_left % (r - 1) != 0) return std::nullopt;

  std::mt19937_64 rng(0x5eedULL + static_cast<unsigned>(n_prime));
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    auto Xs = X, Ys = Y;
    if (attempt > 0) {
      for (auto& v : Xs) std::shuffle(v.begin(), v.end(), rng);
      for (auto& v : Ys) std::shuffle(v.begin(), v.end(), rng);
    }
    std::vector<char> used(g.num_vertices(), 0);
    std::vector<Clique> out;
    auto pick = [&](const std::vector<int>& A, const std::vector<int>& B) -> bool {
      for (int x : A) {
        if (used[x]) continue;
        for (int y : B)
          if (!used[y] && g.adjacent(x, y)) {
            used[x] = used[y] = 1;
            out.push_back({std::min(x, y), std::max(x, y)});
            return true;
          }
      }
      return false;
    };
    bool ok = true;
    for (auto [i, j] : pairs) {
      if (!pick(Xs[i], Xs[j])) {
        ok = false;
        break;
      }
      for (int c = 0; c < r && ok; ++c)
        for (int d = c + 1; d < r && ok; ++d)
          if (!(c == i && d == j) && !pick(Ys[c], Ys[d])) ok = false;
      if (!ok) break;
    }
    if (!ok) continue;
    std::vector<std::vector<int>> xr(r), yr(r);
    for (int c = 0; c < r; ++c) {
      for (int x : Xs[c])
        if (!used[x]) xr[c].push_back(x);
      for (int y : Ys[c])
        if (!used[y]) yr[c].push_back(y);
    }
    auto xs = balanced_side(g, xr, n_prime / (r - 1), rng);
    if (!xs) continue;
    auto ys = balanced_side(g, yr, y_left / (r - 1), rng);
    if (!ys) continue;
    out.insert(out.end(), xs->begin(), xs->end());
    out.insert(out.end(), ys->begin(), ys->end());
    std::sort(out.begin(), out.end());
    corrections = L;
    return out;
  }
  return std::nullopt;
}

}  // namespace

PairCompleteMatching pair_complete_balanced_matching(const MultipartiteGraph& g,
                                                     const std::vector<std::vector<int>>& halves,
                                                     const Rational& zeta) {
  const int r = g.r();
  if (r < 2) throw PreconditionError("need at least two classes");
  if (!g.equal_class_sizes() || g.class_size(0) % 2 != 0)
    throw PreconditionError("classes must share an even size 2n");
  if (static_cast<int>(halves.size()) != r) throw PreconditionError("one half X_j per class expected");
  const int n = g.class_size(0) / 2;
  std::vector<std::vector<int>> X(r), Y(r);
  long long total_x = 0;
  for (int c = 0; c < r; ++c) {
    std::vector<char> in(g.class_size(c), 0);
    for (int x : halves[c]) {
      if (x < g.class_begin(c) || x >= g.class_end(c)) throw PreconditionError("X_j must lie inside class j");
      if (in[x - g.class_begin(c)]++) throw PreconditionError("duplicate vertex in X_j");
    }
    for (int v = g.class_begin(c); v < g.class_end(c); ++v) (in[v - g.class_begin(c)] ? X[c] : Y[c]).push_back(v);
    total_x += static_cast<long long>(X[c].size());
  }
  if ((2 * n) % (r - 1) != 0) {
    std::ostringstream os;
    os << "divisibility failure: r-1 = " << r - 1 << " does not divide 2n = " << 2 * n;
    throw SizingError(os.str());
  }
  if (total_x % 2 != 0) {
    std::ostringstream os;
    os << "parity obstruction: |X| = " << total_x << " is odd, so X cannot be covered by X-internal edges";
    throw ObstructionError(os.str());
  }
  if (zeta < Rational(1)) {
    const Rational zn = zeta * n;
    for (int c = 0; c < r; ++c) {
      Rational sz(static_cast<std::int64_t>(X[c].size()));
      if (sz < (1 - zeta) * n || sz > (1 + zeta) * n) throw PreconditionError("|X_j| outside (1 +- zeta) n");
    }
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < r; ++j) {
        if (i == j) continue;
        for (const auto* side : {&X, &Y})
          for (int u : (*side)[i]) {
            int non = 0;
            for (int w : (*side)[j]) non += !g.adjacent(u, w);
            if (Rational(non) > zn) throw PreconditionError("a vertex has more than zeta n non-neighbours in its half");
          }
      }
  }

  // the (1 - zeta) window first, then every other multiple of r-1 from the top down
  const int cap = static_cast<int>(std::min_element(X.begin(), X.end(), [](auto& a, auto& b) { return a.size() < b.size(); })->size());
  std::vector<int> candidates;
  int window_pick = -1;
  {
    int lo = static_cast<int>(ceil_of((1 - 5 * zeta) * n));
    int hi = static_cast<int>(floor_of((1 - 4 * zeta) * n));
    for (int v = std::min(hi, cap); v >= std::max(lo, 0); --v)
      if (v % (r - 1) == 0) {
        window_pick = v;
        break;
      }
  }
  if (window_pick >= 0) candidates.push_back(window_pick);
  for (int v = cap - cap % (r - 1); v >= 0; v -= r - 1)
    if (v != window_pick) candidates.push_back(v);

  for (int np : candidates) {
    int corrections = 0;
    auto edges = try_build(g, X, Y, np, corrections);
    if (!edges) continue;
    PairCompleteMatching res;
    res.matching.cliques = std::move(*edges);
    res.n_prime = np;
    res.corrections = corrections;
    res.in_window = np == window_pick;
    auto check = verify_packing(g, res.matching, 2, true);
    if (!check.ok || !is_balanced(g, res.matching, 2))
      throw InternalError("pair-complete matching failed its own recount");
    return res;
  }
  if (window_pick < 0)
    throw SizingError("no admissible n' in the (1-5 zeta)n..(1-4 zeta)n window and no fallback value worked");
  throw SupplyError("correction matchings or residual matchings could not be completed");
}

}  // namespace kpack
