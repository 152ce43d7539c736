#include <algorithm>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "kpack/errors.hpp"
#include "kpack/matching.hpp"
#include "kpack/pipeline.hpp"

namespace kpack {

namespace {

std::string cell_name(int i, int j) {
  return "W^" + std::to_string(i) + "_" + std::to_string(j);
}

}  // namespace

// ---- BlockAssignment --------------------------------------------------------

std::vector<int> BlockAssignment::block(const MultipartiteGraph& g, int i, int j) const {
  std::vector<int> out;
  for (int v = g.class_begin(j); v < g.class_end(j); ++v)
    if (w_row[v] == i) out.push_back(v);
  return out;
}

Bitset BlockAssignment::block_set(const MultipartiteGraph& g, int i, int j) const {
  Bitset b = g.empty_set();
  for (int v = g.class_begin(j); v < g.class_end(j); ++v)
    if (w_row[v] == i) b.set(v);
  return b;
}

bool BlockAssignment::block_bad_for(const MultipartiteGraph& g, int v, int i, int j) const {
  if (j == g.class_of(v)) return true;
  const int cnt = g.degree_into(v, x_blocks[i * g.r() + j]);
  return 2 * cnt < 2 * p[i] * n - n;
}

std::vector<std::pair<int, int>> BlockAssignment::bad_blocks(const MultipartiteGraph& g, int v) const {
  std::vector<std::pair<int, int>> out;
  for (int i = 0; i < s(); ++i)
    for (int j = 0; j < g.r(); ++j)
      if (j != g.class_of(v) && block_bad_for(g, v, i, j)) out.push_back({i, j});
  return out;
}

namespace {

// Reasons a vertex of X is bad, recomputed from scratch.
std::vector<BadRecord> bad_reasons(const MultipartiteGraph& g, const BlockAssignment& a,
                                   const Rational& sqrt_d, int v) {
  std::vector<BadRecord> out;
  const int i = a.x_row[v];
  const int j = g.class_of(v);
  if (i < 0) {
    out.push_back({v, "fill", -1, j, 0, 0});
    return out;
  }
  const int r = g.r();
  for (int i2 = 0; i2 < a.s(); ++i2) {
    if (i2 == i) continue;
    const int th = static_cast<int>(floor_of((Rational(1) - sqrt_d) * a.p[i2] * a.n));
    for (int j2 = 0; j2 < r; ++j2) {
      if (j2 == j) continue;
      const int cnt = g.degree_into(v, a.x_blocks[i2 * r + j2]);
      if (cnt <= th) out.push_back({v, "diagonal", i2, j2, cnt, th});
    }
  }
  if (a.pair_complete[i]) {
    const int th = static_cast<int>(floor_of((Rational(1) - sqrt_d) * a.n));
    for (int j2 = 0; j2 < r; ++j2) {
      if (j2 == j) continue;
      int cnt = 0;
      const Bitset& blk = a.x_blocks[i * r + j2];
      for (std::size_t w = blk.next(0); w < blk.size(); w = blk.next(w + 1))
        if (a.in_t[w] == a.in_t[v] && g.adjacent(v, static_cast<int>(w))) ++cnt;
      if (cnt <= th) out.push_back({v, "half", i, j2, cnt, th});
    }
  }
  return out;
}

}  // namespace

BlockAssignment classify_bad_vertices(const MultipartiteGraph& g, const RowDecomposition& decomp,
                                      const std::vector<std::vector<std::vector<int>>>& halves,
                                      const Rational& sqrt_d) {
  validate_decomposition(g, decomp);
  const int r = g.r();
  const int N = g.num_vertices();
  BlockAssignment a;
  a.n = decomp.n;
  a.p = decomp.p;
  a.x_row = decomp.row_of;
  a.w_row.assign(N, -1);
  a.good.assign(N, 0);
  a.in_t.assign(N, 0);
  a.in_s.assign(N, 0);
  a.pair_complete.assign(a.s(), 0);
  a.x_blocks.assign(a.s() * r, g.empty_set());
  for (int v = 0; v < N; ++v)
    if (a.x_row[v] >= 0) a.x_blocks[a.x_row[v] * r + g.class_of(v)].set(v);
  if (!halves.empty() && static_cast<int>(halves.size()) != a.s())
    throw PreconditionError("classify_bad_vertices: halves must be given per row");
  for (int i = 0; i < static_cast<int>(halves.size()); ++i) {
    if (halves[i].empty()) continue;
    if (a.p[i] != 2 || static_cast<int>(halves[i].size()) != r)
      throw PreconditionError("classify_bad_vertices: halves only for weight-2 rows, one set per class");
    a.pair_complete[i] = 1;
    for (int j = 0; j < r; ++j) {
      if (static_cast<int>(halves[i][j].size()) != a.n)
        throw PreconditionError("classify_bad_vertices: each half must have n vertices");
      for (int v : halves[i][j]) {
        if (!a.x_blocks[i * r + j].test(v))
          throw PreconditionError("classify_bad_vertices: half vertex outside its block");
        a.in_t[v] = 1;
      }
    }
  }

  for (int v = 0; v < N; ++v) {
    auto reasons = bad_reasons(g, a, sqrt_d, v);
    a.good[v] = reasons.empty();
    for (auto& b : reasons) a.bad.push_back(b);
  }

  // good vertices stay; bad ones go to the row holding most of their bad blocks
  for (int v = 0; v < N; ++v) {
    if (a.good[v]) {
      a.w_row[v] = a.x_row[v];
      continue;
    }
    std::vector<int> per_row(a.s(), 0);
    for (auto [i, j] : a.bad_blocks(g, v)) ++per_row[i];
    const int best = *std::max_element(per_row.begin(), per_row.end());
    int to = -1;
    if (a.x_row[v] >= 0 && per_row[a.x_row[v]] == best) to = a.x_row[v];
    for (int i = 0; i < a.s() && to < 0; ++i)
      if (per_row[i] == best) to = i;
    a.w_row[v] = to;
    if (to != a.x_row[v]) a.moves.push_back({v, a.x_row[v], to, best});
  }

  for (int i = 0; i < a.s(); ++i) {
    if (!a.pair_complete[i]) continue;
    for (int v = 0; v < N; ++v) {
      if (a.w_row[v] != i) continue;
      const int j = g.class_of(v);
      if (a.good[v]) {
        a.in_s[v] = a.in_t[v];
        continue;
      }
      for (int j2 = 0; j2 < r && !a.in_s[v]; ++j2) {
        if (j2 == j) continue;
        int cnt = 0;
        const Bitset& blk = a.x_blocks[i * r + j2];
        for (std::size_t w = blk.next(0); w < blk.size(); w = blk.next(w + 1))
          if (a.in_t[w] && g.adjacent(v, static_cast<int>(w))) ++cnt;
        if (2 * cnt >= a.n) a.in_s[v] = 1;
      }
    }
  }
  return a;
}

std::vector<std::string> column_conflicts(const MultipartiteGraph& g, const BlockAssignment& a) {
  std::vector<std::string> out;
  for (int v = 0; v < g.num_vertices(); ++v) {
    std::vector<int> per_col(g.r(), 0);
    for (auto [i, j] : a.bad_blocks(g, v)) ++per_col[j];
    for (int j = 0; j < g.r(); ++j)
      if (per_col[j] > 1)
        out.push_back("vertex " + std::to_string(v) + " has " + std::to_string(per_col[j]) +
                      " bad blocks in column " + std::to_string(j));
  }
  return out;
}

std::vector<std::string> audit_assignment(const MultipartiteGraph& g, const BlockAssignment& a) {
  std::vector<std::string> out;
  const int N = g.num_vertices();
  const int r = g.r();
  for (int v = 0; v < N; ++v) {
    if (a.w_row[v] < 0 || a.w_row[v] >= a.s()) out.push_back("vertex " + std::to_string(v) + " has no block");
    if (a.good[v] && a.w_row[v] != a.x_row[v])
      out.push_back("good vertex " + std::to_string(v) + " left its block");
  }
  std::set<int> flagged;
  for (const auto& b : a.bad) {
    flagged.insert(b.v);
    if (b.reason == "fill") {
      if (a.x_row[b.v] >= 0) out.push_back("fill vertex " + std::to_string(b.v) + " lies in X");
      continue;
    }
    int cnt = 0;
    if (b.reason == "diagonal") {
      cnt = g.degree_into(b.v, a.x_blocks[b.row * r + b.col]);
    } else {
      const Bitset& blk = a.x_blocks[b.row * r + b.col];
      for (std::size_t w = blk.next(0); w < blk.size(); w = blk.next(w + 1))
        if (a.in_t[w] == a.in_t[b.v] && g.adjacent(b.v, static_cast<int>(w))) ++cnt;
    }
    if (cnt != b.count || cnt > b.threshold)
      out.push_back("bad record for " + std::to_string(b.v) + " does not recheck");
  }
  for (int v = 0; v < N; ++v)
    if (!a.good[v] && !flagged.count(v)) out.push_back("bad vertex " + std::to_string(v) + " has no record");
  return out;
}

// ---- families ---------------------------------------------------------------

std::vector<std::vector<std::vector<int>>> column_families(int r, const std::vector<int>& sizes) {
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<std::vector<int>> cur(sizes.size());
  std::vector<char> used(r, 0);
  std::function<void(std::size_t, int)> fill = [&](std::size_t row, int from) {
    if (row == sizes.size()) {
      out.push_back(cur);
      return;
    }
    if (static_cast<int>(cur[row].size()) == sizes[row]) {
      fill(row + 1, 0);
      return;
    }
    for (int c = from; c < r; ++c) {
      if (used[c]) continue;
      used[c] = 1;
      cur[row].push_back(c);
      fill(row, c + 1);
      cur[row].pop_back();
      used[c] = 0;
    }
  };
  fill(0, 0);
  return out;
}

// ---- extension --------------------------------------------------------------

namespace {

struct Plan {
  std::vector<int> col_row;       // column -> row or -1
  std::vector<int> order;         // columns to fill
  std::vector<char> seed_in_row;  // row has a seed vertex
  std::vector<int> row_seed_col;  // any column of the row holding a seed vertex
  std::string error;
};

Plan make_plan(const MultipartiteGraph& g, const BlockAssignment& a, const std::vector<int>& seed,
               const std::vector<std::vector<int>>& A) {
  Plan pl;
  const int r = g.r();
  const int s = a.s();
  pl.col_row.assign(r, -1);
  pl.seed_in_row.assign(s, 0);
  if (static_cast<int>(A.size()) != s) {
    pl.error = "need one column set per row";
    return pl;
  }
  for (int i = 0; i < s; ++i)
    for (int j : A[i]) {
      if (j < 0 || j >= r || pl.col_row[j] >= 0) {
        pl.error = "column sets overlap or are out of range";
        return pl;
      }
      pl.col_row[j] = i;
    }
  std::vector<char> seed_col(r, 0);
  for (int v : seed) {
    const int j = g.class_of(v);
    if (seed_col[j]) {
      pl.error = "two seed vertices share a column";
      return pl;
    }
    seed_col[j] = 1;
    if (pl.col_row[j] != a.w_row[v]) {
      pl.error = "seed vertex " + std::to_string(v) + " lies outside the designated blocks";
      return pl;
    }
    pl.seed_in_row[a.w_row[v]] = 1;
  }
  const int v1 = seed.empty() ? -1 : seed[0];
  std::vector<int> designated(s, -1);
  for (int i = 0; i < s; ++i) {
    const int sz = static_cast<int>(A[i].size());
    bool cond_a = std::all_of(A[i].begin(), A[i].end(), [&](int j) { return seed_col[j]; });
    bool cond_b = sz <= a.p[i] && seed.empty();
    bool cond_c = false;
    if (sz <= a.p[i] && !seed.empty())
      for (int j : A[i])
        if (!seed_col[j] && !a.block_bad_for(g, v1, i, j)) {
          cond_c = true;
          designated[i] = j;
          break;
        }
    bool cond_d = sz <= a.p[i] && v1 >= 0 && a.w_row[v1] == i;
    bool cond_e = sz < a.p[i];
    if (!(cond_a || cond_b || cond_c || cond_d || cond_e)) {
      pl.error = "row " + std::to_string(i) + " meets none of the extension conditions";
      return pl;
    }
  }
  std::vector<int> late;
  for (int j = 0; j < r; ++j) {
    if (pl.col_row[j] < 0 || seed_col[j]) continue;
    if (designated[pl.col_row[j]] == j)
      late.push_back(j);
    else
      pl.order.push_back(j);
  }
  pl.order.insert(pl.order.end(), late.begin(), late.end());
  return pl;
}

}  // namespace

ExtendResult extend_clique(const MultipartiteGraph& g, const BlockAssignment& a, const ExtendRequest& req) {
  Plan pl = make_plan(g, a, req.seed, req.A);
  if (!pl.error.empty()) throw PreconditionError("extend_clique: " + pl.error);
  if (!is_clique(g, req.seed)) throw PreconditionError("extend_clique: seed is not a clique");
  for (std::size_t q = 1; q < req.seed.size(); ++q)
    if (!a.is_good(req.seed[q])) throw PreconditionError("extend_clique: only the first seed vertex may be bad");
  const int r = g.r();
  const int s = a.s();
  const int v1 = req.seed.empty() ? -1 : req.seed[0];
  std::vector<int> parity = req.parity;
  parity.resize(s, -1);

  Bitset common = g.empty_set();
  common.set_range(0, g.num_vertices());
  for (int v : req.seed) common &= g.neighbors(v);
  common.subtract(req.forbidden);

  // per column candidate pools (good vertices of the block unless all_good)
  std::vector<Bitset> pool(r);
  for (int j : pl.order) {
    const int i = pl.col_row[j];
    pool[j] = a.block_set(g, i, j);
    if (!a.all_good)
      for (std::size_t v = pool[j].next(0); v < pool[j].size(); v = pool[j].next(v + 1))
        if (!a.good[v]) pool[j].reset(v);
  }

  std::vector<int> chosen;
  std::uint64_t nodes = 0;
  std::size_t deepest = 0;
  bool out_of_budget = false;
  std::function<bool(std::size_t, const Bitset&)> go = [&](std::size_t step, const Bitset& cand_all) -> bool {
    if (step == pl.order.size()) return true;
    deepest = std::max(deepest, step);
    const int j = pl.order[step];
    const int i = pl.col_row[j];
    Bitset cand = cand_all & pool[j];
    // (ii): two fresh vertices in a pair-complete row share a half
    int want_s = -1;
    if (a.pair_complete[i] && req.A[i].size() == 2 && !pl.seed_in_row[i]) {
      for (int u : chosen)
        if (a.w_row[u] == i) want_s = a.in_s[u];
    }
    // (iii): a single column in a pair-complete row with a target parity
    if (a.pair_complete[i] && req.A[i].size() == 1 && parity[i] >= 0 &&
        (v1 < 0 || !a.block_bad_for(g, v1, i, j)))
      want_s = parity[i];
    for (std::size_t v = cand.next(0); v < cand.size(); v = cand.next(v + 1)) {
      if (want_s >= 0 && a.in_s[v] != want_s) continue;
      if (++nodes > req.budget) {
        out_of_budget = true;
        return false;
      }
      for (int u : req.seed)
        if (!g.adjacent(u, static_cast<int>(v))) throw InternalError("extend_clique: chose a non-neighbour");
      for (int u : chosen)
        if (!g.adjacent(u, static_cast<int>(v))) throw InternalError("extend_clique: chose a non-neighbour");
      chosen.push_back(static_cast<int>(v));
      if (go(step + 1, cand_all & g.neighbors(static_cast<int>(v)))) return true;
      chosen.pop_back();
      if (out_of_budget) return false;
    }
    return false;
  };

  ExtendResult res;
  if (go(0, common)) {
    Clique c = req.seed;
    c.insert(c.end(), chosen.begin(), chosen.end());
    std::sort(c.begin(), c.end());
    if (!is_clique(g, c)) throw InternalError("extend_clique: result is not a clique");
    res.clique = c;
    return res;
  }
  if (out_of_budget) {
    res.failure = "extension budget exhausted";
  } else {
    const int j = pl.order[std::min(deepest, pl.order.size() - 1)];
    res.failure = "no admissible vertex in " + cell_name(pl.col_row[j], j) + " at step " +
                  std::to_string(deepest + 1);
  }
  return res;
}

// ---- building blocks --------------------------------------------------------

namespace {

std::vector<int> row_counts(const BlockAssignment& a, const Clique& c) {
  std::vector<int> cnt(a.s(), 0);
  for (int v : c) ++cnt[a.w_row[v]];
  return cnt;
}

int s_count(const BlockAssignment& a, const Clique& c, int i) {
  int cnt = 0;
  for (int v : c)
    if (a.w_row[v] == i && a.in_s[v]) ++cnt;
  return cnt;
}

bool parity_ok(const BlockAssignment& a, const Clique& c, int skip1, int skip2) {
  for (int i = 0; i < a.s(); ++i)
    if (a.pair_complete[i] && i != skip1 && i != skip2 && s_count(a, c, i) % 2 != 0) return false;
  return true;
}

bool properly(const BlockAssignment& a, const Clique& c, int outside) {
  return row_counts(a, c) == a.p && parity_ok(a, c, outside, outside);
}

bool ij_distributed(const BlockAssignment& a, const Clique& c, int i, int j) {
  auto cnt = row_counts(a, c);
  for (int l = 0; l < a.s(); ++l) {
    int want = a.p[l] + (l == i ? 1 : 0) - (l == j ? 1 : 0);
    if (cnt[l] != want) return false;
  }
  return parity_ok(a, c, i, j);
}

std::vector<std::vector<int>> family_of(const MultipartiteGraph& g, const BlockAssignment& a, const Clique& c) {
  std::vector<std::vector<int>> f(a.s());
  for (int v : c) f[a.w_row[v]].push_back(g.class_of(v));
  for (auto& x : f) std::sort(x.begin(), x.end());
  return f;
}

// Families over columns not in `fixed`, with per-row sizes, each row's set
// merged with its fixed columns. Ordered so families agreeing with the
// transversal of good blocks (w.r.t. v1, rows in `rect_rows`) come first.
std::vector<std::vector<std::vector<int>>> candidate_families(
    const MultipartiteGraph& g, const BlockAssignment& a, int v1, const std::vector<std::vector<int>>& fixed,
    const std::vector<int>& extra_sizes, const std::vector<int>& rect_rows) {
  const int r = g.r();
  const int s = a.s();
  std::vector<int> free_cols;
  std::vector<char> taken(r, 0);
  for (const auto& f : fixed)
    for (int j : f) taken[j] = 1;
  for (int j = 0; j < r; ++j)
    if (!taken[j]) free_cols.push_back(j);
  auto sub = column_families(static_cast<int>(free_cols.size()), extra_sizes);
  std::vector<std::vector<std::vector<int>>> fams;
  for (auto& f : sub) {
    std::vector<std::vector<int>> full(s);
    for (int i = 0; i < s; ++i) {
      full[i] = fixed[i];
      for (int x : f[i]) full[i].push_back(free_cols[x]);
      std::sort(full[i].begin(), full[i].end());
    }
    fams.push_back(std::move(full));
  }
  if (v1 < 0 || rect_rows.empty()) return fams;

  Rectangle rect{static_cast<int>(rect_rows.size()), static_cast<int>(free_cols.size()), {}};
  if (rect.s > rect.r) return fams;
  for (int ri = 0; ri < rect.s; ++ri)
    for (int ci = 0; ci < rect.r; ++ci)
      if (a.block_bad_for(g, v1, rect_rows[ri], free_cols[ci])) rect.colored.insert({ri, ci});
  auto t = find_transversal(rect);
  if (!t) return fams;
  std::vector<int> want(s, -1);
  for (const Cell& c : *t) want[rect_rows[c.row]] = free_cols[c.col];
  std::stable_partition(fams.begin(), fams.end(), [&](const std::vector<std::vector<int>>& f) {
    for (int i = 0; i < s; ++i)
      if (want[i] >= 0 && !std::binary_search(f[i].begin(), f[i].end(), want[i])) return false;
    return true;
  });
  return fams;
}

bool conditions_hold(const MultipartiteGraph& g, const BlockAssignment& a, const std::vector<int>& seed,
                     const std::vector<std::vector<int>>& A) {
  return make_plan(g, a, seed, A).error.empty();
}

// Tries families in order until one extends.
BlockResult try_families(const MultipartiteGraph& g, const BlockAssignment& a, const std::vector<int>& seed,
                         const std::vector<std::vector<std::vector<int>>>& fams, const std::vector<int>& parity,
                         const Bitset& forbidden, std::uint64_t budget, const BlockRequest& req,
                         const std::function<bool(const Clique&)>& check) {
  BlockResult out;
  int tried = 0;
  for (const auto& f : fams) {
    if (req.accept && !req.accept(f)) continue;
    if (!conditions_hold(g, a, seed, f)) continue;
    ++tried;
    ExtendRequest er{seed, f, parity, forbidden, budget};
    auto ext = extend_clique(g, a, er);
    if (ext.clique) {
      if (!check(*ext.clique)) throw InternalError("building_block: clique has the wrong distribution");
      out.clique = ext.clique;
      out.family = family_of(g, a, *ext.clique);
      return out;
    }
    if (out.failure.empty()) out.failure = ext.failure;
  }
  if (tried == 0) out.failure = "no admissible column family";
  return out;
}

}  // namespace

BlockResult building_block(const MultipartiteGraph& g, const BlockAssignment& a, const BlockRequest& req,
                           const Bitset& forbidden, std::uint64_t budget) {
  const int s = a.s();
  const int r = g.r();
  std::vector<int> none(s, -1);
  BlockResult out;
  switch (req.kind) {
    case BlockKind::Proper: {
      std::vector<std::vector<std::vector<int>>> fams;
      if (!req.family.empty())
        fams.push_back(req.family);
      else
        fams = column_families(r, a.p);
      return try_families(g, a, {}, fams, none, forbidden, budget, req,
                          [&](const Clique& c) { return properly(a, c, -1); });
    }
    case BlockKind::ThroughVertex: {
      const int v = req.v;
      if (forbidden.test(v)) throw PreconditionError("building_block: vertex is forbidden");
      const int l = a.w_row[v];
      const int jv = g.class_of(v);
      if (a.pair_complete[l]) {
        Bitset nb = g.neighbors(v) & a.block_set(g, l, 0);
        for (int j = 1; j < r; ++j) nb |= g.neighbors(v) & a.block_set(g, l, j);
        std::string first;
        for (std::size_t u = nb.next(0); u < nb.size(); u = nb.next(u + 1)) {
          if (!a.is_good(static_cast<int>(u)) || forbidden.test(u) || a.in_s[u] != a.in_s[v]) continue;
          BlockRequest sub{BlockKind::ProperOutside, l, -1, v, static_cast<int>(u), -1, {}, req.accept};
          auto res = building_block(g, a, sub, forbidden, budget);
          if (res.clique) {
            if (!properly(a, *res.clique, -1)) throw InternalError("building_block: through-vertex parity");
            return res;
          }
          if (first.empty()) first = res.failure;
        }
        out.failure = first.empty() ? "no good neighbour of " + std::to_string(v) + " in its half" : first;
        return out;
      }
      std::vector<std::vector<int>> fixed(s);
      fixed[l] = {jv};
      std::vector<int> sizes = a.p;
      sizes[l] -= 1;
      std::vector<int> rect_rows;
      for (int i = 0; i < s; ++i)
        if (i != l) rect_rows.push_back(i);
      auto fams = candidate_families(g, a, v, fixed, sizes, rect_rows);
      return try_families(g, a, {v}, fams, none, forbidden, budget, req,
                          [&](const Clique& c) { return properly(a, c, -1) && std::binary_search(c.begin(), c.end(), v); });
    }
    case BlockKind::Ij: {
      const int i = req.i, j = req.j;
      if (i == j || i < 0 || j < 0 || i >= s || j >= s || a.p[i] < 2)
        throw PreconditionError("building_block: ij needs distinct rows with p_i >= 2");
      // seeds: K_{p_i+1} on good vertices of row i
      const int want = a.p[i] + 1;
      std::vector<int> seed;
      std::string first;
      int seeds_tried = 0;
      const int seed_cap = 400;
      BlockResult found;
      std::function<bool(int, const Bitset&)> grow = [&](int from_col, const Bitset& cand) -> bool {
        if (static_cast<int>(seed.size()) == want) {
          if (a.pair_complete[i] && req.parity >= 0) {
            int cnt = 0;
            for (int u : seed) cnt += a.in_s[u];
            if (cnt != req.parity) return false;
          }
          if (++seeds_tried > seed_cap) return true;
          std::vector<std::vector<int>> fixed(s);
          for (int u : seed) fixed[i].push_back(g.class_of(u));
          std::vector<int> sizes = a.p;
          sizes[i] = 0;
          sizes[j] -= 1;
          auto fams = candidate_families(g, a, -1, fixed, sizes, {});
          Clique sd = seed;
          auto res = try_families(g, a, sd, fams, none, forbidden, budget, req,
                                  [&](const Clique& c) { return ij_distributed(a, c, i, j); });
          if (res.clique) {
            found = res;
            return true;
          }
          if (first.empty()) first = res.failure;
          return false;
        }
        for (int col = from_col; col < r; ++col) {
          Bitset blk = a.block_set(g, i, col) & cand;
          for (std::size_t u = blk.next(0); u < blk.size(); u = blk.next(u + 1)) {
            if (!a.is_good(static_cast<int>(u)) || forbidden.test(u)) continue;
            // keep halves uniform when a parity target is set
            if (a.pair_complete[i] && req.parity >= 0 && a.in_s[u] != (req.parity > 0 ? 1 : 0)) continue;
            seed.push_back(static_cast<int>(u));
            if (grow(col + 1, cand & g.neighbors(static_cast<int>(u)))) return true;
            seed.pop_back();
          }
        }
        return false;
      };
      Bitset all = g.empty_set();
      all.set_range(0, g.num_vertices());
      grow(0, all);
      if (found.clique) return found;
      out.failure = first.empty() ? "no good K_" + std::to_string(want) + " seed in row " + std::to_string(i)
                                  : first;
      if (seeds_tried > seed_cap) out.failure += " (seed cap reached)";
      return out;
    }
    case BlockKind::IjEdge: {
      const int i = req.i, j = req.j, u = req.u, v = req.v;
      if (i == j || a.p[i] != 1) throw PreconditionError("building_block: edge kind needs p_i = 1 and i != j");
      if (a.w_row[u] != i || a.w_row[v] != i || !g.adjacent(u, v) || !a.is_good(u))
        throw PreconditionError("building_block: edge must lie in row i with a good end u");
      if (forbidden.test(u) || forbidden.test(v)) throw PreconditionError("building_block: edge is forbidden");
      std::vector<std::vector<int>> fixed(s);
      fixed[i] = {std::min(g.class_of(u), g.class_of(v)), std::max(g.class_of(u), g.class_of(v))};
      std::vector<int> sizes = a.p;
      sizes[i] = 0;
      sizes[j] -= 1;
      std::vector<int> rect_rows;
      for (int l = 0; l < s; ++l)
        if (l != i && !(l == j && a.p[j] == 1)) rect_rows.push_back(l);
      auto fams = candidate_families(g, a, v, fixed, sizes, rect_rows);
      std::vector<int> parity = none;
      if (req.parity >= 0 && a.pair_complete[j]) {
        parity[j] = req.parity;
        // the target binds only through a good single block
        std::erase_if(fams, [&](const std::vector<std::vector<int>>& f) {
          return f[j].size() != 1 || a.block_bad_for(g, v, j, f[j][0]);
        });
      }
      auto res = try_families(g, a, {v, u}, fams, parity, forbidden, budget, req, [&](const Clique& c) {
        if (!ij_distributed(a, c, i, j)) return false;
        return !(req.parity >= 0 && a.pair_complete[j] && s_count(a, c, j) != req.parity);
      });
      return res;
    }
    case BlockKind::ProperOutside: {
      const int l = req.i, u = req.u, v = req.v;
      if (!a.pair_complete[l]) throw PreconditionError("building_block: outside kind needs a pair-complete row");
      if (a.w_row[u] != l || a.w_row[v] != l || !g.adjacent(u, v) || !a.is_good(u))
        throw PreconditionError("building_block: edge must lie in row l with a good end u");
      std::vector<std::vector<int>> fixed(s);
      fixed[l] = {std::min(g.class_of(u), g.class_of(v)), std::max(g.class_of(u), g.class_of(v))};
      std::vector<int> sizes = a.p;
      sizes[l] = 0;
      std::vector<int> rect_rows;
      for (int i = 0; i < s; ++i)
        if (i != l) rect_rows.push_back(i);
      auto fams = candidate_families(g, a, v, fixed, sizes, rect_rows);
      return try_families(g, a, {v, u}, fams, none, forbidden, budget, req,
                          [&](const Clique& c) { return properly(a, c, l); });
    }
  }
  return out;
}

// ---- ledger -----------------------------------------------------------------

Bitset DeletionLedger::covered(const MultipartiteGraph& g) const {
  Bitset b = g.empty_set();
  for (const auto& e : entries)
    for (int v : e.clique) b.set(v);
  return b;
}

std::vector<LedgerEntry> DeletionLedger::stage(int m) const {
  std::vector<LedgerEntry> out;
  for (const auto& e : entries)
    if (e.stage == m) out.push_back(e);
  return out;
}

std::vector<std::string> verify_ledger(const MultipartiteGraph& g, const BlockAssignment& a,
                                       const DeletionLedger& ledger, int k) {
  std::vector<std::string> out;
  std::vector<int> seen(g.num_vertices(), -1);
  for (std::size_t e = 0; e < ledger.entries.size(); ++e) {
    const auto& en = ledger.entries[e];
    const auto& c = en.clique;
    std::ostringstream name;
    name << "M_" << en.stage << " clique #" << e;
    if (static_cast<int>(c.size()) != k) out.push_back(name.str() + " has wrong size");
    if (!is_clique(g, c)) out.push_back(name.str() + " is not a clique");
    std::set<int> cls;
    for (int v : c) {
      cls.insert(g.class_of(v));
      if (seen[v] >= 0) out.push_back(name.str() + " reuses vertex " + std::to_string(v));
      seen[v] = static_cast<int>(e);
    }
    if (static_cast<int>(cls.size()) != static_cast<int>(c.size()))
      out.push_back(name.str() + " repeats a class");
    bool tag_ok = true;
    if (en.tag == "proper")
      tag_ok = properly(a, c, -1);
    else if (en.tag == "proper_outside")
      tag_ok = properly(a, c, en.outside);
    else if (en.tag == "ij")
      tag_ok = ij_distributed(a, c, en.row_plus, en.row_minus);
    else
      tag_ok = false;
    if (!tag_ok) out.push_back(name.str() + " fails its tag '" + en.tag + "'");
  }
  return out;
}

}  // namespace kpack
