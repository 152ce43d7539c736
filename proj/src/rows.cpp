#include <limits>
#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "kpack/errors.hpp"
#include "kpack/matching.hpp"
#include "kpack/pipeline.hpp"

namespace kpack {

namespace {

std::int64_t factorial(int m) {
  std::int64_t f = 1;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

std::int64_t binom(int a, int b) {
  if (b < 0 || b > a) return 0;
  std::int64_t c = 1;
  for (int i = 1; i <= b; ++i) c = c * (a - b + i) / i;
  return c;
}

Subgraph row_graph(const MultipartiteGraph& g, const FinalBlocks& x, int i) {
  return induced_subgraph(g, x.blocks[i]);
}

CliquePacking lift(const Subgraph& sub, const CliquePacking& m) {
  CliquePacking out;
  for (const auto& c : m.cliques) {
    Clique d;
    for (int v : c) d.push_back(sub.to_parent[v]);
    std::sort(d.begin(), d.end());
    out.cliques.push_back(d);
  }
  std::sort(out.cliques.begin(), out.cliques.end());
  return out;
}

// Balanced perfect K_p-packing of the row, re-verified on g.
bool row_packing_ok(const MultipartiteGraph& g, const FinalBlocks& x, int i, const CliquePacking& m) {
  Subgraph sub = row_graph(g, x, i);
  std::map<int, int> to_sub;
  for (std::size_t t = 0; t < sub.to_parent.size(); ++t) to_sub[sub.to_parent[t]] = static_cast<int>(t);
  CliquePacking local;
  for (const auto& c : m.cliques) {
    Clique d;
    for (int v : c) {
      auto it = to_sub.find(v);
      if (it == to_sub.end()) return false;
      d.push_back(it->second);
    }
    std::sort(d.begin(), d.end());
    local.cliques.push_back(d);
  }
  return verify_packing(sub.graph, local, x.p[i], true).ok && is_balanced(sub.graph, local, x.p[i]);
}

void remove_from_blocks(FinalBlocks& x, const Bitset& gone) {
  for (auto& row : x.blocks)
    for (auto& blk : row) std::erase_if(blk, [&](int v) { return gone.test(v); });
  for (auto& row : x.halves)
    for (auto& blk : row) std::erase_if(blk, [&](int v) { return gone.test(v); });
}

// Replaces x by y in an M_2 clique and y by x in the final blocks.
void swap_into_clique(const MultipartiteGraph& g, const BlockAssignment& a, FinalBlocks& x, LedgerEntry& e,
                      int xv, int yv, int row) {
  std::replace(e.clique.begin(), e.clique.end(), xv, yv);
  std::sort(e.clique.begin(), e.clique.end());
  for (auto& blk : x.blocks[row]) std::replace(blk.begin(), blk.end(), yv, xv);
  for (auto& blk : x.blocks[row]) std::sort(blk.begin(), blk.end());
  if (!x.halves[row].empty()) {
    for (auto& blk : x.halves[row]) std::erase(blk, yv);
    if (a.in_s[xv]) {
      const int col = g.class_of(xv);
      x.halves[row][col].push_back(xv);
      std::sort(x.halves[row][col].begin(), x.halves[row][col].end());
    }
  }
}

}  // namespace

bool fix_row_parity_and_matchability(const MultipartiteGraph& g, BlockAssignment& a, FinalBlocks& x,
                                     DeletionLedger& ledger, const PipelineParams& params,
                                     RowPackings& out, StageReport& report) {
  report.name = "rows";
  const int s = a.s();
  const int r = g.r();
  out.rows.assign(s, {});
  std::vector<int> heavy;
  for (int i = 0; i < s; ++i)
    if (a.p[i] >= 2) heavy.push_back(i);
  auto fail = [&](const std::string& why) {
    report.ok = false;
    report.failure = why;
    return false;
  };

  for (int i : heavy) {
    const int p = a.p[i];
    if (p >= 3) {
      Subgraph sub = row_graph(g, x, i);
      auto res = exact_balanced_clique_packing(sub.graph, p, true, params.budget);
      if (!res.packing)
        return fail("row " + std::to_string(i) + ": " +
                    (res.completed ? "no balanced perfect K_" + std::to_string(p) + "-packing (proven absent)"
                                   : "search budget exhausted"));
      out.rows[i] = lift(sub, *res.packing);
      out.log.push_back("row " + std::to_string(i) + ": exact balanced K_" + std::to_string(p) + "-packing, " +
                        std::to_string(res.nodes) + " nodes");
      continue;
    }
    if (a.pair_complete[i]) {
      int half = 0;
      for (auto& blk : x.halves[i]) half += static_cast<int>(blk.size());
      if (half % 2 != 0) {
        if (heavy.size() < 2) throw InternalError("rows: odd half in the extremal row after M1");
        // swap a vertex of an i'i-distributed M_2 clique
        bool fixed = false;
        for (auto& e : ledger.entries) {
          if (e.stage != 2 || e.tag != "ij" || e.row_minus != i) continue;
          int xv = -1;
          for (int v : e.clique)
            if (a.w_row[v] == i) xv = v;
          if (xv < 0) continue;
          const int col = g.class_of(xv);
          Bitset cand = g.make_set(x.blocks[i][col]);
          for (int v : e.clique)
            if (v != xv) cand &= g.neighbors(v);
          for (std::size_t y = cand.next(0); y < cand.size(); y = cand.next(y + 1)) {
            if (a.in_s[xv] == a.in_s[y]) continue;
            const int yv = static_cast<int>(y);
            swap_into_clique(g, a, x, e, xv, yv, i);
            ledger.events.push_back("M2 clique swap: " + std::to_string(xv) + " -> " + std::to_string(yv) +
                                    " to fix the half parity of row " + std::to_string(i));
            fixed = true;
            break;
          }
          if (fixed) break;
        }
        if (!fixed) return fail("row " + std::to_string(i) + ": odd half and no M2 clique admits a swap");
      }
      Subgraph sub = row_graph(g, x, i);
      std::map<int, int> to_sub;
      for (std::size_t t = 0; t < sub.to_parent.size(); ++t) to_sub[sub.to_parent[t]] = static_cast<int>(t);
      std::vector<std::vector<int>> halves(r);
      for (int j = 0; j < r; ++j)
        for (int v : x.halves[i][j]) halves[j].push_back(to_sub.at(v));
      try {
        auto pm = pair_complete_balanced_matching(sub.graph, halves, params.zeta);
        out.rows[i] = lift(sub, pm.matching);
        out.log.push_back("row " + std::to_string(i) + ": pair-complete balanced matching, n' = " +
                          std::to_string(pm.n_prime) + (pm.in_window ? "" : " (outside the asymptotic window)"));
        continue;
      } catch (const std::runtime_error& e) {
        out.log.push_back("row " + std::to_string(i) + ": pair-complete matching failed (" + e.what() +
                          "), trying exact search");
      }
      auto res = exact_balanced_clique_packing(sub.graph, 2, true, params.budget);
      if (!res.packing)
        return fail("row " + std::to_string(i) + ": " +
                    (res.completed ? "no balanced perfect matching (proven absent)" : "search budget exhausted"));
      out.rows[i] = lift(sub, *res.packing);
      continue;
    }

    // p = 2, not pair-complete
    {
      Subgraph sub = row_graph(g, x, i);
      auto res = exact_balanced_clique_packing(sub.graph, 2, true, params.budget);
      if (res.packing) {
        out.rows[i] = lift(sub, *res.packing);
        out.log.push_back("row " + std::to_string(i) + ": exact balanced perfect matching");
        continue;
      }
      out.log.push_back("row " + std::to_string(i) + ": exact balanced matching " +
                        (res.completed ? "absent" : "budget exhausted"));
    }
    if (heavy.size() >= 2) {
      // fake edges y(x)x1 for i'i-distributed cliques of M_2
      Subgraph sub = row_graph(g, x, i);
      std::map<int, int> to_sub;
      for (std::size_t t = 0; t < sub.to_parent.size(); ++t) to_sub[sub.to_parent[t]] = static_cast<int>(t);
      MultipartiteGraph star = sub.graph;
      struct Fake {
        std::size_t entry;
        int xv, yv;
      };
      std::map<std::pair<int, int>, Fake> fake;  // (y, x1) in g ids
      std::set<int> used_y;
      const Bitset row_set = [&] {
        Bitset b = g.empty_set();
        for (auto& blk : x.blocks[i])
          for (int v : blk) b.set(v);
        return b;
      }();
      for (std::size_t e = 0; e < ledger.entries.size(); ++e) {
        const auto& en = ledger.entries[e];
        if (en.stage != 2 || en.tag != "ij" || en.row_minus != i) continue;
        int xv = -1;
        for (int v : en.clique)
          if (a.w_row[v] == i) xv = v;
        if (xv < 0) continue;
        const int q = g.class_of(xv);
        Bitset cand = g.make_set(x.blocks[i][q]);
        for (int v : en.clique)
          if (v != xv) cand &= g.neighbors(v);
        int yv = -1;
        for (std::size_t y = cand.next(0); y < cand.size(); y = cand.next(y + 1))
          if (!used_y.count(static_cast<int>(y))) {
            yv = static_cast<int>(y);
            break;
          }
        if (yv < 0) continue;
        used_y.insert(yv);
        Bitset n1 = g.neighbors(xv) & row_set;
        for (std::size_t x1 = n1.next(0); x1 < n1.size(); x1 = n1.next(x1 + 1)) {
          const int c1 = g.class_of(static_cast<int>(x1));
          if (c1 == q || g.adjacent(yv, static_cast<int>(x1))) continue;
          // path x x1 x2 x3 y through two further columns
          bool path = false;
          Bitset n2 = g.neighbors(static_cast<int>(x1)) & row_set;
          for (std::size_t x2 = n2.next(0); x2 < n2.size() && !path; x2 = n2.next(x2 + 1)) {
            const int c2 = g.class_of(static_cast<int>(x2));
            if (c2 == q || c2 == c1) continue;
            Bitset n3 = g.neighbors(static_cast<int>(x2)) & g.neighbors(yv) & row_set;
            for (std::size_t x3 = n3.next(0); x3 < n3.size(); x3 = n3.next(x3 + 1)) {
              const int c3 = g.class_of(static_cast<int>(x3));
              if (c3 != q && c3 != c1 && c3 != c2) {
                path = true;
                break;
              }
            }
          }
          if (!path) continue;
          star.add_edge(to_sub.at(yv), to_sub.at(static_cast<int>(x1)));
          fake[{yv, static_cast<int>(x1)}] = Fake{e, xv, yv};
        }
      }
      auto res = exact_balanced_clique_packing(star, 2, true, params.budget);
      if (!res.packing)
        return fail("row " + std::to_string(i) + ": no balanced perfect matching even with " +
                    std::to_string(fake.size()) + " fake edges" + (res.completed ? "" : " (budget exhausted)"));
      CliquePacking m = lift(sub, *res.packing);
      int substituted = 0;
      for (auto& c : m.cliques) {
        int u = c[0], w = c[1];
        if (g.adjacent(u, w)) continue;
        auto it = fake.find({u, w});
        if (it == fake.end()) it = fake.find({w, u});
        if (it == fake.end()) throw InternalError("rows: matching edge is neither real nor fake");
        const Fake f = it->second;
        const int x1 = (u == f.yv) ? w : u;
        swap_into_clique(g, a, x, ledger.entries[f.entry], f.xv, f.yv, i);
        c = {std::min(f.xv, x1), std::max(f.xv, x1)};
        ++substituted;
      }
      std::sort(m.cliques.begin(), m.cliques.end());
      out.rows[i] = m;
      out.log.push_back("row " + std::to_string(i) + ": balanced matching via " + std::to_string(fake.size()) +
                        " fake edges, " + std::to_string(substituted) + " substituted");
      continue;
    }

    // single heavy row: delete an extension of the unbalanced surplus
    Subgraph sub = row_graph(g, x, i);
    auto any = exact_balanced_clique_packing(sub.graph, 2, false, params.budget);
    if (!any.packing) return fail("row " + std::to_string(i) + ": no perfect matching in the row");
    CliquePacking mprime = lift(sub, *any.packing);
    std::map<IndexSet, std::vector<Clique>> by_idx;
    for (const auto& c : mprime.cliques) by_idx[index_set(g, c)].push_back(c);
    const std::int64_t pairs = binom(r, 2);
    std::int64_t t = static_cast<std::int64_t>(by_idx.size()) == pairs ? std::numeric_limits<std::int64_t>::max() : 0;
    for (auto& [idx, v] : by_idx) t = std::min<std::int64_t>(t, static_cast<std::int64_t>(v.size()));
    const std::int64_t rf = factorial(r);
    while (t > 0 && (t * pairs) % (r * rf) != 0) --t;
    const int D = x.n_prime - static_cast<int>(t * pairs / r);
    CliquePacking m0, m1;
    for (auto& [idx, v] : by_idx)
      for (std::size_t q = 0; q < v.size(); ++q) (static_cast<std::int64_t>(q) < t ? m0 : m1).cliques.push_back(v[q]);
    if (static_cast<int>(m1.cliques.size()) != D * r) throw InternalError("rows: surplus size is not D r");
    // extend the surplus through each weight-1 row
    std::vector<Clique> grow = m1.cliques;
    Bitset used = g.empty_set();
    for (const auto& c : grow)
      for (int v : c) used.set(v);
    for (int l = 0; l < s && D > 0; ++l) {
      if (l == i) continue;
      BipartiteGraph b{static_cast<int>(grow.size()), r * D, std::vector<std::vector<int>>(grow.size())};
      for (std::size_t c = 0; c < grow.size(); ++c) {
        std::set<int> cols;
        for (int v : grow[c]) cols.insert(g.class_of(v));
        for (int j = 0; j < r; ++j)
          if (!cols.count(j))
            for (int q = 0; q < D; ++q) b.adj[c].push_back(j * D + q);
      }
      auto reg = regular_bipartite_perfect_matching(b);
      if (!reg.regular || !reg.matching) throw InternalError("rows: clique/column graph not regular");
      // per column, assign distinct vertices of X'^l_j adjacent to the whole clique
      std::vector<std::vector<int>> want(r);
      for (std::size_t c = 0; c < grow.size(); ++c) want[(*reg.matching)[c] / D].push_back(static_cast<int>(c));
      for (int j = 0; j < r; ++j) {
        const auto& pool = x.blocks[l][j];
        BipartiteGraph vb{static_cast<int>(want[j].size()), static_cast<int>(pool.size()),
                          std::vector<std::vector<int>>(want[j].size())};
        for (std::size_t c = 0; c < want[j].size(); ++c)
          for (std::size_t t2 = 0; t2 < pool.size(); ++t2) {
            const int w = pool[t2];
            if (used.test(w)) continue;
            bool ok = true;
            for (int v : grow[want[j][c]]) ok = ok && g.adjacent(v, w);
            if (ok) vb.adj[c].push_back(static_cast<int>(t2));
          }
        auto mate = max_bipartite_matching(vb);
        for (std::size_t c = 0; c < want[j].size(); ++c) {
          if (mate[c] < 0)
            return fail("row " + std::to_string(i) + ": cannot extend a surplus edge into block (" +
                        std::to_string(l) + "," + std::to_string(j) + ")");
          const int w = pool[mate[c]];
          grow[want[j][c]].push_back(w);
          used.set(w);
        }
      }
    }
    for (auto& c : grow) {
      std::sort(c.begin(), c.end());
      ledger.entries.push_back(LedgerEntry{c, 6, "proper", -1, -1, -1});
    }
    remove_from_blocks(x, used);
    x.n_prime -= D;
    for (int l = 0; l < s; ++l)
      for (int j = 0; j < r; ++j)
        if (static_cast<int>(x.blocks[l][j].size()) != a.p[l] * x.n_prime)
          throw InternalError("rows: block sizes off after the surplus deletion");
    if (x.n_prime % rf != 0) throw InternalError("rows: r! does not divide n''");
    out.rows[i] = m0;
    std::sort(out.rows[i].cliques.begin(), out.rows[i].cliques.end());
    out.log.push_back("row " + std::to_string(i) + ": balanced part of a perfect matching, D = " + std::to_string(D) +
                      ", " + std::to_string(grow.size()) + " extended cliques deleted");
  }

  for (int i = 0; i < s; ++i) {
    if (a.p[i] != 1) continue;
    CliquePacking m;
    for (auto& blk : x.blocks[i])
      for (int v : blk) m.cliques.push_back({v});
    std::sort(m.cliques.begin(), m.cliques.end());
    out.rows[i] = m;
  }

  // recounts
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < r; ++j)
      if (static_cast<int>(x.blocks[i][j].size()) != a.p[i] * x.n_prime)
        throw InternalError("rows: block (" + std::to_string(i) + "," + std::to_string(j) + ") has wrong size");
    if (!row_packing_ok(g, x, i, out.rows[i]))
      throw InternalError("rows: row " + std::to_string(i) + " packing is not balanced and perfect");
  }
  auto v = verify_ledger(g, a, ledger, std::accumulate(a.p.begin(), a.p.end(), 0));
  if (!v.empty()) throw InternalError("rows: ledger re-verification failed: " + v.front());
  for (int i = 0; i < s; ++i) {
    const Bitset cov = ledger.covered(g);
    for (auto& blk : x.blocks[i])
      for (int u : blk)
        if (cov.test(u)) throw InternalError("rows: block vertex also covered by the ledger");
  }
  report.deleted = static_cast<int>(ledger.stage(6).size());
  report.recounts.push_back("every row has a balanced perfect K_{p_i}-packing; n' = " + std::to_string(x.n_prime));
  for (auto& l : out.log) report.recounts.push_back(l);
  return true;
}

// ---- gluing -----------------------------------------------------------------

GlueResult glue_rows(const MultipartiteGraph& g, const FinalBlocks& x, const RowPackings& rows) {
  GlueResult out;
  const int s = static_cast<int>(x.p.size());
  const int r = g.r();
  const int k = std::accumulate(x.p.begin(), x.p.end(), 0);
  const int np = x.n_prime;
  const std::int64_t rf = factorial(r);
  if (np % rf != 0) throw PreconditionError("glue_rows: r! must divide n'");
  if (static_cast<int>(rows.rows.size()) != s) throw PreconditionError("glue_rows: one packing per row");
  const std::int64_t N = static_cast<std::int64_t>(r) * np * factorial(r - k) / rf;
  if (s == 1) {
    out.packing = rows.rows[0];
    return out;
  }
  // A_i: consecutive ranges of [k]
  std::vector<std::vector<int>> A(s);
  for (int i = 0, c = 0; i < s; ++i)
    for (int t = 0; t < x.p[i]; ++t) A[i].push_back(c++);
  // pools per row and index
  std::vector<std::map<IndexSet, std::vector<Clique>>> pool(s);
  for (int i = 0; i < s; ++i) {
    for (const auto& c : rows.rows[i].cliques) pool[i][index_set(g, c)].push_back(c);
    const std::int64_t per = static_cast<std::int64_t>(r) * np / binom(r, x.p[i]);
    for (auto& [idx, v] : pool[i])
      if (static_cast<std::int64_t>(v.size()) != per)
        throw PreconditionError("glue_rows: row " + std::to_string(i) + " packing is not balanced");
    for (auto& [idx, v] : pool[i]) std::reverse(v.begin(), v.end());  // pop from the back in id order
  }
  // all injective sigma in lexicographic order
  std::vector<std::vector<int>> sigmas;
  {
    std::vector<int> sig;
    std::vector<char> used(r, 0);
    std::function<void()> rec = [&]() {
      if (static_cast<int>(sig.size()) == k) {
        sigmas.push_back(sig);
        return;
      }
      for (int j = 0; j < r; ++j)
        if (!used[j]) {
          used[j] = 1;
          sig.push_back(j);
          rec();
          sig.pop_back();
          used[j] = 0;
        }
    };
    rec();
  }
  CliquePacking result;
  for (const auto& sigma : sigmas) {
    std::vector<std::vector<Clique>> E(s);
    for (int i = 0; i < s; ++i) {
      IndexSet B;
      for (int a : A[i]) B.push_back(sigma[a]);
      std::sort(B.begin(), B.end());
      auto& v = pool[i][B];
      if (static_cast<std::int64_t>(v.size()) < N) throw InternalError("glue_rows: index pool ran dry");
      for (std::int64_t t = 0; t < N; ++t) {
        E[i].push_back(v.back());
        v.pop_back();
      }
    }
    // compatibility between members of different classes of H_sigma
    auto compatible = [&](const Clique& c1, const Clique& c2) {
      for (int u : c1)
        for (int w : c2)
          if (!g.adjacent(u, w)) return false;
      return true;
    };
    std::vector<std::vector<std::vector<std::vector<char>>>> comp(
        s, std::vector<std::vector<std::vector<char>>>(s));
    for (int i = 0; i < s; ++i)
      for (int l = i + 1; l < s; ++l) {
        comp[i][l].assign(N, std::vector<char>(N, 0));
        for (std::int64_t a1 = 0; a1 < N; ++a1)
          for (std::int64_t b1 = 0; b1 < N; ++b1) comp[i][l][a1][b1] = compatible(E[i][a1], E[l][b1]);
      }
    auto ok_pair = [&](int i, std::int64_t ai, int l, std::int64_t al) {
      return i < l ? comp[i][l][ai][al] : comp[l][i][al][ai];
    };
    // degree of each H_sigma vertex: compatible (s-1)-tuples
    GlueLog log;
    log.sigma = sigma;
    log.n_per_class = static_cast<int>(N);
    log.full_degree = 1;
    for (int t = 1; t < s; ++t) log.full_degree *= N;
    log.min_degree = log.full_degree;
    for (int i = 0; i < s; ++i)
      for (std::int64_t ai = 0; ai < N; ++ai) {
        std::int64_t deg = 0;
        std::vector<std::int64_t> pick(s, -1);
        pick[i] = ai;
        std::function<void(int)> count = [&](int l) {
          if (l == s) {
            ++deg;
            return;
          }
          if (l == i) {
            count(l + 1);
            return;
          }
          for (std::int64_t al = 0; al < N; ++al) {
            bool ok = true;
            for (int m = 0; m < l && ok; ++m)
              if (pick[m] >= 0) ok = ok_pair(m, pick[m], l, al);
            if (ok && i > l) ok = ok_pair(l, al, i, ai);
            if (!ok) continue;
            pick[l] = al;
            count(l + 1);
            pick[l] = -1;
          }
        };
        count(0);
        log.min_degree = std::min(log.min_degree, deg);
      }
    out.logs.push_back(log);
    // perfect matching of H_sigma
    std::vector<std::vector<std::int64_t>> match;
    if (s == 2) {
      BipartiteGraph b{static_cast<int>(N), static_cast<int>(N), std::vector<std::vector<int>>(N)};
      for (std::int64_t a1 = 0; a1 < N; ++a1)
        for (std::int64_t b1 = 0; b1 < N; ++b1)
          if (comp[0][1][a1][b1]) b.adj[a1].push_back(static_cast<int>(b1));
      auto mate = max_bipartite_matching(b);
      for (std::int64_t a1 = 0; a1 < N; ++a1) {
        if (mate[a1] < 0) break;
        match.push_back({a1, mate[a1]});
      }
    } else {
      std::vector<std::vector<char>> taken(s, std::vector<char>(N, 0));
      std::vector<std::int64_t> cur(s, -1);
      std::uint64_t nodes = 0;
      std::function<bool(std::int64_t, int)> go = [&](std::int64_t e0, int l) -> bool {
        if (e0 == N) return true;
        if (++nodes > 5'000'000) return false;
        if (l == 0) {
          cur[0] = e0;
          return go(e0, 1);
        }
        if (l == s) {
          const auto saved = cur;
          match.push_back(cur);
          for (int m = 1; m < s; ++m) taken[m][cur[m]] = 1;
          if (go(e0 + 1, 0)) return true;
          cur = saved;
          for (int m = 1; m < s; ++m) taken[m][cur[m]] = 0;
          match.pop_back();
          return false;
        }
        for (std::int64_t al = 0; al < N; ++al) {
          if (taken[l][al]) continue;
          bool ok = true;
          for (int m = 0; m < l && ok; ++m) ok = ok_pair(m, cur[m], l, al);
          if (!ok) continue;
          cur[l] = al;
          if (go(e0, l + 1)) return true;
        }
        return false;
      };
      if (!go(0, 0)) match.clear();
    }
    if (static_cast<std::int64_t>(match.size()) != N) {
      std::ostringstream os;
      os << "H_sigma for sigma = (";
      for (int t = 0; t < k; ++t) os << (t ? "," : "") << sigma[t];
      os << ") has no perfect matching; min degree " << log.min_degree << " of " << log.full_degree;
      out.failure = os.str();
      return out;
    }
    for (const auto& tup : match) {
      Clique c;
      for (int i = 0; i < s; ++i) c.insert(c.end(), E[i][tup[i]].begin(), E[i][tup[i]].end());
      std::sort(c.begin(), c.end());
      if (!is_clique(g, c) || static_cast<int>(c.size()) != k) throw InternalError("glue_rows: glued set is not a K_k");
      result.cliques.push_back(c);
    }
  }
  std::sort(result.cliques.begin(), result.cliques.end());
  // coverage of exactly the row vertices
  std::vector<int> seen(g.num_vertices(), 0);
  for (const auto& c : result.cliques)
    for (int v : c) ++seen[v];
  for (int i = 0; i < s; ++i)
    for (auto& blk : x.blocks[i])
      for (int v : blk)
        if (seen[v] != 1) throw InternalError("glue_rows: vertex " + std::to_string(v) + " covered " + std::to_string(seen[v]) + " times");
  out.packing = result;
  return out;
}

}  // namespace kpack
