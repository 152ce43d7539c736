#include <array>
#include <algorithm>
#include <map>
#include <numeric>
#include <sstream>

#include "kpack/errors.hpp"
#include "kpack/io.hpp"
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

int total_k(const BlockAssignment& a) { return std::accumulate(a.p.begin(), a.p.end(), 0); }

int row_remaining(const MultipartiteGraph& g, const BlockAssignment& a, const Bitset& covered, int i) {
  int c = 0;
  for (int v = 0; v < g.num_vertices(); ++v)
    if (a.w_row[v] == i && !covered.test(v)) ++c;
  return c;
}

int block_remaining(const MultipartiteGraph& g, const BlockAssignment& a, const Bitset& covered, int i, int j) {
  int c = 0;
  for (int v = g.class_begin(j); v < g.class_end(j); ++v)
    if (a.w_row[v] == i && !covered.test(v)) ++c;
  return c;
}

int half_remaining(const BlockAssignment& a, const Bitset& covered, int i) {
  int c = 0;
  for (std::size_t v = 0; v < a.w_row.size(); ++v)
    if (a.w_row[v] == i && a.in_s[v] && !covered.test(v)) ++c;
  return c;
}

void add_entry(DeletionLedger& ledger, int stage, const Clique& c, const std::string& tag, int plus = -1,
               int minus = -1, int outside = -1) {
  ledger.entries.push_back(LedgerEntry{c, stage, tag, plus, minus, outside});
}

void check_ledger(const MultipartiteGraph& g, const BlockAssignment& a, const DeletionLedger& ledger,
                  StageReport& report) {
  auto v = verify_ledger(g, a, ledger, total_k(a));
  if (!v.empty()) throw InternalError(report.name + ": ledger re-verification failed: " + v.front());
  report.recounts.push_back("ledger: " + std::to_string(ledger.entries.size()) + " cliques disjoint, tags verified");
}

// |W^i \ V(M)| = p_i * (T0 - |M|) for every row
void check_rows(const MultipartiteGraph& g, const BlockAssignment& a, const DeletionLedger& ledger, int t0,
                StageReport& report) {
  const Bitset cov = ledger.covered(g);
  const int m = static_cast<int>(ledger.entries.size());
  for (int i = 0; i < a.s(); ++i) {
    const int have = row_remaining(g, a, cov, i);
    const int want = a.p[i] * (t0 - m);
    if (have != want)
      throw InternalError(report.name + ": row " + std::to_string(i) + " has " + std::to_string(have) +
                          " vertices left, expected " + std::to_string(want));
  }
  report.recounts.push_back("rows proportional: |W^i \\ V(M)| = p_i * " + std::to_string(t0 - m));
}

BlockResult build(const MultipartiteGraph& g, const BlockAssignment& a, const DeletionLedger& ledger,
                  const BlockRequest& req, const Bitset& extra, const PipelineParams& params) {
  Bitset forbidden = ledger.covered(g);
  forbidden |= extra;
  return building_block(g, a, req, forbidden, params.extend_budget);
}

// Edges uv inside row i (u good), uncovered, in id order.
std::vector<std::pair<int, int>> row_edges(const MultipartiteGraph& g, const BlockAssignment& a,
                                           const Bitset& covered, int i, bool mixed_halves_only,
                                           std::size_t cap) {
  std::vector<std::pair<int, int>> out;
  const int N = g.num_vertices();
  Bitset row = g.empty_set();
  for (int v = 0; v < N; ++v)
    if (a.w_row[v] == i && !covered.test(v)) row.set(v);
  for (int u = 0; u < N && out.size() < cap; ++u) {
    if (!row.test(u) || !a.is_good(u)) continue;
    Bitset nb = g.neighbors(u) & row;
    for (std::size_t v = nb.next(0); v < nb.size() && out.size() < cap; v = nb.next(v + 1)) {
      const int w = static_cast<int>(v);
      if (a.is_good(w) && w < u) continue;  // both good: keep one orientation
      if (mixed_halves_only && a.in_s[u] == a.in_s[w]) continue;
      out.push_back({u, w});
    }
  }
  return out;
}

std::string dump_matrix(const std::vector<std::vector<std::int64_t>>& q) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < q.size(); ++i) {
    os << (i ? "; " : "");
    for (std::size_t j = 0; j < q[i].size(); ++j) os << (j ? " " : "") << q[i][j];
  }
  os << "]";
  return os.str();
}

}  // namespace

bool extremal_row_structure(const BlockAssignment& a) {
  int heavy = 0, pc = -1;
  for (int i = 0; i < a.s(); ++i)
    if (a.p[i] >= 2) {
      ++heavy;
      pc = i;
    }
  return heavy == 1 && a.p[pc] == 2 && a.pair_complete[pc];
}

// ---- M_1 --------------------------------------------------------------------

bool balance_rows(const MultipartiteGraph& g, BlockAssignment& a, DeletionLedger& ledger, int n_plus,
                  const PipelineParams& params, StageReport& report) {
  report.name = "M1";
  const int r = g.r();
  const int s = a.s();
  const int k = total_k(a);
  const int t0 = r * n_plus / k;
  Bitset cov = ledger.covered(g);
  std::vector<int> excess(s);
  for (int i = 0; i < s; ++i) excess[i] = row_remaining(g, a, cov, i) - a.p[i] * t0;
  if (std::accumulate(excess.begin(), excess.end(), 0) != 0)
    throw InternalError("M1: row excesses do not sum to zero");
  std::vector<int> plus, minus;
  for (int i = 0; i < s; ++i) {
    for (int t = 0; t < excess[i]; ++t) plus.push_back(i);
    for (int t = 0; t < -excess[i]; ++t) minus.push_back(i);
  }
  const int total = static_cast<int>(plus.size());
  const bool extremal = extremal_row_structure(a);
  int istar = -1;
  for (int i = 0; i < s; ++i)
    if (extremal && a.p[i] == 2) istar = i;
  {
    std::ostringstream os;
    os << "excess a_i = (";
    for (int i = 0; i < s; ++i) os << (i ? ", " : "") << excess[i];
    os << "), a = " << total << (extremal ? ", extremal row structure" : "");
    report.recounts.push_back(os.str());
  }

  // E^i for rows with p_i = 1 and positive excess
  std::map<int, std::vector<std::pair<int, int>>> E;
  Bitset reserved = g.empty_set();
  for (int i = 0; i < s; ++i) {
    if (excess[i] <= 0 || a.p[i] != 1) continue;
    std::vector<int> ids;
    for (int v = 0; v < g.num_vertices(); ++v)
      if (a.w_row[v] == i && !cov.test(v)) ids.push_back(v);
    std::vector<std::vector<int>> adj(ids.size());
    for (std::size_t x = 0; x < ids.size(); ++x)
      for (std::size_t y = x + 1; y < ids.size(); ++y)
        if (g.adjacent(ids[x], ids[y]) && (a.is_good(ids[x]) || a.is_good(ids[y]))) {
          adj[x].push_back(static_cast<int>(y));
          adj[y].push_back(static_cast<int>(x));
        }
    auto mate = maximum_matching(adj);
    std::vector<std::pair<int, int>> edges;
    for (std::size_t x = 0; x < ids.size(); ++x)
      if (mate[x] > static_cast<int>(x)) {
        int u = ids[x], v = ids[mate[x]];
        if (!a.is_good(u)) std::swap(u, v);
        edges.push_back({u, v});
      }
    if (static_cast<int>(edges.size()) < excess[i]) {
      report.ok = false;
      report.failure = "matching E^" + std::to_string(i) + " has " + std::to_string(edges.size()) +
                       " edges with a good end, need " + std::to_string(excess[i]);
      return false;
    }
    edges.resize(excess[i]);
    for (auto [u, v] : edges) reserved.set(u), reserved.set(v);
    E[i] = edges;
  }
  std::map<int, std::size_t> next_edge;

  auto fail = [&](const std::string& why) {
    report.ok = false;
    report.failure = why;
    return false;
  };
  auto release = [&](std::pair<int, int> e) {
    reserved.reset(e.first);
    reserved.reset(e.second);
  };
  // one ij-distributed clique, i = plus row, j = minus row
  auto place = [&](int i, int j, int parity_i, int parity_j) -> bool {
    BlockResult res;
    if (a.p[i] == 1) {
      auto e = E[i][next_edge[i]++];
      release(e);
      BlockRequest req{BlockKind::IjEdge, i, j, e.second, e.first, parity_j, {}, {}};
      res = build(g, a, ledger, req, reserved, params);
    } else {
      BlockRequest req{BlockKind::Ij, i, j, -1, -1, parity_i, {}, {}};
      res = build(g, a, ledger, req, reserved, params);
    }
    if (!res.clique) return fail("ij-distributed clique (" + std::to_string(i) + "," + std::to_string(j) + "): " + res.failure);
    add_entry(ledger, 1, *res.clique, "ij", i, j);
    return true;
  };
  auto s_parity = [&]() { return half_remaining(a, ledger.covered(g), istar) % 2; };

  const int regular = extremal ? std::max(0, total - 1) : total;
  for (int l = 0; l < regular; ++l)
    if (!place(plus[l], minus[l], -1, -1)) return false;

  if (extremal && total > 0) {
    const int i = plus[total - 1], j = minus[total - 1];
    const int par = s_parity();
    if (istar == i) {
      if (!place(i, j, par ? 3 : 0, -1)) return false;  // case 2.1.1
    } else if (istar == j) {
      if (!place(i, j, -1, par)) return false;  // case 2.1.2
    } else {
      if (!place(i, istar, -1, -1)) return false;  // case 2.1.3
      const int par2 = s_parity();
      if (!place(istar, j, par2 ? 3 : 0, -1)) return false;
    }
  } else if (extremal && s_parity() == 1) {
    // case 2.2: a = 0 and |S^{i*}| odd
    bool done = false;
    std::string last;
    for (int pass = 0; pass < 2 && !done; ++pass) {
      a.all_good = pass == 1;
      const Bitset c0 = ledger.covered(g);
      for (int i = 0; i < s && !done; ++i) {
        if (i == istar) continue;
        for (auto [u, v] : row_edges(g, a, c0, i, false, 4000)) {
          BlockRequest r1{BlockKind::IjEdge, i, istar, v, u, -1, {}, {}};
          auto k1 = build(g, a, ledger, r1, g.empty_set(), params);
          if (!k1.clique) {
            last = k1.failure;
            continue;
          }
          Bitset extra = g.empty_set();
          for (int x : *k1.clique) extra.set(x);
          int left = half_remaining(a, c0, istar);
          for (int x : *k1.clique) left -= (a.w_row[x] == istar && a.in_s[x]) ? 1 : 0;
          BlockRequest r2{BlockKind::Ij, istar, i, -1, -1, (left % 2) ? 3 : 0, {}, {}};
          auto k2 = build(g, a, ledger, r2, extra, params);
          if (!k2.clique) {
            last = k2.failure;
            continue;
          }
          add_entry(ledger, 1, *k1.clique, "ij", i, istar);
          add_entry(ledger, 1, *k2.clique, "ij", istar, i);
          done = true;
          break;
        }
      }
      if (done) break;
      for (auto [u, v] : row_edges(g, a, c0, istar, true, 4000)) {
        BlockRequest r1{BlockKind::ProperOutside, istar, -1, v, u, -1, {}, {}};
        auto k1 = build(g, a, ledger, r1, g.empty_set(), params);
        if (!k1.clique) {
          last = k1.failure;
          continue;
        }
        add_entry(ledger, 1, *k1.clique, "proper_outside", -1, -1, istar);
        done = true;
        break;
      }
    }
    const bool used_all_good = a.all_good;
    a.all_good = false;
    if (!done)
      return fail("isomorphic-to-extremal candidate: no usable edge inside a row" +
                  (last.empty() ? std::string() : " (last attempt: " + last + ")"));
    if (used_all_good) report.recounts.push_back("case 2.2 resolved with every vertex treated as good");
  }

  report.deleted = static_cast<int>(ledger.stage(1).size());
  check_ledger(g, a, ledger, report);
  check_rows(g, a, ledger, t0, report);
  if (extremal) {
    if (s_parity() != 0) throw InternalError("M1: half S of the pair-complete row is still odd");
    report.recounts.push_back("|S^" + std::to_string(istar) + " \\ V(M1)| even");
  }
  return true;
}

// ---- M_2 --------------------------------------------------------------------

bool prepare_multirow(const MultipartiteGraph& g, BlockAssignment& a, DeletionLedger& ledger,
                      const PipelineParams& params, StageReport& report) {
  report.name = "M2";
  std::vector<int> heavy;
  for (int i = 0; i < a.s(); ++i)
    if (a.p[i] >= 2) heavy.push_back(i);
  const int t0_minus = static_cast<int>(ledger.entries.size());
  if (heavy.size() < 2) {
    report.recounts.push_back("fewer than two rows with p_i >= 2: M2 empty");
    return true;
  }
  for (int i : heavy)
    for (int j : heavy) {
      if (i == j) continue;
      for (int t = 0; t < params.eta_count; ++t) {
        BlockRequest req{BlockKind::Ij, i, j, -1, -1, -1, {}, {}};
        auto res = build(g, a, ledger, req, g.empty_set(), params);
        if (!res.clique) {
          report.ok = false;
          report.failure = "supply shortfall for pair (" + std::to_string(i) + "," + std::to_string(j) +
                           "): " + res.failure;
          return false;
        }
        add_entry(ledger, 2, *res.clique, "ij", i, j);
      }
    }
  report.deleted = static_cast<int>(ledger.stage(2).size());
  for (const auto& e : ledger.stage(2))
    for (int v : e.clique)
      if (!a.good[v]) throw InternalError("M2: clique uses a bad vertex");
  report.recounts.push_back("all M2 vertices good");
  check_ledger(g, a, ledger, report);
  (void)t0_minus;
  return true;
}

// ---- M_3 --------------------------------------------------------------------

namespace {

// Decomposes the removal matrix R (row sums p_i*C, column sums <= C) into C
// families via a C-regular bipartite multigraph between slots and columns.
std::optional<std::vector<std::vector<std::vector<int>>>> families_for(const std::vector<std::vector<int>>& R,
                                                                       const std::vector<int>& p, int r, int C) {
  const int s = static_cast<int>(p.size());
  const int k = std::accumulate(p.begin(), p.end(), 0);
  std::vector<int> slot_row;
  std::vector<std::vector<int>> mult;
  for (int i = 0; i < s; ++i) {
    int start = static_cast<int>(mult.size());
    for (int t = 0; t < p[i]; ++t) {
      slot_row.push_back(i);
      mult.push_back(std::vector<int>(r, 0));
    }
    int slot = start, room = C;
    for (int j = 0; j < r; ++j) {
      int amt = R[i][j];
      if (amt < 0) return std::nullopt;
      while (amt > 0) {
        if (slot >= start + p[i]) return std::nullopt;
        int put = std::min(amt, room);
        mult[slot][j] += put;
        amt -= put;
        room -= put;
        if (room == 0) {
          ++slot;
          room = C;
        }
      }
    }
  }
  // dummy slots absorb the column slack
  std::vector<int> slack(r, C);
  for (int j = 0; j < r; ++j)
    for (int i = 0; i < s; ++i) slack[j] -= R[i][j];
  int start = static_cast<int>(mult.size());
  for (int t = 0; t < r - k; ++t) {
    slot_row.push_back(-1);
    mult.push_back(std::vector<int>(r, 0));
  }
  int slot = start, room = C;
  for (int j = 0; j < r; ++j) {
    if (slack[j] < 0) return std::nullopt;
    int amt = slack[j];
    while (amt > 0) {
      if (slot >= r) return std::nullopt;
      int put = std::min(amt, room);
      mult[slot][j] += put;
      amt -= put;
      room -= put;
      if (room == 0) {
        ++slot;
        room = C;
      }
    }
  }
  std::vector<std::vector<std::vector<int>>> fams;
  for (int round = 0; round < C; ++round) {
    BipartiteGraph b{r, r, std::vector<std::vector<int>>(r)};
    for (int x = 0; x < r; ++x)
      for (int j = 0; j < r; ++j)
        if (mult[x][j] > 0) b.adj[x].push_back(j);
    auto mate = max_bipartite_matching(b);
    std::vector<std::vector<int>> fam(s);
    for (int x = 0; x < r; ++x) {
      if (mate[x] < 0) throw InternalError("M3: regular multigraph without a perfect matching");
      --mult[x][mate[x]];
      if (slot_row[x] >= 0) fam[slot_row[x]].push_back(mate[x]);
    }
    for (auto& f : fam) std::sort(f.begin(), f.end());
    fams.push_back(fam);
  }
  return fams;
}

}  // namespace

bool cover_and_divisibility(const MultipartiteGraph& g, BlockAssignment& a, DeletionLedger& ledger,
                            int n_plus, const PipelineParams& params, SizingPlan& plan,
                            StageReport& report) {
  report.name = "M3";
  const int r = g.r();
  const int s = a.s();
  const int k = total_k(a);
  const int t0 = r * n_plus / k;
  const std::int64_t rf = factorial(r);
  const Bitset cov0 = ledger.covered(g);
  const int T = t0 - static_cast<int>(ledger.entries.size());
  std::vector<std::vector<int>> W(s, std::vector<int>(r));
  std::vector<std::vector<int>> bad_in(s, std::vector<int>(r, 0));
  std::vector<int> bad_left;
  for (int v = 0; v < g.num_vertices(); ++v)
    if (!a.good[v] && !cov0.test(v)) {
      bad_left.push_back(v);
      ++bad_in[a.w_row[v]][g.class_of(v)];
    }
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < r; ++j) W[i][j] = block_remaining(g, a, cov0, i, j);
  report.recounts.push_back("uncovered bad vertices |B'| = " + std::to_string(bad_left.size()));

  const std::size_t mark = ledger.entries.size();
  std::string last_failure = "no n' with r! | n' fits the block sizes";
  int attempts = 0;
  for (int np = static_cast<int>(T / r / rf * rf); np >= static_cast<int>(rf) && attempts < 3; np -= static_cast<int>(rf)) {
    const int C = T - r * np;
    std::vector<std::vector<int>> R(s, std::vector<int>(r));
    bool fits = C >= static_cast<int>(bad_left.size());
    for (int i = 0; i < s && fits; ++i)
      for (int j = 0; j < r && fits; ++j) {
        R[i][j] = W[i][j] - a.p[i] * np;
        fits = R[i][j] >= bad_in[i][j];
      }
    for (int j = 0; j < r && fits; ++j) {
      int c = 0;
      for (int i = 0; i < s; ++i) c += R[i][j];
      fits = c <= C;
    }
    if (!fits) continue;
    ++attempts;
    ledger.entries.resize(mark);
    int remaining = C;
    auto bad_now = bad_in;
    bool ok = true;
    for (int v : bad_left) {
      if (ledger.covered(g).test(v)) continue;
      BlockRequest req{BlockKind::ThroughVertex, -1, -1, v, -1, -1, {}, {}};
      const int vr = a.w_row[v], vc = g.class_of(v);
      req.accept = [&](const std::vector<std::vector<int>>& f) {
        auto R2 = R;
        auto b2 = bad_now;
        --b2[vr][vc];
        for (int i = 0; i < s; ++i)
          for (int j : f[i]) --R2[i][j];
        for (int i = 0; i < s; ++i)
          for (int j = 0; j < r; ++j)
            if (R2[i][j] < b2[i][j]) return false;
        int left_bad = 0;
        for (auto& row : b2) left_bad += std::accumulate(row.begin(), row.end(), 0);
        if (remaining - 1 < left_bad) return false;
        for (int j = 0; j < r; ++j) {
          int c = 0;
          for (int i = 0; i < s; ++i) c += R2[i][j];
          if (c > remaining - 1) return false;
        }
        return true;
      };
      auto res = build(g, a, ledger, req, g.empty_set(), params);
      if (!res.clique) {
        ok = false;
        last_failure = "cannot cover bad vertex " + std::to_string(v) + ": " + res.failure;
        break;
      }
      add_entry(ledger, 3, *res.clique, "proper");
      for (int i = 0; i < s; ++i)
        for (int j : res.family[i]) --R[i][j];
      --bad_now[vr][vc];
      --remaining;
    }
    if (ok) {
      auto fams = families_for(R, a.p, r, remaining);
      if (!fams) {
        ok = false;
        last_failure = "filler decomposition failed";
      } else {
        for (const auto& f : *fams) {
          BlockRequest req{BlockKind::Proper, -1, -1, -1, -1, -1, f, {}};
          auto res = build(g, a, ledger, req, g.empty_set(), params);
          if (!res.clique) {
            ok = false;
            std::ostringstream os;
            os << "filler clique for family (";
            for (int i = 0; i < s; ++i) {
              os << (i ? " | " : "");
              for (std::size_t t = 0; t < f[i].size(); ++t) os << (t ? "," : "") << f[i][t];
            }
            os << "): " << res.failure;
            last_failure = os.str();
            break;
          }
          add_entry(ledger, 3, *res.clique, "proper");
        }
      }
    }
    if (!ok) continue;
    plan.n_prime = np;
    plan.cliques = C;
    plan.removals.assign(s, std::vector<int>(r, 0));
    report.deleted = static_cast<int>(ledger.stage(3).size());
    report.recounts.push_back("n' = " + std::to_string(np) + ", C = " + std::to_string(C));
    // recounts
    const Bitset cov = ledger.covered(g);
    for (int v = 0; v < g.num_vertices(); ++v)
      if (!a.good[v] && !cov.test(v)) throw InternalError("M3: bad vertex " + std::to_string(v) + " left uncovered");
    report.recounts.push_back("every bad vertex covered");
    const int left = g.num_vertices() - static_cast<int>(cov.count());
    if (left % (r * k * rf) != 0)
      throw InternalError("M3: " + std::to_string(left) + " vertices left, not divisible by rk*r!");
    report.recounts.push_back(std::to_string(left) + " vertices left, divisible by rk*r! = " +
                              std::to_string(r * k * rf));
    check_ledger(g, a, ledger, report);
    check_rows(g, a, ledger, t0, report);
    return true;
  }
  ledger.entries.resize(mark);
  report.ok = false;
  report.failure = last_failure;
  return false;
}

// ---- M_4 --------------------------------------------------------------------

bool balance_columns(const MultipartiteGraph& g, BlockAssignment& a, DeletionLedger& ledger, int n_plus,
                     const PipelineParams& params, StageReport& report) {
  report.name = "M4";
  const int r = g.r();
  const int k = total_k(a);
  const int t0 = r * n_plus / k;
  const std::int64_t rf = factorial(r);
  const Bitset cov = ledger.covered(g);
  const int m = static_cast<int>(ledger.entries.size());
  if ((k * m) % r != 0) throw InternalError("M4: k|M| not divisible by r");
  std::vector<int> excess(r);
  for (int j = 0; j < r; ++j) {
    int c = 0;
    for (int v = g.class_begin(j); v < g.class_end(j); ++v) c += cov.test(v) ? 1 : 0;
    excess[j] = c - k * m / r;
  }
  std::vector<int> over, under;
  for (int j = 0; j < r; ++j) {
    for (int t = 0; t < excess[j]; ++t) over.push_back(j);
    for (int t = 0; t < -excess[j]; ++t) under.push_back(j);
  }
  // A_q contains j_q, A'_q swaps j_q for j'_q
  std::map<IndexSet, std::int64_t> NA, NpA;
  for (std::size_t q = 0; q < over.size(); ++q) {
    IndexSet A{over[q]};
    for (int j = 0; j < r && static_cast<int>(A.size()) < k; ++j)
      if (j != over[q] && j != under[q]) A.push_back(j);
    std::sort(A.begin(), A.end());
    IndexSet Ap = A;
    *std::find(Ap.begin(), Ap.end(), over[q]) = under[q];
    std::sort(Ap.begin(), Ap.end());
    ++NA[A];
    ++NpA[Ap];
  }
  std::int64_t need = 0;
  for (auto& [A, c] : NA) need = std::max(need, c - NpA[A]);
  const std::int64_t mod = static_cast<std::int64_t>(r) * k * rf;
  const std::int64_t bin = binom(r, k);
  std::int64_t cp = need;
  while ((bin * cp) % mod != 0) ++cp;
  report.recounts.push_back("column excess a' = " + std::to_string(over.size()) + ", C' = " + std::to_string(cp));

  // M_4 takes C' + N'_A - N_A properly-distributed cliques of index A
  std::vector<IndexSet> idx_sets;
  {
    std::vector<int> all(r);
    std::iota(all.begin(), all.end(), 0);
    std::vector<char> pick(r, 0);
    std::fill(pick.begin(), pick.begin() + k, 1);
    do {
      IndexSet A;
      for (int j = 0; j < r; ++j)
        if (pick[j]) A.push_back(j);
      idx_sets.push_back(A);
    } while (std::prev_permutation(pick.begin(), pick.end()));
    std::sort(idx_sets.begin(), idx_sets.end());
  }
  for (const auto& A : idx_sets) {
    const std::int64_t cnt = cp + NpA[A] - NA[A];
    for (std::int64_t t = 0; t < cnt; ++t) {
      BlockRequest req{BlockKind::Proper, -1, -1, -1, -1, -1, {}, {}};
      req.accept = [&](const std::vector<std::vector<int>>& f) {
        IndexSet u;
        for (const auto& x : f) u.insert(u.end(), x.begin(), x.end());
        std::sort(u.begin(), u.end());
        return u == A;
      };
      auto res = build(g, a, ledger, req, g.empty_set(), params);
      if (!res.clique) {
        report.ok = false;
        report.failure = "supply shortfall for index " + index_key(A) + ": " + res.failure;
        return false;
      }
      add_entry(ledger, 4, *res.clique, "proper");
    }
  }
  report.deleted = static_cast<int>(ledger.stage(4).size());
  if (report.deleted % mod != 0) throw InternalError("M4: |M4| not divisible by rk*r!");
  const Bitset cov2 = ledger.covered(g);
  const int m2 = static_cast<int>(ledger.entries.size());
  for (int j = 0; j < r; ++j) {
    int c = 0;
    for (int v = g.class_begin(j); v < g.class_end(j); ++v) c += cov2.test(v) ? 1 : 0;
    if (c * r != k * m2) throw InternalError("M4: column " + std::to_string(j) + " covered " + std::to_string(c) + " times");
  }
  report.recounts.push_back("columns equal: each covered " + std::to_string(k * m2 / r) + " times; rk*r! | |M4|");
  check_ledger(g, a, ledger, report);
  check_rows(g, a, ledger, t0, report);
  return true;
}

// ---- M_5 --------------------------------------------------------------------

bool balance_blocks(const MultipartiteGraph& g, BlockAssignment& a, DeletionLedger& ledger, int n_plus,
                    const PipelineParams& params, FinalBlocks& out, StageReport& report) {
  report.name = "M5";
  const int r = g.r();
  const int s = a.s();
  const int k = total_k(a);
  const int t0 = r * n_plus / k;
  const std::int64_t rf = factorial(r);
  const Bitset cov = ledger.covered(g);
  const int D = row_remaining(g, a, cov, 0) / a.p[0];
  std::vector<std::vector<std::int64_t>> Q(s, std::vector<std::int64_t>(r));
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < r; ++j) {
      const std::int64_t num = static_cast<std::int64_t>(block_remaining(g, a, cov, i, j)) * r - a.p[i] * D;
      if (num % r != 0) {
        report.ok = false;
        report.failure = "block deviation not integral: p_i D / r fractional";
        return false;
      }
      Q[i][j] = num / r;
    }
  report.recounts.push_back("Q = " + dump_matrix(Q));
  // Q = sum of Q^{abcd}
  std::vector<std::array<int, 4>> terms;
  auto work = Q;
  while (true) {
    int a0 = -1, b0 = -1;
    for (int i = 0; i < s && a0 < 0; ++i)
      for (int j = 0; j < r; ++j)
        if (work[i][j] > 0) {
          a0 = i;
          b0 = j;
          break;
        }
    if (a0 < 0) break;
    int d0 = -1, c0 = -1;
    for (int j = 0; j < r; ++j)
      if (work[a0][j] < 0) {
        d0 = j;
        break;
      }
    for (int i = 0; i < s; ++i)
      if (work[i][b0] < 0) {
        c0 = i;
        break;
      }
    if (c0 < 0 || d0 < 0) throw InternalError("M5: Q decomposition stuck, Q = " + dump_matrix(work));
    terms.push_back({a0, b0, c0, d0});
    --work[a0][b0];
    --work[c0][d0];
    ++work[a0][d0];
    ++work[c0][b0];
  }
  for (auto& row : work)
    for (auto x : row)
      if (x != 0) throw InternalError("M5: Q decomposition left a residue, Q = " + dump_matrix(work));

  auto fams = column_families(r, a.p);
  std::map<std::vector<std::vector<int>>, std::int64_t> QA, QpA;
  for (auto [a0, b0, c0, d0] : terms) {
    if (a0 == c0) throw InternalError("M5: Q term inside a single row");
    const std::vector<std::vector<int>>* pick = nullptr;
    for (const auto& f : fams)
      if (std::binary_search(f[a0].begin(), f[a0].end(), b0) && std::binary_search(f[c0].begin(), f[c0].end(), d0) &&
          !std::binary_search(f[a0].begin(), f[a0].end(), d0) && !std::binary_search(f[c0].begin(), f[c0].end(), b0)) {
        pick = &f;
        break;
      }
    if (!pick) throw InternalError("M5: no family realizes a Q term");
    auto f2 = *pick;
    *std::find(f2[a0].begin(), f2[a0].end(), b0) = d0;
    *std::find(f2[c0].begin(), f2[c0].end(), d0) = b0;
    std::sort(f2[a0].begin(), f2[a0].end());
    std::sort(f2[c0].begin(), f2[c0].end());
    ++QA[*pick];
    ++QpA[f2];
  }
  std::int64_t need = 0;
  for (const auto& f : fams) need = std::max(need, QpA[f] - QA[f]);
  const std::int64_t mod = static_cast<std::int64_t>(k) * r * rf;
  const std::int64_t cpp = (need + mod - 1) / mod * mod;
  report.recounts.push_back(std::to_string(terms.size()) + " Q terms, C'' = " + std::to_string(cpp));
  for (const auto& f : fams) {
    const std::int64_t cnt = cpp + QA[f] - QpA[f];
    for (std::int64_t t = 0; t < cnt; ++t) {
      BlockRequest req{BlockKind::Proper, -1, -1, -1, -1, -1, f, {}};
      auto res = build(g, a, ledger, req, g.empty_set(), params);
      if (!res.clique) {
        report.ok = false;
        report.failure = "supply shortfall for a block family: " + res.failure;
        return false;
      }
      add_entry(ledger, 5, *res.clique, "proper");
    }
  }
  report.deleted = static_cast<int>(ledger.stage(5).size());

  // final blocks
  const Bitset cov2 = ledger.covered(g);
  const int left = g.num_vertices() - static_cast<int>(cov2.count());
  if (left % (k * r) != 0) throw InternalError("M5: remainder not divisible by kr");
  const int np = left / (k * r);
  if (np % rf != 0) throw InternalError("M5: n' not divisible by r!");
  out = FinalBlocks{};
  out.n_prime = np;
  out.p = a.p;
  out.blocks.assign(s, std::vector<std::vector<int>>(r));
  out.halves.assign(s, {});
  for (int i = 0; i < s; ++i) {
    if (a.pair_complete[i]) out.halves[i].assign(r, {});
    for (int j = 0; j < r; ++j) {
      for (int v = g.class_begin(j); v < g.class_end(j); ++v)
        if (a.w_row[v] == i && !cov2.test(v)) {
          out.blocks[i][j].push_back(v);
          if (a.pair_complete[i] && a.in_s[v]) out.halves[i][j].push_back(v);
        }
      if (static_cast<int>(out.blocks[i][j].size()) != a.p[i] * np)
        throw InternalError("M5: block (" + std::to_string(i) + "," + std::to_string(j) + ") has " +
                            std::to_string(out.blocks[i][j].size()) + " vertices, expected " +
                            std::to_string(a.p[i] * np));
    }
  }
  report.recounts.push_back("blocks proportional: |X'^i_j| = p_i * " + std::to_string(np) + ", r! | n'");
  for (int v = 0; v < g.num_vertices(); ++v)
    if (!cov2.test(v) && !a.good[v]) throw InternalError("M5: bad vertex survived");
  check_ledger(g, a, ledger, report);
  check_rows(g, a, ledger, t0, report);
  const int slack = final_degree_slack(g, out);
  const std::int64_t allowed = floor_of(params.alpha * np);
  report.recounts.push_back("diagonal degree slack " + std::to_string(slack) + " (allowed -" +
                            std::to_string(allowed) + ")");
  if (slack < -allowed) {
    report.ok = false;
    report.failure = "recount failed: diagonal degree below p_i' n' - alpha n' (slack " + std::to_string(slack) + ")";
    return false;
  }
  return true;
}

int final_degree_slack(const MultipartiteGraph& g, const FinalBlocks& x) {
  const int s = static_cast<int>(x.p.size());
  const int r = g.r();
  int best = 0;
  std::vector<std::vector<Bitset>> sets(s, std::vector<Bitset>(r));
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < r; ++j) sets[i][j] = g.make_set(x.blocks[i][j]);
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < r; ++j)
      for (int v : x.blocks[i][j])
        for (int i2 = 0; i2 < s; ++i2)
          for (int j2 = 0; j2 < r; ++j2) {
            if (i2 == i || j2 == j) continue;
            best = std::min(best, g.degree_into(v, sets[i2][j2]) - x.p[i2] * x.n_prime);
          }
  return best;
}

}  // namespace kpack
