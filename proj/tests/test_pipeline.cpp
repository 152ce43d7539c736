#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>

#include "kpack/errors.hpp"
#include "kpack/oracle.hpp"
#include "kpack/pipeline.hpp"
#include "support/instances.hpp"
#include "support/naive.hpp"

using namespace kpack;

namespace {

// perfect K_k packing recount from an edge set
bool perfect_recount(const MultipartiteGraph& g, const CliquePacking& m, int k) {
  const auto e = naive::edge_set(g);
  std::vector<int> cover(g.num_vertices(), 0);
  for (const auto& c : m.cliques) {
    if (static_cast<int>(c.size()) != k) return false;
    for (std::size_t a = 0; a < c.size(); ++a) {
      ++cover[c[a]];
      for (std::size_t b = a + 1; b < c.size(); ++b)
        if (!naive::has(e, c[a], c[b])) return false;
    }
  }
  return std::all_of(cover.begin(), cover.end(), [](int x) { return x == 1; });
}

// bad iff outside X, or some off-row, off-column block of X sees at most
// (1 - sqrt d) p n of its neighbours. sqrt d = num/den.
std::set<int> expected_bad(const MultipartiteGraph& g, const RowDecomposition& x, std::int64_t num,
                           std::int64_t den) {
  std::set<int> out;
  const auto e = naive::edge_set(g);
  for (int v = 0; v < g.num_vertices(); ++v) {
    const int i = x.row_of[v];
    if (i < 0) {
      out.insert(v);
      continue;
    }
    for (int i2 = 0; i2 < x.s(); ++i2)
      for (int j2 = 0; j2 < g.r(); ++j2) {
        if (i2 == i || j2 == g.class_of(v)) continue;
        std::int64_t cnt = 0;
        for (int w : x.block(g, i2, j2)) cnt += naive::has(e, v, w);
        if (cnt * den <= (den - num) * x.p[i2] * x.n) out.insert(v);
      }
  }
  return out;
}

void check_ledger_independently(const MultipartiteGraph& g, const DeletionLedger& ledger, int k) {
  const auto e = naive::edge_set(g);
  std::set<int> seen;
  for (const auto& en : ledger.entries) {
    CHECK(static_cast<int>(en.clique.size()) == k);
    std::set<int> cls;
    for (std::size_t a = 0; a < en.clique.size(); ++a) {
      CHECK(seen.insert(en.clique[a]).second);
      cls.insert(g.class_of(en.clique[a]));
      for (std::size_t b = a + 1; b < en.clique.size(); ++b) CHECK(naive::has(e, en.clique[a], en.clique[b]));
    }
    CHECK(static_cast<int>(cls.size()) == k);
  }
}

}  // namespace

TEST_CASE("column families match a direct enumeration") {
  for (int r = 2; r <= 5; ++r)
    for (const auto& sizes : std::vector<std::vector<int>>{{1, 1}, {2, 1}, {1, 2}, {1, 1, 1}}) {
      const int need = std::accumulate(sizes.begin(), sizes.end(), 0);
      auto fams = column_families(r, sizes);
      // each column goes to one row or to none
      std::set<std::vector<std::vector<int>>> brute;
      std::vector<int> lab(r, 0);
      const int s = static_cast<int>(sizes.size());
      while (true) {
        std::vector<std::vector<int>> f(s);
        for (int c = 0; c < r; ++c)
          if (lab[c] > 0) f[lab[c] - 1].push_back(c);
        bool ok = true;
        for (int i = 0; i < s; ++i) ok = ok && static_cast<int>(f[i].size()) == sizes[i];
        if (ok) brute.insert(f);
        int c = 0;
        while (c < r && ++lab[c] > s) lab[c++] = 0;
        if (c == r) break;
      }
      if (need > r) CHECK(fams.empty());
      CHECK(std::set<std::vector<std::vector<int>>>(fams.begin(), fams.end()) == brute);
      CHECK(std::is_sorted(fams.begin(), fams.end()));
    }
}

TEST_CASE("bad vertex classification against a direct count") {
  for (int seed = 1; seed <= 3; ++seed) {
    testing::PlantedSpec sp;
    sp.n_plus = 30;
    sp.bad = 2;
    sp.seed = seed;
    auto inst = testing::planted_instance(sp);
    auto a = classify_bad_vertices(inst.g, inst.decomp, {}, Rational(1, 10));
    std::set<int> got;
    for (int v = 0; v < inst.g.num_vertices(); ++v)
      if (!a.good[v]) got.insert(v);
    CHECK(got == expected_bad(inst.g, inst.decomp, 1, 10));
    for (int v : inst.planted_bad) CHECK(got.count(v));
    CHECK(audit_assignment(inst.g, a).empty());
    for (int v = 0; v < inst.g.num_vertices(); ++v)
      if (a.good[v]) CHECK(a.w_row[v] == a.x_row[v]);
  }
}

TEST_CASE("classification rejects malformed halves") {
  testing::PlantedSpec sp;
  sp.n_plus = 12;
  auto inst = testing::planted_instance(sp);
  std::vector<std::vector<std::vector<int>>> halves(3);
  CHECK_THROWS_AS(classify_bad_vertices(inst.g, inst.decomp, halves, Rational(1, 10)), PreconditionError);
}

TEST_CASE("extend_clique and building blocks return cliques of good vertices") {
  testing::PlantedSpec sp;
  sp.n_plus = 30;
  auto inst = testing::planted_instance(sp);
  auto a = classify_bad_vertices(inst.g, inst.decomp, {}, Rational(1, 10));
  const auto& g = inst.g;
  BlockRequest req;
  req.kind = BlockKind::Proper;
  auto res = building_block(g, a, req, g.empty_set());
  REQUIRE(res.clique.has_value());
  CHECK(res.clique->size() == 3);
  CHECK(is_clique(g, *res.clique));
  // proper: row i meets exactly p_i columns
  std::vector<int> per_row(2, 0);
  for (int v : *res.clique) ++per_row[a.w_row[v]];
  CHECK(per_row == std::vector<int>{2, 1});

  ExtendRequest ex;
  ex.seed = {g.id(0, 0)};
  ex.A = {{0, 1}, {2}};
  ex.parity = {-1, -1};
  ex.forbidden = g.empty_set();
  auto er = extend_clique(g, a, ex);
  REQUIRE(er.clique.has_value());
  CHECK(is_clique(g, *er.clique));
  CHECK(std::count(er.clique->begin(), er.clique->end(), g.id(0, 0)) == 1);
  for (int v : *er.clique) {
    const int c = g.class_of(v);
    CHECK(a.w_row[v] == (c <= 1 ? 0 : 1));
  }
  // forbidding all of class 2 makes the extension impossible
  ex.forbidden = g.class_mask(2);
  CHECK(!extend_clique(g, a, ex).clique.has_value());
}

TEST_CASE("pipeline on planted instances: stages pass and the packing recounts") {
  struct Case {
    std::vector<int> p;
    int n_plus, bad;
    double heavy;
  };
  for (const Case& c : {Case{{2, 1}, 81, 2, 0.75}, Case{{1, 1, 1}, 78, 1, 0.75}, Case{{3}, 81, 0, 0.9}}) {
    CAPTURE(c.p.size());
    testing::PlantedSpec sp;
    sp.p = c.p;
    sp.n_plus = c.n_plus;
    sp.bad = c.bad;
    sp.heavy_inside = c.heavy;
    sp.diag_missing = 0.002;
    auto inst = testing::planted_instance(sp);
    PipelineParams params;
    params.planted = inst.decomp;
    params.budget = 300'000;
    auto run = run_pipeline(inst.g, 3, params);
    CHECK_MESSAGE(run.ok, run.failure);
    for (const auto& st : run.stages) CHECK_MESSAGE(st.ok, st.name << ": " << st.failure);
    REQUIRE(run.packing.has_value());
    CHECK(perfect_recount(inst.g, *run.packing, 3));
    check_ledger_independently(inst.g, run.ledger, 3);
    CHECK(verify_ledger(inst.g, run.assignment, run.ledger, 3).empty());
    if (c.p.size() > 1) CHECK(run.final_blocks.n_prime % 24 == 0);
  }
}

TEST_CASE("pipeline on a pair-complete row") {
  testing::PlantedSpec sp;
  sp.pair_complete = true;
  sp.diag_missing = 0.0;
  sp.n_plus = 81;
  auto inst = testing::planted_instance(sp);
  PipelineParams params;
  params.planted = inst.decomp;
  params.budget = 300'000;
  auto run = run_pipeline(inst.g, 3, params);
  CHECK_MESSAGE(run.ok, run.failure);
  REQUIRE(run.packing.has_value());
  CHECK(perfect_recount(inst.g, *run.packing, 3));
  CHECK(run.assignment.pair_complete[0]);
}

TEST_CASE("pipeline preconditions") {
  auto g = complete_multipartite({6, 6, 6});
  CHECK_THROWS_AS(run_pipeline(g, 3, {}), PreconditionError);
  PipelineParams bad_d;
  bad_d.d = Rational(1, 50);  // no rational square root
  auto g4 = complete_multipartite({12, 12, 12, 12});
  CHECK_THROWS_AS(run_pipeline(g4, 3, bad_d), PreconditionError);
}

TEST_CASE("glue_rows on hand-built rows") {
  // r = 4, k = 3, rows of weight 2 and 1, n' = 24; everything complete across rows
  const int r = 4, np = 24;
  MultipartiteGraph g(std::vector<int>(r, 3 * np));
  FinalBlocks x;
  x.n_prime = np;
  x.p = {2, 1};
  x.blocks.assign(2, std::vector<std::vector<int>>(r));
  x.halves.assign(2, {});
  for (int j = 0; j < r; ++j)
    for (int o = 0; o < 3 * np; ++o) x.blocks[o < 2 * np ? 0 : 1][j].push_back(g.id(j, o));
  // row 0 carries only the edges of a balanced matching, row 1 is independent
  RowPackings rows;
  rows.rows.resize(2);
  std::vector<int> next(r, 0);
  const int per = r * np / 6;
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b)
      for (int t = 0; t < per; ++t) {
        const int u = x.blocks[0][a][next[a]++], v = x.blocks[0][b][next[b]++];
        g.add_edge(u, v);
        rows.rows[0].cliques.push_back({u, v});
      }
  for (int j = 0; j < r; ++j)
    for (int v : x.blocks[1][j]) rows.rows[1].cliques.push_back({v});
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b)
      if (a != b)
        for (int u : x.blocks[0][a])
          for (int v : x.blocks[1][b]) g.add_edge(u, v);
  auto res = glue_rows(g, x, rows);
  REQUIRE_MESSAGE(res.packing.has_value(), res.failure);
  CHECK(perfect_recount(g, *res.packing, 3));
  CHECK(res.logs.size() == 24);  // injective maps [3] -> [4]
  for (const auto& l : res.logs) CHECK(l.min_degree == l.full_degree);

  RowPackings broken = rows;
  broken.rows[0].cliques.pop_back();
  CHECK_THROWS_AS(glue_rows(g, x, broken), PreconditionError);
}

TEST_CASE("solve: complete graphs, gamma and preconditions") {
  auto res = solve(complete_multipartite({3, 3, 3, 3}), 3);
  CHECK(res.status == SolveStatus::Packed);
  REQUIRE(res.packing);
  CHECK(perfect_recount(complete_multipartite({3, 3, 3, 3}), *res.packing, 3));

  auto gi = build_gamma(3, 3, 3);  // rn/k = 3 odd
  auto ge = solve(gi.graph, 3);
  CHECK(ge.status == SolveStatus::Extremal);
  CHECK(!ge.packing);

  auto gi2 = build_gamma(2, 4, 2);  // k = 2, rn/k = 4 even
  auto g2 = solve(gi2.graph, 2);
  CHECK(g2.status == SolveStatus::Packed);
  CHECK(perfect_recount(gi2.graph, *g2.packing, 2));

  CHECK_THROWS_AS(solve(complete_multipartite({2, 3}), 2), PreconditionError);
  CHECK_THROWS_AS(solve(complete_multipartite({2, 2}), 3), PreconditionError);
  CHECK_THROWS_AS(solve(MultipartiteGraph({2, 2, 2}), 3), PreconditionError);  // no edges
}

TEST_CASE("solve agrees with the oracle on small random instances") {
  int packed = 0;
  for (std::uint64_t seed = 1; seed <= 60; ++seed) {
    const int r = 2 + static_cast<int>(seed % 3);
    const int k = 2 + static_cast<int>((seed / 3) % (r - 1));
    const int n = k * (1 + static_cast<int>(seed % 2));
    if (r * n > 15) continue;
    const int md = ((k - 1) * n + k - 1) / k;
    auto g = random_min_degree_graph(std::vector<int>(r, n), md, seed, 1.0);
    auto res = solve(g, k);
    auto v = brute_force_packing(g, k);
    REQUIRE(v.completed);
    CHECK((res.status == SolveStatus::Packed) == v.exists);
    if (res.packing) {
      CHECK(perfect_recount(g, *res.packing, k));
      ++packed;
    }
    auto j = solve_result_to_json(g, res);
    CHECK(j["status"] == to_string(res.status));
  }
  CHECK(packed > 10);
}
