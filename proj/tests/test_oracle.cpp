#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <functional>
#include <numeric>
#include <random>

#include "kpack/errors.hpp"
#include "kpack/oracle.hpp"
#include "support/naive.hpp"

using namespace kpack;

namespace {

// Picks the lowest uncovered vertex and tries every clique through it, over
// all ordered choices of the remaining classes. No pruning.
bool naive_packing_exists(const MultipartiteGraph& g, int k) {
  const auto e = naive::edge_set(g);
  const int N = g.num_vertices();
  std::vector<char> used(N, 0);
  std::function<bool()> go = [&]() -> bool {
    int u = 0;
    while (u < N && used[u]) ++u;
    if (u == N) return true;
    used[u] = 1;
    std::vector<int> cur{u};
    std::function<bool(int)> grow = [&](int from) -> bool {
      if (static_cast<int>(cur.size()) == k) return go();
      for (int w = from; w < N; ++w) {
        if (used[w]) continue;
        bool ok = true;
        for (int x : cur) ok = ok && g.class_of(x) != g.class_of(w) && naive::has(e, x, w);
        if (!ok) continue;
        used[w] = 1;
        cur.push_back(w);
        if (grow(w + 1)) return true;
        cur.pop_back();
        used[w] = 0;
      }
      return false;
    };
    const bool res = grow(u + 1);
    used[u] = 0;
    return res;
  };
  return go();
}

MultipartiteGraph shuffled(const MultipartiteGraph& g, std::mt19937_64& rng) {
  std::vector<int> cls(g.r());
  std::iota(cls.begin(), cls.end(), 0);
  std::shuffle(cls.begin(), cls.end(), rng);
  std::vector<int> sizes(g.r());
  for (int c = 0; c < g.r(); ++c) sizes[cls[c]] = g.class_size(c);
  MultipartiteGraph h(sizes);
  std::vector<std::vector<int>> offs(g.r());
  for (int c = 0; c < g.r(); ++c) {
    offs[c].resize(g.class_size(c));
    std::iota(offs[c].begin(), offs[c].end(), 0);
    std::shuffle(offs[c].begin(), offs[c].end(), rng);
  }
  auto img = [&](int u) {
    const auto v = g.vertex(u);
    return h.id(cls[v.cls], offs[v.cls][v.off]);
  };
  for (auto [u, v] : g.edges()) h.add_edge(img(u), img(v));
  return h;
}

}  // namespace

TEST_CASE("brute force agrees with an unpruned search") {
  std::mt19937_64 rng(5);
  int yes = 0, no = 0;
  for (int t = 0; t < 150; ++t) {
    const int r = 2 + t % 3;
    const int k = 2 + (t / 3) % (r - 1);
    const int n = k;
    MultipartiteGraph g(std::vector<int>(r, n));
    std::bernoulli_distribution keep(0.55 + 0.1 * (t % 4));
    for (int u = 0; u < g.num_vertices(); ++u)
      for (int v = u + 1; v < g.num_vertices(); ++v)
        if (g.class_of(u) != g.class_of(v) && keep(rng)) g.add_edge(u, v);
    auto verdict = brute_force_packing(g, k);
    REQUIRE(verdict.completed);
    const bool expect = naive_packing_exists(g, k);
    CHECK(verdict.exists == expect);
    if (verdict.exists) {
      ++yes;
      REQUIRE(verdict.witness);
      CHECK(verify_packing(g, *verdict.witness, k, true).ok);
    } else {
      ++no;
    }
  }
  CHECK(yes > 10);
  CHECK(no > 10);
}

TEST_CASE("brute force budget cuts the search short") {
  auto gi = build_gamma(3, 3, 3);
  auto v = brute_force_packing(gi.graph, 3, 5);
  CHECK(!v.completed);
  CHECK(!v.exists);
  auto full = brute_force_packing(gi.graph, 3);
  CHECK(full.completed);
  CHECK(!full.exists);
}

TEST_CASE("gamma isomorphism survives class and vertex shuffles") {
  std::mt19937_64 rng(8);
  for (auto [n, r, k] : std::vector<std::array<int, 3>>{{3, 3, 3}, {2, 4, 2}, {4, 3, 2}, {4, 4, 4}}) {
    auto gi = build_gamma(n, r, k);
    for (int t = 0; t < 5; ++t) {
      auto h = shuffled(gi.graph, rng);
      CHECK(is_isomorphic_to_gamma(h, n, r, k));
      // dropping an edge breaks it
      auto e = h.edges();
      h.remove_edge(e[t % e.size()].first, e[t % e.size()].second);
      CHECK(!is_isomorphic_to_gamma(h, n, r, k));
    }
  }
  auto c = complete_multipartite({3, 3, 3});
  CHECK(!is_isomorphic_to_gamma(c, 3, 3, 3));
  CHECK(!is_isomorphic_to_gamma(c, 6, 3, 3));
}

TEST_CASE("sample argument parsing") {
  auto s = parse_sample("exhaustive");
  CHECK(s.exhaustive);
  s = parse_sample("random:12:7");
  CHECK(!s.exhaustive);
  CHECK(s.count == 12);
  CHECK(s.seed == 7);
  CHECK_THROWS_AS(parse_sample("random:x"), PreconditionError);
  CHECK_THROWS_AS(parse_sample("sometimes"), PreconditionError);
}

TEST_CASE("boundary harness: exhaustive k = 2 on two classes of 2") {
  auto rep = verify_theorem_boundary(2, 2, 2, parse_sample("exhaustive"));
  CHECK(rep.examined == 16);
  // delta* >= 1 with classes of 2: count directly
  int qual = 0;
  for (int mask = 0; mask < 16; ++mask) {
    std::vector<int> deg(4, 0);
    for (int b = 0; b < 4; ++b)
      if (mask >> b & 1) ++deg[b / 2], ++deg[2 + b % 2];
    if (*std::min_element(deg.begin(), deg.end()) >= 1) ++qual;
  }
  CHECK(rep.qualifying == qual);
  CHECK(rep.packed + rep.extremal + rep.incomplete + static_cast<std::int64_t>(rep.counterexamples.size()) ==
        rep.qualifying);
  CHECK(rep.counterexamples.empty());
}

TEST_CASE("boundary harness: random samples at the threshold") {
  auto rep = verify_theorem_boundary(3, 3, 3, parse_sample("random:25:3"));
  CHECK(rep.examined == 25);
  CHECK(rep.qualifying == static_cast<std::int64_t>(rep.entries.size()));
  CHECK(rep.counterexamples.empty());
  for (const auto& e : rep.entries) {
    CHECK(e.min_degree >= 2);
    if (e.completed && !e.exists) CHECK((e.parity_odd && e.gamma_iso));
  }
}
