#include <algorithm>
#include <bit>
#include <numeric>
#include <random>

#include "kpack/detect.hpp"
#include "kpack/errors.hpp"

namespace kpack {

namespace {

constexpr std::size_t kMaxReported = 16;

std::int64_t binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

std::vector<std::uint32_t> combos(int m, int t) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask)
    if (std::popcount(mask) == t) out.push_back(mask);
  // Order by sorted index list, matching the exact detectors.
  std::sort(out.begin(), out.end(), [](std::uint32_t a, std::uint32_t b) {
    while (a && b) {
      int x = std::countr_zero(a), y = std::countr_zero(b);
      if (x != y) return x < y;
      a &= a - 1;
      b &= b - 1;
    }
    return a == 0 && b != 0;
  });
  return out;
}

std::int64_t count_violating(const std::vector<Clique>& cliques, const Bitset& s, int j) {
  std::int64_t bad = 0;
  for (const auto& c : cliques) {
    int hit = 0;
    for (int u : c) hit += s.test(u);
    if (hit > j) ++bad;
  }
  return bad;
}

std::vector<std::vector<int>> set_per_class(const MultipartiteGraph& g, const Bitset& s) {
  std::vector<std::vector<int>> out(g.r());
  s.for_each([&](std::size_t u) { out[g.class_of(static_cast<int>(u))].push_back(static_cast<int>(u)); });
  return out;
}

void push_space(DiagnosisReport& rep, SpaceCandidate cand) {
  for (const auto& c : rep.space)
    if (c.j == cand.j && c.S == cand.S) return;
  if (rep.space.size() < kMaxReported) rep.space.push_back(std::move(cand));
}

// Swap local search minimising the number of violating cliques.
std::optional<SpaceCandidate> search_space(const MultipartiteGraph& g, const std::vector<Clique>& cliques,
                                           int j, int t, const DetectOptions& opts) {
  std::optional<SpaceCandidate> best;
  for (int k = 0; k < std::max(1, opts.restarts / 4); ++k) {
    std::mt19937_64 rng(opts.seed * 7919ull + static_cast<std::uint64_t>(k));
    Bitset s = g.empty_set();
    for (int c = 0; c < g.r(); ++c) {
      std::vector<int> vs;
      for (int u = g.class_begin(c); u < g.class_end(c); ++u) vs.push_back(u);
      std::shuffle(vs.begin(), vs.end(), rng);
      for (int i = 0; i < t; ++i) s.set(vs[i]);
    }
    std::int64_t cur = count_violating(cliques, s, j);
    bool improved = true;
    while (improved && cur > 0) {
      improved = false;
      for (int c = 0; c < g.r() && !improved; ++c)
        for (int u = g.class_begin(c); u < g.class_end(c) && !improved; ++u) {
          if (!s.test(u)) continue;
          for (int w = g.class_begin(c); w < g.class_end(c); ++w) {
            if (s.test(w)) continue;
            s.reset(u);
            s.set(w);
            auto val = count_violating(cliques, s, j);
            if (val < cur) {
              cur = val;
              improved = true;
              break;
            }
            s.reset(w);
            s.set(u);
          }
        }
    }
    if (!best || cur < best->violating) best = SpaceCandidate{j, set_per_class(g, s), cur, "search"};
  }
  return best;
}

// Set partitions of [m] with every block of size >= floor, as restricted
// growth strings.
void set_partitions(int m, int floor_size, std::vector<int>& cur, int blocks,
                    std::vector<std::vector<int>>& out) {
  if (static_cast<int>(cur.size()) == m) {
    std::vector<int> sizes(blocks, 0);
    for (int b : cur) ++sizes[b];
    for (int s : sizes)
      if (s < floor_size) return;
    out.push_back(cur);
    return;
  }
  for (int b = 0; b <= blocks; ++b) {
    cur.push_back(b);
    set_partitions(m, floor_size, cur, std::max(blocks, b + 1), out);
    cur.pop_back();
  }
}

void check_refinement(const MultipartiteGraph& g, const std::vector<Clique>& cliques,
                      const PartitionLabeling& q, std::int64_t mu_count, const std::string& source,
                      DiagnosisReport& rep) {
  auto lattice = robust_edge_lattice(cliques, q, mu_count);
  auto res = is_complete_wrt(lattice, q, g);
  if (res.complete) return;
  for (const auto& c : rep.divisibility)
    if (c.q.part_of == q.part_of) return;
  if (rep.divisibility.size() >= kMaxReported) return;
  auto minimal = merge_to_minimal(cliques, q, g, mu_count);
  rep.divisibility.push_back(DivisibilityCandidate{q, *res.violating, minimal.q, source});
}

PartitionLabeling halves_labeling(const MultipartiteGraph& g, const std::vector<std::vector<int>>& halves) {
  std::vector<int> part(g.num_vertices());
  for (int u = 0; u < g.num_vertices(); ++u) {
    int c = g.class_of(u);
    bool in = std::binary_search(halves[c].begin(), halves[c].end(), u);
    part[u] = 2 * c + (in ? 0 : 1);
  }
  return make_labeling(g, std::move(part));
}

}  // namespace

DiagnosisReport diagnose_barriers(const MultipartiteGraph& g, int p, const BarrierThresholds& th,
                                  const PartitionLabeling* planted) {
  if (p < 1 || p > g.r()) throw PreconditionError("diagnose_barriers: p must lie in [1, r]");
  if (!g.equal_class_sizes() || g.class_size(0) % p != 0)
    throw PreconditionError("diagnose_barriers: classes must have equal size p*n");
  DiagnosisReport rep;
  const int m = g.class_size(0), n = m / p, r = g.r();

  if (p >= 2) rep.splittable = is_splittable(g, p, th.d, th.opts);
  if (p == 2) rep.pair_complete = is_pair_complete(g, th.d, th.opts);

  const auto cliques = clique_complex_edges(g, p);

  // Space barriers.
  bool exhaustive = true;
  for (int j = 1; j < p; ++j) {
    const int t = j * n;
    std::int64_t per_class = binom(m, t), total = 1;
    bool small = m <= 16;
    for (int c = 0; c < r && small; ++c) {
      total *= per_class;
      if (total > th.exact_limit) small = false;
    }
    if (small) {
      auto opts = combos(m, t);
      std::vector<std::size_t> idx(r, 0);
      while (true) {
        Bitset s = g.empty_set();
        for (int c = 0; c < r; ++c)
          for (std::uint32_t w = opts[idx[c]]; w; w &= w - 1) s.set(g.id(c, std::countr_zero(w)));
        auto bad = count_violating(cliques, s, j);
        if (bad <= th.space_tolerance) push_space(rep, SpaceCandidate{j, set_per_class(g, s), bad, "exact"});
        int c = r - 1;
        while (c >= 0 && ++idx[c] == opts.size()) idx[c--] = 0;
        if (c < 0) break;
      }
    } else {
      exhaustive = false;
      auto found = search_space(g, cliques, j, t, th.opts);
      if (found && found->violating <= th.space_tolerance) push_space(rep, *found);
    }
    if (planted && !planted->respects_classes && planted->d == 2) {
      Bitset s = g.empty_set();
      for (int u = 0; u < g.num_vertices(); ++u)
        if (planted->part_of[u] == 1) s.set(u);
      auto per = set_per_class(g, s);
      bool sized = true;
      for (const auto& cls : per) sized = sized && static_cast<int>(cls.size()) == t;
      if (sized) {
        auto bad = count_violating(cliques, s, j);
        if (bad <= th.space_tolerance) push_space(rep, SpaceCandidate{j, per, bad, "planted"});
      }
    }
  }
  rep.space_exhaustive = exhaustive;

  // Divisibility barriers.
  std::vector<std::vector<int>> parts;
  if (m <= 12) {
    std::vector<int> cur;
    set_partitions(m, std::max(1, th.floor_size), cur, 0, parts);
  }
  std::int64_t total = parts.empty() ? th.exact_limit + 1 : 1;
  for (int c = 0; c < r && total <= th.exact_limit; ++c) total *= static_cast<std::int64_t>(parts.size());
  if (total <= th.exact_limit) {
    rep.divisibility_exhaustive = true;
    std::vector<std::size_t> idx(r, 0);
    while (true) {
      std::vector<int> part(g.num_vertices());
      int next = 0;
      bool refined = false;
      for (int c = 0; c < r; ++c) {
        const auto& rgs = parts[idx[c]];
        int blocks = *std::max_element(rgs.begin(), rgs.end()) + 1;
        refined = refined || blocks > 1;
        for (int o = 0; o < m; ++o) part[g.id(c, o)] = next + rgs[o];
        next += blocks;
      }
      if (refined) check_refinement(g, cliques, make_labeling(g, part), th.mu_count, "exact", rep);
      int c = r - 1;
      while (c >= 0 && ++idx[c] == parts.size()) idx[c--] = 0;
      if (c < 0) break;
    }
  } else {
    if (rep.pair_complete)
      check_refinement(g, cliques, halves_labeling(g, rep.pair_complete->halves), th.mu_count, "pair_complete",
                       rep);
  }
  if (planted && planted->respects_classes) check_refinement(g, cliques, *planted, th.mu_count, "planted", rep);
  return rep;
}

}  // namespace kpack
