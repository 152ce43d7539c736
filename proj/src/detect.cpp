#include "kpack/detect.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <random>

#include "kpack/errors.hpp"
#include "kpack/kernels.hpp"

namespace kpack {

DetectMode parse_mode(const std::string& s) {
  if (s == "exact") return DetectMode::Exact;
  if (s == "heuristic") return DetectMode::Heuristic;
  if (s == "auto") return DetectMode::Auto;
  throw PreconditionError("unknown mode '" + s + "' (expected exact, heuristic or auto)");
}

std::string to_string(DetectMode m) {
  switch (m) {
    case DetectMode::Exact: return "exact";
    case DetectMode::Heuristic: return "heuristic";
    case DetectMode::Auto: return "auto";
  }
  return "auto";
}

namespace {

// All t-subsets of [m] as bit masks, in lexicographic order of index lists.
std::vector<std::uint32_t> combinations(int m, int t) {
  std::vector<std::uint32_t> out;
  std::vector<int> idx(t);
  std::iota(idx.begin(), idx.end(), 0);
  if (t > m) return out;
  while (true) {
    std::uint32_t mask = 0;
    for (int i : idx) mask |= (1u << i);
    out.push_back(mask);
    int i = t - 1;
    while (i >= 0 && idx[i] == m - t + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < t; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

// Neighbourhoods restricted to single classes, as local offset masks.
struct LocalAdjacency {
  int r = 0, m = 0;
  std::vector<std::vector<std::uint32_t>> nb;  // [global id][class]
  explicit LocalAdjacency(const MultipartiteGraph& g) : r(g.r()), m(g.class_size(0)) {
    nb.assign(g.num_vertices(), std::vector<std::uint32_t>(r, 0));
    for (int u = 0; u < g.num_vertices(); ++u)
      g.neighbors(u).for_each([&](std::size_t v) {
        auto vv = g.vertex(static_cast<int>(v));
        nb[u][vv.cls] |= (1u << vv.off);
      });
  }
  // e(S, T) for S inside class a, T inside class b, both local masks.
  int edges(const MultipartiteGraph& g, int a, std::uint32_t s, int b, std::uint32_t t) const {
    int e = 0;
    for (std::uint32_t w = s; w; w &= w - 1) {
      int off = std::countr_zero(w);
      e += std::popcount(nb[g.id(a, off)][b] & t);
    }
    return e;
  }
};

std::vector<int> mask_to_ids(const MultipartiteGraph& g, int c, std::uint32_t mask) {
  std::vector<int> out;
  for (std::uint32_t w = mask; w; w &= w - 1) out.push_back(g.id(c, std::countr_zero(w)));
  return out;
}

std::vector<int> complement_in_class(const MultipartiteGraph& g, int c, const std::vector<int>& s) {
  std::vector<int> out;
  for (int u = g.class_begin(c); u < g.class_end(c); ++u)
    if (!std::binary_search(s.begin(), s.end(), u)) out.push_back(u);
  return out;
}

void check_exact_size(int m, int cap) {
  if (m > cap) throw PreconditionError("exact search needs class size <= cap (" + std::to_string(cap) + ")");
  if (m > 16) throw PreconditionError("exact search supports class size at most 16");
}

bool use_exact(const DetectOptions& o, int m) {
  if (o.mode == DetectMode::Exact) {
    check_exact_size(m, o.exact_cap);
    return true;
  }
  if (o.mode == DetectMode::Heuristic) return false;
  return m <= std::min(o.exact_cap, 16);
}

using PairTest = std::function<bool(int a, std::uint32_t x, int b, std::uint32_t y)>;

std::optional<std::vector<std::uint32_t>> exact_select(const MultipartiteGraph& g, int t,
                                                       const PairTest& ok) {
  const int r = g.r(), m = g.class_size(0);
  auto opts = combinations(m, t);
  SelectionProblem prob;
  prob.group_sizes.assign(r, static_cast<int>(opts.size()));
  prob.compat.assign(r, std::vector<std::vector<Bitset>>(r));
  for (int a = 0; a < r; ++a)
    for (int b = a + 1; b < r; ++b) {
      auto& rows = prob.compat[a][b];
      rows.assign(opts.size(), Bitset(opts.size()));
      for (std::size_t x = 0; x < opts.size(); ++x)
        for (std::size_t y = 0; y < opts.size(); ++y)
          if (ok(a, opts[x], b, opts[y])) rows[x].set(y);
    }
  auto sel = find_selection_parallel(prob);
  if (!sel) return std::nullopt;
  std::vector<std::uint32_t> out;
  for (int x : *sel) out.push_back(opts[x]);
  return out;
}

// Swap-based hill climbing over equal-size subsets S_c of every class. The
// cached counts make a candidate swap O(r) to score.
class SubsetSearch {
 public:
  enum class Kind { Split, PairComplete };

  SubsetSearch(const MultipartiteGraph& g, Kind kind, std::int64_t thr_a, std::int64_t thr_b)
      : g_(g), kind_(kind), thr_a_(thr_a), thr_b_(thr_b), r_(g.r()) {
    const int nv = g.num_vertices();
    dV_.assign(nv, std::vector<int>(r_, 0));
    for (int u = 0; u < nv; ++u)
      for (int b = 0; b < r_; ++b) dV_[u][b] = g.degree_into(u, b);
    EVV_.assign(r_, std::vector<std::int64_t>(r_, 0));
    for (int a = 0; a < r_; ++a)
      for (int u = g.class_begin(a); u < g.class_end(a); ++u)
        for (int b = 0; b < r_; ++b) EVV_[a][b] += dV_[u][b];
  }

  // Runs one climb from `start` (t ids per class). Returns the sets on success.
  std::optional<std::vector<std::vector<int>>> climb(const std::vector<std::vector<int>>& start,
                                                     std::mt19937_64& rng) {
    load(start);
    std::int64_t cur = deficit_all();
    int stall = 0;
    while (cur > 0 && stall < 4) {
      bool moved = false;
      std::vector<int> order(r_);
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      for (int c : order) {
        std::int64_t best = cur;
        int bu = -1, bw = -1;
        for (int u : members(c, true))
          for (int w : members(c, false)) {
            std::int64_t val = deficit_after_swap(c, u, w);
            if (val < best) {
              best = val;
              bu = u;
              bw = w;
            }
          }
        if (bu >= 0) {
          apply_swap(c, bu, bw);
          cur = best;
          moved = true;
        }
        if (cur == 0) break;
      }
      if (!moved) {
        // Perturb with a random swap and keep going for a few rounds.
        ++stall;
        int c = static_cast<int>(rng() % r_);
        auto in = members(c, true), out = members(c, false);
        if (in.empty() || out.empty()) break;
        apply_swap(c, in[rng() % in.size()], out[rng() % out.size()]);
        cur = deficit_all();
      }
    }
    if (cur != 0) return std::nullopt;
    std::vector<std::vector<int>> sets(r_);
    for (int c = 0; c < r_; ++c) sets[c] = members(c, true);
    return sets;
  }

 private:
  std::vector<int> members(int c, bool inside) const {
    std::vector<int> out;
    for (int u = g_.class_begin(c); u < g_.class_end(c); ++u)
      if (inS_[u] == inside) out.push_back(u);
    return out;
  }

  void load(const std::vector<std::vector<int>>& start) {
    const int nv = g_.num_vertices();
    inS_.assign(nv, false);
    for (const auto& s : start)
      for (int u : s) inS_[u] = true;
    dS_.assign(nv, std::vector<int>(r_, 0));
    for (int u = 0; u < nv; ++u)
      if (inS_[u])
        g_.neighbors(u).for_each([&](std::size_t v) { ++dS_[v][g_.class_of(u)]; });
    ESS_.assign(r_, std::vector<std::int64_t>(r_, 0));
    F_.assign(r_, std::vector<std::int64_t>(r_, 0));
    for (int u = 0; u < nv; ++u) {
      if (!inS_[u]) continue;
      int a = g_.class_of(u);
      for (int b = 0; b < r_; ++b) {
        ESS_[a][b] += dS_[u][b];
        F_[a][b] += dV_[u][b];
      }
    }
  }

  std::int64_t pair_deficit(int a, int b, std::int64_t ess, std::int64_t fab, std::int64_t fba) const {
    if (kind_ == Kind::Split) {
      std::int64_t e1 = fab - ess, e2 = fba - ess;
      return std::max<std::int64_t>(0, thr_a_ - e1) + std::max<std::int64_t>(0, thr_a_ - e2);
    }
    std::int64_t out = EVV_[a][b] - fab - fba + ess;
    std::int64_t c1 = fab - ess, c2 = fba - ess;
    return std::max<std::int64_t>(0, thr_a_ - ess) + std::max<std::int64_t>(0, thr_a_ - out) +
           std::max<std::int64_t>(0, c1 - thr_b_) + std::max<std::int64_t>(0, c2 - thr_b_);
  }

  std::int64_t deficit_all() const {
    std::int64_t s = 0;
    for (int a = 0; a < r_; ++a)
      for (int b = a + 1; b < r_; ++b) s += pair_deficit(a, b, ESS_[a][b], F_[a][b], F_[b][a]);
    return s;
  }

  std::int64_t deficit_after_swap(int c, int u, int w) const {
    std::int64_t s = 0;
    for (int a = 0; a < r_; ++a)
      for (int b = a + 1; b < r_; ++b) {
        if (a != c && b != c) {
          s += pair_deficit(a, b, ESS_[a][b], F_[a][b], F_[b][a]);
          continue;
        }
        int o = (a == c) ? b : a;
        std::int64_t ess = ESS_[a][b] + dS_[w][o] - dS_[u][o];
        std::int64_t fco = F_[c][o] + dV_[w][o] - dV_[u][o];
        std::int64_t foc = F_[o][c];
        s += (a == c) ? pair_deficit(a, b, ess, fco, foc) : pair_deficit(a, b, ess, foc, fco);
      }
    return s;
  }

  void apply_swap(int c, int u, int w) {
    for (int b = 0; b < r_; ++b) {
      if (b == c) continue;
      std::int64_t delta = dS_[w][b] - dS_[u][b];
      ESS_[c][b] += delta;
      ESS_[b][c] += delta;
      F_[c][b] += dV_[w][b] - dV_[u][b];
    }
    inS_[u] = false;
    inS_[w] = true;
    g_.neighbors(u).for_each([&](std::size_t v) { --dS_[v][c]; });
    g_.neighbors(w).for_each([&](std::size_t v) { ++dS_[v][c]; });
  }

  const MultipartiteGraph& g_;
  Kind kind_;
  std::int64_t thr_a_, thr_b_;
  int r_;
  std::vector<bool> inS_;
  std::vector<std::vector<int>> dV_, dS_;
  std::vector<std::vector<std::int64_t>> EVV_, ESS_, F_;
};

// Ranks the vertices of class c by `key` (ascending, ties by id), keeps t.
std::vector<int> take_ranked(const MultipartiteGraph& g, int c, int t,
                             const std::function<int(int)>& key) {
  std::vector<int> vs;
  for (int u = g.class_begin(c); u < g.class_end(c); ++u) vs.push_back(u);
  std::stable_sort(vs.begin(), vs.end(), [&](int a, int b) { return key(a) < key(b); });
  vs.resize(t);
  std::sort(vs.begin(), vs.end());
  return vs;
}

// Seeds built around a pivot vertex v: in other classes take its non-neighbours
// (or neighbours) first, then fill v's class by affinity to the rest.
std::vector<std::vector<int>> pivot_seed(const MultipartiteGraph& g, int v, int t, bool neighbours_first,
                                         bool prefer_complement_affinity) {
  std::vector<std::vector<int>> sets(g.r());
  int cv = g.class_of(v);
  for (int c = 0; c < g.r(); ++c) {
    if (c == cv) continue;
    sets[c] = take_ranked(g, c, t, [&](int u) {
      bool adj = g.adjacent(u, v);
      return neighbours_first ? (adj ? 0 : 1) : (adj ? 1 : 0);
    });
  }
  Bitset target = g.empty_set();
  for (int c = 0; c < g.r(); ++c) {
    if (c == cv) continue;
    if (prefer_complement_affinity) {
      for (int u = g.class_begin(c); u < g.class_end(c); ++u)
        if (!std::binary_search(sets[c].begin(), sets[c].end(), u)) target.set(u);
    } else {
      for (int u : sets[c]) target.set(u);
    }
  }
  sets[cv] = take_ranked(g, cv, t, [&](int u) { return -g.degree_into(u, target); });
  return sets;
}

std::vector<std::vector<int>> random_seed(const MultipartiteGraph& g, int t, std::mt19937_64& rng) {
  std::vector<std::vector<int>> sets(g.r());
  for (int c = 0; c < g.r(); ++c) {
    std::vector<int> vs;
    for (int u = g.class_begin(c); u < g.class_end(c); ++u) vs.push_back(u);
    std::shuffle(vs.begin(), vs.end(), rng);
    vs.resize(t);
    std::sort(vs.begin(), vs.end());
    sets[c] = vs;
  }
  return sets;
}

std::optional<std::vector<std::vector<int>>> heuristic_search(const MultipartiteGraph& g,
                                                              SubsetSearch::Kind kind, int t,
                                                              std::int64_t thr_a, std::int64_t thr_b,
                                                              const DetectOptions& opts) {
  const int restarts = std::max(1, opts.restarts);
  const int nv = g.num_vertices();
  std::vector<std::optional<std::vector<std::vector<int>>>> found(restarts);
#pragma omp parallel for schedule(dynamic, 1)
  for (int k = 0; k < restarts; ++k) {
    std::mt19937_64 rng(opts.seed * 1000003ull + static_cast<std::uint64_t>(k));
    SubsetSearch search(g, kind, thr_a, thr_b);
    std::vector<std::vector<int>> start;
    // First restarts pivot on spread-out vertices; the rest start at random.
    if (k < 4 && nv > 0) {
      int v = static_cast<int>((static_cast<std::int64_t>(k / 2) * nv) / 2) % nv;
      bool nf = (kind == SubsetSearch::Kind::PairComplete) ? true : (k % 2 == 0);
      start = pivot_seed(g, v, t, nf, kind == SubsetSearch::Kind::Split);
    } else {
      start = random_seed(g, t, rng);
    }
    found[k] = search.climb(start, rng);
  }
  for (auto& f : found)
    if (f) return f;
  return std::nullopt;
}

void require_equal_classes(const MultipartiteGraph& g, int multiple, const char* what) {
  if (g.r() < 2) throw PreconditionError(std::string(what) + ": need at least two classes");
  if (!g.equal_class_sizes()) throw PreconditionError(std::string(what) + ": class sizes differ");
  int m = g.class_size(0);
  if (m == 0 || m % multiple != 0)
    throw PreconditionError(std::string(what) + ": class size " + std::to_string(m) +
                            " is not a positive multiple of " + std::to_string(multiple));
}

}  // namespace

std::optional<SplitWitness> is_splittable(const MultipartiteGraph& g, int p, const Rational& d,
                                          const DetectOptions& opts) {
  if (p < 1) throw PreconditionError("is_splittable: p must be positive");
  require_equal_classes(g, p, "is_splittable");
  const int m = g.class_size(0), n = m / p, r = g.r();
  if (p == 1) return std::nullopt;
  const bool exact = use_exact(opts, m);
  std::optional<LocalAdjacency> local;
  if (exact) local.emplace(g);
  for (int pp = 1; pp < p; ++pp) {
    const int t = pp * n;
    const std::int64_t area = static_cast<std::int64_t>(t) * (p - pp) * n;
    const std::int64_t thr = ceil_of((Rational(1) - d) * area);
    std::optional<std::vector<std::vector<int>>> sets;
    if (exact) {
      const std::uint32_t full = (m == 32) ? ~0u : ((1u << m) - 1);
      auto sel = exact_select(g, t, [&](int a, std::uint32_t x, int b, std::uint32_t y) {
        return local->edges(g, a, x, b, full & ~y) >= thr && local->edges(g, b, y, a, full & ~x) >= thr;
      });
      if (sel) {
        sets.emplace(r);
        for (int c = 0; c < r; ++c) (*sets)[c] = mask_to_ids(g, c, (*sel)[c]);
      }
    } else {
      sets = heuristic_search(g, SubsetSearch::Kind::Split, t, thr, 0, opts);
    }
    if (!sets) continue;
    SplitWitness w{pp, *sets, Rational(0)};
    if (!verify_split_witness(g, p, d, w)) throw InternalError("split search returned a bad witness");
    Rational best(1);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b)
        if (a != b) best = std::min(best, density(g, w.sets[a], complement_in_class(g, b, w.sets[b])));
    w.achieved_min_density = best;
    return w;
  }
  return std::nullopt;
}

std::optional<PairCompleteWitness> is_pair_complete(const MultipartiteGraph& g, const Rational& d,
                                                    const DetectOptions& opts) {
  require_equal_classes(g, 2, "is_pair_complete");
  const int m = g.class_size(0), n = m / 2, r = g.r();
  const std::int64_t area = static_cast<std::int64_t>(n) * n;
  const std::int64_t thr_in = ceil_of((Rational(1) - d) * area);
  const std::int64_t thr_cross = floor_of(d * area);
  std::optional<std::vector<std::vector<int>>> sets;
  if (use_exact(opts, m)) {
    LocalAdjacency local(g);
    const std::uint32_t full = (1u << m) - 1;
    auto sel = exact_select(g, n, [&](int a, std::uint32_t x, int b, std::uint32_t y) {
      std::uint32_t xc = full & ~x, yc = full & ~y;
      return local.edges(g, a, x, b, y) >= thr_in && local.edges(g, a, xc, b, yc) >= thr_in &&
             local.edges(g, a, x, b, yc) <= thr_cross && local.edges(g, b, y, a, xc) <= thr_cross;
    });
    if (sel) {
      sets.emplace(r);
      for (int c = 0; c < r; ++c) (*sets)[c] = mask_to_ids(g, c, (*sel)[c]);
    }
  } else {
    sets = heuristic_search(g, SubsetSearch::Kind::PairComplete, n, thr_in, thr_cross, opts);
  }
  if (!sets) return std::nullopt;
  PairCompleteWitness w;
  w.halves = *sets;
  if (!verify_pair_complete_witness(g, d, w)) throw InternalError("pair-complete search returned a bad witness");
  w.min_inside = Rational(1);
  w.min_outside = Rational(1);
  w.max_cross = Rational(0);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) {
      if (a == b) continue;
      auto ca = complement_in_class(g, a, w.halves[a]);
      auto cb = complement_in_class(g, b, w.halves[b]);
      w.min_inside = std::min(w.min_inside, density(g, w.halves[a], w.halves[b]));
      w.min_outside = std::min(w.min_outside, density(g, ca, cb));
      w.max_cross = std::max(w.max_cross, density(g, w.halves[a], cb));
    }
  return w;
}

bool verify_split_witness(const MultipartiteGraph& g, int p, const Rational& d, const SplitWitness& w) {
  if (static_cast<int>(w.sets.size()) != g.r() || p < 2) return false;
  const int n = g.class_size(0) / p;
  if (w.p_prime < 1 || w.p_prime >= p) return false;
  for (int c = 0; c < g.r(); ++c) {
    if (static_cast<int>(w.sets[c].size()) != w.p_prime * n) return false;
    for (int u : w.sets[c])
      if (g.class_of(u) != c) return false;
  }
  for (int a = 0; a < g.r(); ++a)
    for (int b = 0; b < g.r(); ++b) {
      if (a == b) continue;
      auto rest = complement_in_class(g, b, w.sets[b]);
      if (density(g, w.sets[a], rest) < Rational(1) - d) return false;
    }
  return true;
}

bool verify_pair_complete_witness(const MultipartiteGraph& g, const Rational& d,
                                  const PairCompleteWitness& w) {
  if (static_cast<int>(w.halves.size()) != g.r()) return false;
  const int n = g.class_size(0) / 2;
  for (int c = 0; c < g.r(); ++c) {
    if (static_cast<int>(w.halves[c].size()) != n) return false;
    for (int u : w.halves[c])
      if (g.class_of(u) != c) return false;
  }
  for (int a = 0; a < g.r(); ++a)
    for (int b = 0; b < g.r(); ++b) {
      if (a == b) continue;
      auto ca = complement_in_class(g, a, w.halves[a]);
      auto cb = complement_in_class(g, b, w.halves[b]);
      if (density(g, w.halves[a], w.halves[b]) < Rational(1) - d) return false;
      if (density(g, ca, cb) < Rational(1) - d) return false;
      if (density(g, w.halves[a], cb) > d) return false;
    }
  return true;
}

std::vector<int> RowDecomposition::block(const MultipartiteGraph& g, int i, int j) const {
  std::vector<int> out;
  for (int u = g.class_begin(j); u < g.class_end(j); ++u)
    if (row_of[u] == i) out.push_back(u);
  return out;
}

std::vector<int> RowDecomposition::row(int i) const {
  std::vector<int> out;
  for (std::size_t u = 0; u < row_of.size(); ++u)
    if (row_of[u] == i) out.push_back(static_cast<int>(u));
  return out;
}

RowDecomposition trivial_decomposition(const MultipartiteGraph& g, int k) {
  require_equal_classes(g, k, "trivial_decomposition");
  return RowDecomposition{g.class_size(0) / k, {k}, std::vector<int>(g.num_vertices(), 0)};
}

void validate_decomposition(const MultipartiteGraph& g, const RowDecomposition& x) {
  if (static_cast<int>(x.row_of.size()) != g.num_vertices())
    throw PreconditionError("decomposition does not label every vertex");
  std::vector<std::vector<int>> sizes(x.s(), std::vector<int>(g.r(), 0));
  for (int u = 0; u < g.num_vertices(); ++u) {
    int i = x.row_of[u];
    if (i < -1 || i >= x.s()) throw PreconditionError("row index out of range");
    if (i >= 0) ++sizes[i][g.class_of(u)];
  }
  for (int i = 0; i < x.s(); ++i) {
    if (x.p[i] < 1) throw PreconditionError("row weights must be positive");
    for (int j = 0; j < g.r(); ++j)
      if (sizes[i][j] != x.p[i] * x.n)
        throw PreconditionError("block (" + std::to_string(i) + "," + std::to_string(j) + ") has size " +
                                std::to_string(sizes[i][j]) + ", expected " + std::to_string(x.p[i] * x.n));
  }
}

Rational min_diagonal_density(const MultipartiteGraph& g, const RowDecomposition& x) {
  Rational best(1);
  const int s = x.s(), r = g.r();
  std::vector<std::vector<std::vector<int>>> blocks(s, std::vector<std::vector<int>>(r));
  for (int i = 0; i < s; ++i)
    for (int j = 0; j < r; ++j) blocks[i][j] = x.block(g, i, j);
  for (int i = 0; i < s; ++i)
    for (int i2 = 0; i2 < s; ++i2) {
      if (i == i2) continue;
      for (int j = 0; j < r; ++j)
        for (int j2 = 0; j2 < r; ++j2) {
          if (j == j2 || blocks[i][j].empty() || blocks[i2][j2].empty()) continue;
          best = std::min(best, density(g, blocks[i][j], blocks[i2][j2]));
        }
    }
  return best;
}

DecompositionResult iterate_decomposition(const MultipartiteGraph& g, int k,
                                          const std::vector<Rational>& thresholds,
                                          const DetectOptions& opts) {
  if (k < 1) throw PreconditionError("iterate_decomposition: k must be positive");
  if (static_cast<int>(thresholds.size()) < std::max(1, k - 1))
    throw PreconditionError("iterate_decomposition: need at least k-1 thresholds");
  for (std::size_t i = 1; i < thresholds.size(); ++i)
    if (!(thresholds[i - 1] < thresholds[i]))
      throw PreconditionError("iterate_decomposition: thresholds must be strictly ascending");
  DecompositionResult res{trivial_decomposition(g, k), {}, Rational(1)};
  auto& x = res.decomp;
  while (true) {
    const int s = x.s();
    if (s >= k) break;
    const Rational& ds = thresholds[s - 1];
    bool split = false;
    for (int i = 0; i < s && !split; ++i) {
      if (x.p[i] < 2) continue;
      std::vector<std::vector<int>> per(g.r());
      for (int j = 0; j < g.r(); ++j) per[j] = x.block(g, i, j);
      auto sub = induced_subgraph(g, per);
      auto w = is_splittable(sub.graph, x.p[i], ds, opts);
      if (!w) continue;
      Bitset keep = g.empty_set();
      for (const auto& set : w->sets)
        for (int u : set) keep.set(sub.to_parent[u]);
      for (int u : sub.to_parent)
        if (!keep.test(u)) x.row_of[u] = s;
      x.p.push_back(x.p[i] - w->p_prime);
      x.p[i] = w->p_prime;
      res.events.push_back(SplitEvent{i, s, w->p_prime, ds, w->achieved_min_density});
      split = true;
    }
    if (!split) break;
  }
  res.min_diagonal = min_diagonal_density(g, x);
  return res;
}

TransferResult transfer_split_witness(const MultipartiteGraph& g, int p, int n,
                                      const std::vector<std::vector<int>>& x_from,
                                      const std::vector<std::vector<int>>& x_to,
                                      const SplitWitness& w_from) {
  const int r = g.r();
  if (static_cast<int>(x_from.size()) != r || static_cast<int>(x_to.size()) != r)
    throw PreconditionError("transfer_split_witness: need one block per class");
  SplitWitness w{w_from.p_prime, std::vector<std::vector<int>>(r), Rational(0)};
  const int t_size = w_from.p_prime * n;
  int t = 0;
  for (int c = 0; c < r; ++c) {
    std::vector<int> to = x_to[c];
    std::sort(to.begin(), to.end());
    std::vector<int> from = x_from[c];
    std::sort(from.begin(), from.end());
    std::vector<int> moved;
    std::set_difference(to.begin(), to.end(), from.begin(), from.end(), std::back_inserter(moved));
    t = std::max(t, static_cast<int>(moved.size()));
    auto& s = w.sets[c];
    for (int u : w_from.sets[c])
      if (std::binary_search(to.begin(), to.end(), u)) s.push_back(u);
    for (int u : to) {
      if (static_cast<int>(s.size()) >= t_size) break;
      if (!std::binary_search(w_from.sets[c].begin(), w_from.sets[c].end(), u)) s.push_back(u);
    }
    std::sort(s.begin(), s.end());
  }
  Rational best(1);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) {
      if (a == b) continue;
      std::vector<int> rest;
      for (int u : x_to[b])
        if (!std::binary_search(w.sets[b].begin(), w.sets[b].end(), u)) rest.push_back(u);
      best = std::min(best, density(g, w.sets[a], rest));
    }
  w.achieved_min_density = best;
  Rational from_min(1);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) {
      if (a == b) continue;
      std::vector<int> rest;
      for (int u : x_from[b])
        if (!std::binary_search(w_from.sets[b].begin(), w_from.sets[b].end(), u)) rest.push_back(u);
      from_min = std::min(from_min, density(g, w_from.sets[a], rest));
    }
  const std::int64_t pp = w_from.p_prime;
  Rational loss(4 * static_cast<std::int64_t>(t) * p * n, pp * (p - pp) * n * n);
  return TransferResult{w, from_min - loss};
}

}  // namespace kpack
