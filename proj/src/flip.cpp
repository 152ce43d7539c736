#include <algorithm>
#include <array>
#include <map>
#include <numeric>
#include <sstream>

#include "kpack/errors.hpp"
#include "kpack/matching.hpp"

namespace kpack {

namespace {

IndexSet with(IndexSet s, std::initializer_list<int> extra) {
  s.insert(s.end(), extra.begin(), extra.end());
  std::sort(s.begin(), s.end());
  return s;
}

Clique join(const std::vector<int>& K, int v) {
  Clique c = K;
  c.push_back(v);
  std::sort(c.begin(), c.end());
  return c;
}

std::string set_str(const IndexSet& s) {
  std::ostringstream os;
  os << "{";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << "}";
  return os.str();
}

std::int64_t choose(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t c = 1;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

void subsets(int r, int p, int start, IndexSet& cur, std::vector<IndexSet>& out) {
  if (static_cast<int>(cur.size()) == p) {
    out.push_back(cur);
    return;
  }
  for (int i = start; i < r; ++i) {
    cur.push_back(i);
    subsets(r, p, i + 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

std::pair<Clique, Clique> current_cliques(const Configuration& c) {
  if (!c.flipped) return {join(c.K, c.v), join(c.K2, c.v2)};
  return {join(c.K, c.v2), join(c.K2, c.v)};
}

bool verify_configuration(const MultipartiteGraph& g, const Configuration& c) {
  std::vector<int> q{c.a, c.a2, c.b, c.b2};
  for (int x : q) {
    if (x < 0 || x >= g.r()) return false;
    if (std::find(c.S.begin(), c.S.end(), x) != c.S.end()) return false;
  }
  std::sort(q.begin(), q.end());
  if (std::adjacent_find(q.begin(), q.end()) != q.end()) return false;
  if (c.v < 0 || c.v2 < 0 || c.v >= g.num_vertices() || c.v2 >= g.num_vertices()) return false;
  if (g.class_of(c.v) != c.a || g.class_of(c.v2) != c.a2) return false;
  if (!is_clique(g, c.K) || !is_clique(g, c.K2)) return false;
  if (index_set(g, c.K) != with(c.S, {c.b}) || index_set(g, c.K2) != with(c.S, {c.b2})) return false;
  std::vector<int> all = c.K;
  all.insert(all.end(), c.K2.begin(), c.K2.end());
  all.push_back(c.v);
  all.push_back(c.v2);
  std::sort(all.begin(), all.end());
  if (std::adjacent_find(all.begin(), all.end()) != all.end()) return false;
  for (int u : c.K)
    if (!g.adjacent(c.v, u) || (!c.fake && !g.adjacent(c.v2, u))) return false;
  for (int u : c.K2)
    if (!g.adjacent(c.v2, u) || (!c.fake && !g.adjacent(c.v, u))) return false;
  return true;
}

std::vector<Configuration> discover_configurations(const MultipartiteGraph& g, const CliquePacking& m,
                                                   int p, int per_pattern, bool allow_fake) {
  if (p < 2) throw PreconditionError("configurations need p >= 2");
  const int M = static_cast<int>(m.cliques.size());
  for (const auto& c : m.cliques)
    if (static_cast<int>(c.size()) != p) throw PreconditionError("packing clique of the wrong size");
  // pattern (S, T) -> candidates (clique i, clique j, apex v, apex v')
  using Pattern = std::pair<IndexSet, std::array<int, 4>>;
  std::map<Pattern, std::vector<Configuration>> by_pattern;
  for (int i = 0; i < M; ++i)
    for (int j = 0; j < M; ++j) {
      if (i == j) continue;
      const Clique& C1 = m.cliques[i];
      const Clique& C2 = m.cliques[j];
      for (int v : C1)
        for (int v2 : C2) {
          int a = g.class_of(v), a2 = g.class_of(v2);
          if (a >= a2) continue;  // canonical orientation a < a'
          Configuration cfg;
          for (int u : C1)
            if (u != v) cfg.K.push_back(u);
          for (int u : C2)
            if (u != v2) cfg.K2.push_back(u);
          IndexSet I1 = index_set(g, cfg.K), I2 = index_set(g, cfg.K2);
          IndexSet S;
          std::set_intersection(I1.begin(), I1.end(), I2.begin(), I2.end(), std::back_inserter(S));
          if (static_cast<int>(S.size()) != p - 2) continue;
          int b = -1, b2 = -1;
          for (int x : I1)
            if (!std::binary_search(S.begin(), S.end(), x)) b = x;
          for (int x : I2)
            if (!std::binary_search(S.begin(), S.end(), x)) b2 = x;
          cfg.S = S;
          cfg.a = a, cfg.a2 = a2, cfg.b = b, cfg.b2 = b2;
          cfg.v = v, cfg.v2 = v2;
          if (p == 2 && a != 0) {
            // only genuine when the cross edges happen to exist
            cfg.fake = false;
            if (!verify_configuration(g, cfg)) {
              if (!allow_fake) continue;
              cfg.fake = true;
            }
          }
          if (!verify_configuration(g, cfg)) continue;
          by_pattern[{S, {a, a2, b, b2}}].push_back(std::move(cfg));
        }
    }
  // round robin: each round claims at most one new configuration per pattern
  std::vector<char> claimed(g.num_vertices(), 0);
  std::vector<Configuration> pool;
  std::vector<std::size_t> cursor(by_pattern.size(), 0);
  std::vector<int> taken(by_pattern.size(), 0);
  bool progress = true;
  while (progress) {
    progress = false;
    std::size_t idx = 0;
    for (auto& [pat, cands] : by_pattern) {
      std::size_t& cur = cursor[idx];
      if (per_pattern > 0 && taken[idx] >= per_pattern) {
        ++idx;
        continue;
      }
      while (cur < cands.size()) {
        const Configuration& cfg = cands[cur++];
        auto [c1, c2] = current_cliques(cfg);
        bool free = true;
        for (int u : c1) free &= !claimed[u];
        for (int u : c2) free &= !claimed[u];
        if (!free) continue;
        for (int u : c1) claimed[u] = 1;
        for (int u : c2) claimed[u] = 1;
        pool.push_back(cfg);
        ++taken[idx];
        progress = true;
        break;
      }
      ++idx;
    }
  }
  return pool;
}

std::vector<IndexSet> terminal_family(int r, int p) {
  std::vector<IndexSet> out;
  for (int i = p + 1; i < r; ++i) {
    IndexSet s;
    for (int x = 0; x <= p - 2; ++x) s.push_back(x);
    s.push_back(i);
    out.push_back(s);
  }
  for (int i = 0; i <= p && p + 1 <= r; ++i) {
    IndexSet s;
    for (int x = 0; x <= p; ++x)
      if (x != i) s.push_back(x);
    out.push_back(s);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<IndexSet> flip_order(int r, int p) {
  std::vector<IndexSet> all;
  IndexSet cur;
  subsets(r, p, 0, cur, all);
  auto term = terminal_family(r, p);
  auto in_term = [&](const IndexSet& s) { return std::binary_search(term.begin(), term.end(), s); };
  auto sum = [](const IndexSet& s) { return std::accumulate(s.begin(), s.end(), 0); };
  std::stable_sort(all.begin(), all.end(), [&](const IndexSet& x, const IndexSet& y) {
    bool tx = in_term(x), ty = in_term(y);
    if (tx != ty) return !tx;
    return sum(x) > sum(y);
  });
  return all;
}

FlipResult flip_balance(const MultipartiteGraph& g, const CliquePacking& m, std::vector<Configuration> pool,
                        int r, int p) {
  if (r != g.r()) throw PreconditionError("r does not match the graph");
  if (p < 1 || p > r) throw PreconditionError("need 1 <= p <= r");
  if (!g.equal_class_sizes()) throw PreconditionError("classes must have equal size");
  auto check = verify_packing(g, m, p, true);
  if (!check.ok) throw PreconditionError("input is not a perfect K_p-packing: " + check.violations.front());
  const std::int64_t total = static_cast<std::int64_t>(g.class_size(0)) * r / p;
  if (total % choose(r, p) != 0) throw PreconditionError("rn / C(r,p) is not an integer");
  const int N = static_cast<int>(total / choose(r, p));

  FlipResult res;
  res.packing = m;
  if (p >= r - 1 || p == 1) {
    if (!is_balanced(g, m, p)) throw InternalError("perfect packing with p >= r-1 is not balanced");
    res.log.push_back("p in {r-1, r}: balance forced, no flips");
    return res;
  }

  std::map<Clique, int> where;
  for (int i = 0; i < static_cast<int>(res.packing.cliques.size()); ++i) where[res.packing.cliques[i]] = i;
  for (const auto& cfg : pool) {
    if (!verify_configuration(g, cfg)) throw PreconditionError("pool holds an invalid configuration");
    auto [c1, c2] = current_cliques(cfg);
    if (!where.count(c1) || !where.count(c2)) throw PreconditionError("pool configuration is not embedded in the packing");
  }
  auto counts = index_counts(g, res.packing);
  auto term = terminal_family(r, p);

  auto do_flip = [&](Configuration& cfg) {
    if (cfg.fake) throw InternalError("attempted to flip a fake configuration");
    auto [o1, o2] = current_cliques(cfg);
    cfg.flipped = !cfg.flipped;
    auto [n1, n2] = current_cliques(cfg);
    int i1 = where.at(o1), i2 = where.at(o2);
    where.erase(o1);
    where.erase(o2);
    res.packing.cliques[i1] = n1;
    res.packing.cliques[i2] = n2;
    where[n1] = i1;
    where[n2] = i2;
    --counts[index_set(g, o1)];
    --counts[index_set(g, o2)];
    ++counts[index_set(g, n1)];
    ++counts[index_set(g, n2)];
    ++res.flips;
  };

  for (const IndexSet& A : flip_order(r, p)) {
    if (std::binary_search(term.begin(), term.end(), A)) continue;
    while (counts[A] != N) {
      const bool over = counts[A] > N;
      Configuration* pick = nullptr;
      for (auto& cfg : pool) {
        if (cfg.flipped || cfg.fake) continue;
        if (p == 2 && cfg.a != 0) continue;
        if (cfg.a >= cfg.a2) continue;  // x' < x
        // over: unflipped S+{a',b'} = A, needs b < b'; under: flipped S+{a',b} = A, needs b' < b
        if (over && cfg.b < cfg.b2 && with(cfg.S, {cfg.a2, cfg.b2}) == A) pick = &cfg;
        if (!over && cfg.b2 < cfg.b && with(cfg.S, {cfg.a2, cfg.b}) == A) pick = &cfg;
        if (pick) break;
      }
      if (!pick) {
        std::ostringstream os;
        os << "no unflipped configuration left for index " << set_str(A) << " ("
           << (over ? "over" : "under") << " by " << std::abs(counts[A] - N)
           << "); needed S = A minus {x,y}, T = (x',x," << (over ? "y',y" : "y,y'") << ") with x'<x, y'<y";
        throw SupplyError(os.str());
      }
      std::ostringstream os;
      os << "A=" << set_str(A) << " flip S=" << set_str(pick->S) << " T=(" << pick->a << "," << pick->a2 << ","
         << pick->b << "," << pick->b2 << ")";
      res.log.push_back(os.str());
      do_flip(*pick);
    }
  }
  for (auto& [A, c] : counts)
    if (c != 0 && c != N) throw InternalError("terminal index " + set_str(A) + " not balanced after flips");
  if (!is_balanced(g, res.packing, p) || !verify_packing(g, res.packing, p, true).ok)
    throw InternalError("flip result failed recount");
  return res;
}

}  // namespace kpack
