#include "kpack/oracle.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

#include "kpack/errors.hpp"

namespace kpack {

namespace {

// plain adjacency matrix copy, so nothing here leans on Bitset helpers
struct Plain {
  int n = 0;
  std::vector<int> cls;
  std::vector<std::vector<char>> adj;
};

Plain flatten(const MultipartiteGraph& g) {
  Plain p;
  p.n = g.num_vertices();
  p.cls.resize(p.n);
  p.adj.assign(p.n, std::vector<char>(p.n, 0));
  for (int u = 0; u < p.n; ++u) p.cls[u] = g.class_of(u);
  for (auto [u, v] : g.edges()) p.adj[u][v] = p.adj[v][u] = 1;
  return p;
}

class Packer {
 public:
  Packer(const Plain& p, int k, std::uint64_t budget) : p_(p), k_(k), budget_(budget), used_(p.n, 0) {}

  int run() { return dfs(); }
  std::uint64_t nodes() const { return nodes_; }
  const std::vector<Clique>& chosen() const { return chosen_; }

 private:
  // components of the uncovered part must all have size divisible by k
  bool components_ok() const {
    std::vector<char> seen(p_.n, 0);
    std::vector<int> stack;
    for (int s = 0; s < p_.n; ++s) {
      if (used_[s] || seen[s]) continue;
      int size = 0;
      stack.push_back(s);
      seen[s] = 1;
      while (!stack.empty()) {
        int u = stack.back();
        stack.pop_back();
        ++size;
        for (int w = 0; w < p_.n; ++w)
          if (!used_[w] && !seen[w] && p_.adj[u][w]) seen[w] = 1, stack.push_back(w);
      }
      if (size % k_ != 0) return false;
    }
    return true;
  }

  std::string key() const { return std::string(used_.begin(), used_.end()); }

  int dfs() {
    if (++nodes_ > budget_) return -1;
    int u = -1;
    for (int v = 0; v < p_.n; ++v)
      if (!used_[v]) {
        u = v;
        break;
      }
    if (u < 0) return 1;
    std::string k = key();
    if (dead_.count(k)) return 0;
    if (!components_ok()) {
      dead_.insert(std::move(k));
      return 0;
    }
    // grow cliques containing u from larger uncovered vertices, in id order
    std::vector<int> cur{u};
    int verdict = 0;
    std::function<bool()> grow = [&]() -> bool {
      if (static_cast<int>(cur.size()) == k_) {
        for (int v : cur) used_[v] = 1;
        chosen_.push_back(cur);
        int r = dfs();
        if (r == 1) return true;
        chosen_.pop_back();
        for (int v : cur) used_[v] = 0;
        if (r < 0) {
          verdict = -1;
          return true;
        }
        return false;
      }
      for (int w = cur.back() + 1; w < p_.n; ++w) {
        if (used_[w]) continue;
        bool ok = true;
        for (int x : cur) ok = ok && p_.cls[x] != p_.cls[w] && p_.adj[x][w];
        if (!ok) continue;
        cur.push_back(w);
        if (grow()) return true;
        cur.pop_back();
      }
      return false;
    };
    if (grow()) return verdict == -1 ? -1 : 1;
    dead_.insert(std::move(k));
    return 0;
  }

  const Plain& p_;
  int k_;
  std::uint64_t budget_;
  std::uint64_t nodes_ = 0;
  std::vector<char> used_;
  std::vector<Clique> chosen_;
  std::unordered_set<std::string> dead_;
};

// ---- isomorphism on twin quotients ---------------------------------------------

struct Quotient {
  int m = 0;
  std::vector<int> cls, weight;
  std::vector<std::vector<char>> adj;
  int classes = 0;
};

Quotient twin_quotient(const MultipartiteGraph& g) {
  Quotient q;
  q.classes = g.r();
  for (int c = 0; c < g.r(); ++c) {
    std::map<std::vector<std::uint64_t>, int> groups;
    for (int v = g.class_begin(c); v < g.class_end(c); ++v) {
      auto [it, fresh] = groups.emplace(g.neighbors(v).words(), 0);
      if (fresh) it->second = q.m++, q.cls.push_back(c), q.weight.push_back(0);
      ++q.weight[it->second];
    }
  }
  // representative per group
  std::vector<int> rep(q.m, -1);
  {
    int idx = 0;
    for (int c = 0; c < g.r(); ++c) {
      std::map<std::vector<std::uint64_t>, int> groups;
      for (int v = g.class_begin(c); v < g.class_end(c); ++v) {
        auto [it, fresh] = groups.emplace(g.neighbors(v).words(), 0);
        if (fresh) it->second = idx, rep[idx++] = v;
      }
    }
  }
  q.adj.assign(q.m, std::vector<char>(q.m, 0));
  for (int a = 0; a < q.m; ++a)
    for (int b = 0; b < q.m; ++b) q.adj[a][b] = g.adjacent(rep[a], rep[b]);
  return q;
}

// joint colour refinement over both quotients so colours are comparable
std::pair<std::vector<int>, std::vector<int>> refine(const Quotient& A, const Quotient& B) {
  auto init = [](const Quotient& q) {
    std::vector<int> class_count(q.classes, 0);
    for (int c : q.cls) ++class_count[c];
    std::vector<std::vector<long>> sig(q.m);
    for (int i = 0; i < q.m; ++i) sig[i] = {q.weight[i], class_count[q.cls[i]]};
    return sig;
  };
  auto sa = init(A), sb = init(B);
  std::vector<int> ca, cb;
  int prev = -1;
  for (int round = 0; round < A.m + B.m + 2; ++round) {
    std::map<std::vector<long>, int> palette;
    for (auto& s : sa) palette.emplace(s, 0);
    for (auto& s : sb) palette.emplace(s, 0);
    int id = 0;
    for (auto& [s, c] : palette) c = id++;
    ca.resize(A.m);
    cb.resize(B.m);
    for (int i = 0; i < A.m; ++i) ca[i] = palette[sa[i]];
    for (int i = 0; i < B.m; ++i) cb[i] = palette[sb[i]];
    if (id == prev) break;
    prev = id;
    auto next = [&](const Quotient& q, const std::vector<int>& col) {
      std::vector<std::vector<long>> sig(q.m);
      for (int i = 0; i < q.m; ++i) {
        std::vector<long> nb, same;
        for (int j = 0; j < q.m; ++j) {
          if (j == i) continue;
          if (q.adj[i][j]) nb.push_back(col[j]);
          if (q.cls[j] == q.cls[i]) same.push_back(col[j]);
        }
        std::sort(nb.begin(), nb.end());
        std::sort(same.begin(), same.end());
        sig[i] = {col[i], -1};
        sig[i].insert(sig[i].end(), nb.begin(), nb.end());
        sig[i].push_back(-2);
        sig[i].insert(sig[i].end(), same.begin(), same.end());
      }
      return sig;
    };
    sa = next(A, ca);
    sb = next(B, cb);
  }
  return {ca, cb};
}

bool quotient_isomorphic(const Quotient& A, const Quotient& B, std::uint64_t budget) {
  if (A.m != B.m || A.classes != B.classes) return false;
  auto [ca, cb] = refine(A, B);
  {
    auto x = ca, y = cb;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    if (x != y) return false;
  }
  const int m = A.m;
  // assign A nodes in order of rarest colour first
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::map<int, int> freq;
  for (int c : ca) ++freq[c];
  std::stable_sort(order.begin(), order.end(), [&](int x, int y) { return freq[ca[x]] < freq[ca[y]]; });
  std::vector<int> phi(m, -1), used(m, 0), cls_map(A.classes, -1), cls_back(B.classes, -1);
  std::vector<int> cls_refs(A.classes, 0);
  std::uint64_t nodes = 0;
  std::function<int(int)> go = [&](int t) -> int {
    if (++nodes > budget) return -1;
    if (t == m) return 1;
    int a = order[t];
    for (int b = 0; b < m; ++b) {
      if (used[b] || cb[b] != ca[a] || B.weight[b] != A.weight[a]) continue;
      int ac = A.cls[a], bc = B.cls[b];
      if (cls_map[ac] >= 0 ? cls_map[ac] != bc : cls_back[bc] >= 0) continue;
      bool ok = true;
      for (int s = 0; s < t && ok; ++s) {
        int a2 = order[s];
        ok = A.adj[a][a2] == B.adj[b][phi[a2]];
      }
      if (!ok) continue;
      bool fresh = cls_map[ac] < 0;
      if (fresh) cls_map[ac] = bc, cls_back[bc] = ac;
      phi[a] = b;
      used[b] = 1;
      int r = go(t + 1);
      if (r != 0) return r;
      used[b] = 0;
      phi[a] = -1;
      if (fresh) cls_map[ac] = -1, cls_back[bc] = -1;
    }
    return 0;
  };
  int r = go(0);
  if (r < 0) throw SupplyError("isomorphism search exceeded its node budget");
  return r == 1;
}

std::uint64_t mix(std::uint64_t seed, std::uint64_t i) { return seed * 1000003ULL + i; }

}  // namespace

OracleVerdict brute_force_packing(const MultipartiteGraph& g, int k, std::uint64_t budget) {
  if (k < 1) throw PreconditionError("k must be positive");
  OracleVerdict v;
  const int n = g.num_vertices();
  if (n % k != 0 || k > std::max(g.r(), 1)) {
    v.completed = true;
    v.exists = n == 0;
    if (v.exists) v.witness = CliquePacking{};
    return v;
  }
  Plain p = flatten(g);
  Packer packer(p, k, budget);
  int r = packer.run();
  v.nodes_explored = packer.nodes();
  v.completed = r >= 0;
  v.exists = r == 1;
  if (v.exists) {
    CliquePacking m{packer.chosen()};
    // independent re-check straight off the matrix
    std::vector<int> cover(n, 0);
    for (const auto& c : m.cliques)
      for (std::size_t i = 0; i < c.size(); ++i) {
        ++cover[c[i]];
        for (std::size_t j = i + 1; j < c.size(); ++j)
          if (!p.adj[c[i]][c[j]]) throw InternalError("oracle witness uses a non-edge");
      }
    for (int x : cover)
      if (x != 1) throw InternalError("oracle witness is not a partition");
    std::sort(m.cliques.begin(), m.cliques.end());
    v.witness = std::move(m);
  }
  return v;
}

bool is_isomorphic_to_gamma(const MultipartiteGraph& g, int n, int r, int k) {
  if (g.r() != r || k < 1 || n % k != 0) return false;
  for (int c = 0; c < r; ++c)
    if (g.class_size(c) != n) return false;
  auto gamma = build_gamma(n, r, k).graph;
  if (g.edge_count() != gamma.edge_count()) return false;
  return quotient_isomorphic(twin_quotient(g), twin_quotient(gamma), 5'000'000);
}

SampleSpec parse_sample(const std::string& text) {
  SampleSpec s;
  if (text == "exhaustive") {
    s.exhaustive = true;
    return s;
  }
  if (text.rfind("random:", 0) == 0) {
    auto rest = text.substr(7);
    auto colon = rest.find(':');
    try {
      s.count = std::stoi(rest.substr(0, colon));
      if (colon != std::string::npos) s.seed = std::stoull(rest.substr(colon + 1));
    } catch (const std::exception&) {
      throw PreconditionError("bad --sample value: " + text);
    }
    if (s.count < 0) throw PreconditionError("sample count must be nonnegative");
    return s;
  }
  throw PreconditionError("sample must be 'exhaustive' or 'random:COUNT[:SEED]'");
}

BoundaryReport verify_theorem_boundary(int r, int k, int n, const SampleSpec& sample, std::uint64_t budget) {
  if (r < 1 || k < 1 || n < 0) throw PreconditionError("need r, k >= 1 and n >= 0");
  if (k > r) throw PreconditionError("k must not exceed r");
  if ((static_cast<long long>(r) * n) % k != 0) throw PreconditionError("k must divide rn");
  BoundaryReport rep;
  rep.r = r, rep.k = k, rep.n = n;
  rep.sample = sample.exhaustive ? "exhaustive"
                                 : "random:" + std::to_string(sample.count) + ":" + std::to_string(sample.seed);
  rep.threshold = ((k - 1) * n + k - 1) / k;
  if (n == 0) return rep;  // vacuous

  std::vector<int> sizes(r, n);
  std::vector<MultipartiteGraph> graphs;
  std::vector<std::uint64_t> seeds;
  if (sample.exhaustive) {
    auto full = complete_multipartite(sizes);
    auto edges = full.edges();
    if (edges.size() > 24) throw PreconditionError("exhaustive mode limited to 24 potential edges");
    const std::uint64_t total = 1ULL << edges.size();
    rep.examined = static_cast<std::int64_t>(total);
    for (std::uint64_t mask = 0; mask < total; ++mask) {
      MultipartiteGraph g(sizes);
      for (std::size_t e = 0; e < edges.size(); ++e)
        if ((mask >> e) & 1) g.add_edge(edges[e].first, edges[e].second);
      if (partite_min_degree(g) < rep.threshold) continue;
      graphs.push_back(std::move(g));
      seeds.push_back(mask);
    }
  } else {
    rep.examined = sample.count;
    for (int i = 0; i < sample.count; ++i) {
      std::uint64_t s = mix(sample.seed, static_cast<std::uint64_t>(i));
      double frac = 0.1 * (1 + (i % 10));
      graphs.push_back(random_min_degree_graph(sizes, rep.threshold, s, frac));
      seeds.push_back(s);
    }
  }
  rep.entries.resize(graphs.size());
  const bool parity_odd = ((static_cast<long long>(r) * n / k) % 2) == 1;
#pragma omp parallel for schedule(dynamic)
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    BoundaryEntry e;
    e.index = static_cast<int>(i);
    e.seed = seeds[i];
    e.min_degree = partite_min_degree(graphs[i]);
    auto v = brute_force_packing(graphs[i], k, budget);
    e.completed = v.completed;
    e.exists = v.exists;
    e.parity_odd = parity_odd;
    if (v.completed && !v.exists) {
      e.gamma_iso = n % k == 0 && is_isomorphic_to_gamma(graphs[i], n, r, k);
      e.counterexample = !(parity_odd && e.gamma_iso);
    }
    if (e.counterexample || !e.completed) e.graph = graphs[i];
    rep.entries[i] = std::move(e);
  }
  for (const auto& e : rep.entries) {
    ++rep.qualifying;
    if (!e.completed) ++rep.incomplete;
    else if (e.exists) ++rep.packed;
    else if (!e.counterexample) ++rep.extremal;
    if (e.counterexample) rep.counterexamples.push_back(e);
  }
  return rep;
}

}  // namespace kpack
