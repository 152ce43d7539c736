#include "kpack/graph.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "kpack/errors.hpp"
#include "kpack/kernels.hpp"

namespace kpack {

MultipartiteGraph::MultipartiteGraph(std::vector<int> class_sizes) : sizes_(std::move(class_sizes)) {
  for (int s : sizes_)
    if (s < 0) throw PreconditionError("negative class size");
  begin_.resize(sizes_.size());
  for (std::size_t c = 0; c < sizes_.size(); ++c) {
    begin_[c] = total_;
    total_ += sizes_[c];
  }
  class_of_.resize(total_);
  for (std::size_t c = 0; c < sizes_.size(); ++c)
    for (int o = 0; o < sizes_[c]; ++o) class_of_[begin_[c] + o] = static_cast<int>(c);
  adj_.assign(total_, Bitset(total_));
  class_mask_.assign(sizes_.size(), Bitset(total_));
  for (std::size_t c = 0; c < sizes_.size(); ++c)
    class_mask_[c].set_range(begin_[c], begin_[c] + sizes_[c]);
}

bool MultipartiteGraph::equal_class_sizes() const {
  return std::adjacent_find(sizes_.begin(), sizes_.end(), std::not_equal_to<>()) == sizes_.end();
}

int MultipartiteGraph::id(Vertex v) const {
  if (v.cls < 0 || v.cls >= r() || v.off < 0 || v.off >= sizes_[v.cls])
    throw PreconditionError("vertex (" + std::to_string(v.cls) + "," + std::to_string(v.off) +
                            ") out of range");
  return begin_[v.cls] + v.off;
}

Vertex MultipartiteGraph::vertex(int u) const {
  check_id(u);
  int c = class_of_[u];
  return Vertex{c, u - begin_[c]};
}

void MultipartiteGraph::check_id(int u) const {
  if (u < 0 || u >= total_) throw PreconditionError("vertex id " + std::to_string(u) + " out of range");
}

void MultipartiteGraph::add_edge(int u, int v) {
  check_id(u);
  check_id(v);
  if (class_of_[u] == class_of_[v])
    throw PreconditionError("edge " + std::to_string(u) + "-" + std::to_string(v) +
                            " joins two vertices of class " + std::to_string(class_of_[u]));
  adj_[u].set(v);
  adj_[v].set(u);
}

void MultipartiteGraph::remove_edge(int u, int v) {
  check_id(u);
  check_id(v);
  adj_[u].reset(v);
  adj_[v].reset(u);
}

std::size_t MultipartiteGraph::edge_count() const {
  std::size_t c = 0;
  for (const auto& row : adj_) c += row.count();
  return c / 2;
}

std::vector<std::pair<int, int>> MultipartiteGraph::edges() const {
  std::vector<std::pair<int, int>> out;
  for (int u = 0; u < total_; ++u)
    adj_[u].for_each([&](std::size_t v) {
      if (static_cast<int>(v) > u) out.emplace_back(u, static_cast<int>(v));
    });
  return out;
}

Bitset MultipartiteGraph::make_set(const std::vector<int>& ids) const {
  Bitset b(total_);
  for (int u : ids) {
    check_id(u);
    b.set(u);
  }
  return b;
}

PartitionLabeling make_labeling(const MultipartiteGraph& g, std::vector<int> part_of) {
  if (static_cast<int>(part_of.size()) != g.num_vertices())
    throw PreconditionError("labeling does not cover every vertex");
  int d = 0;
  for (int p : part_of) {
    if (p < 0) throw PreconditionError("negative part index");
    d = std::max(d, p + 1);
  }
  std::vector<int> cls(d, -1);
  bool respects = true;
  for (int u = 0; u < g.num_vertices(); ++u) {
    int& c = cls[part_of[u]];
    if (c == -1) c = g.class_of(u);
    else if (c != g.class_of(u)) respects = false;
  }
  for (int t = 0; t < d; ++t)
    if (cls[t] == -1) throw PreconditionError("part " + std::to_string(t) + " is empty");
  return PartitionLabeling{d, std::move(part_of), respects};
}

std::vector<int> part_classes(const MultipartiteGraph& g, const PartitionLabeling& q) {
  if (!q.respects_classes) throw PreconditionError("labeling does not refine the classes");
  std::vector<int> out(q.d, -1);
  for (int u = 0; u < g.num_vertices(); ++u) out[q.part_of[u]] = g.class_of(u);
  return out;
}

IndexVector index_vector(const std::vector<int>& s, const PartitionLabeling& q) {
  IndexVector v(q.d, 0);
  for (int u : s) {
    if (u < 0 || u >= static_cast<int>(q.part_of.size()))
      throw PreconditionError("vertex " + std::to_string(u) + " is not labeled");
    ++v[q.part_of[u]];
  }
  return v;
}

IndexSet index_set(const MultipartiteGraph& g, const Clique& c) {
  IndexSet s;
  s.reserve(c.size());
  for (int u : c) s.push_back(g.class_of(u));
  std::sort(s.begin(), s.end());
  return s;
}

std::map<IndexSet, int> index_counts(const MultipartiteGraph& g, const CliquePacking& m) {
  std::map<IndexSet, int> out;
  for (const auto& c : m.cliques) ++out[index_set(g, c)];
  return out;
}

bool is_clique(const MultipartiteGraph& g, const std::vector<int>& vs) {
  for (std::size_t a = 0; a < vs.size(); ++a)
    for (std::size_t b = a + 1; b < vs.size(); ++b)
      if (!g.adjacent(vs[a], vs[b])) return false;
  return true;
}

namespace {
std::int64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::int64_t b = 1;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}
}  // namespace

bool is_balanced(const MultipartiteGraph& g, const CliquePacking& m, int p) {
  auto counts = index_counts(g, m);
  std::int64_t num = binomial(g.r(), p);
  if (static_cast<std::int64_t>(counts.size()) != num) return m.cliques.empty();
  int first = counts.begin()->second;
  for (const auto& [idx, c] : counts)
    if (c != first || static_cast<int>(idx.size()) != p) return false;
  return true;
}

PackingCheck verify_packing(const MultipartiteGraph& g, const CliquePacking& m, int k, bool perfect) {
  PackingCheck res;
  std::vector<int> owner(g.num_vertices(), -1);
  auto fail = [&](std::string msg) {
    res.ok = false;
    res.violations.push_back(std::move(msg));
  };
  for (std::size_t i = 0; i < m.cliques.size(); ++i) {
    const auto& c = m.cliques[i];
    std::string name = "clique " + std::to_string(i);
    if (k > 0 && static_cast<int>(c.size()) != k)
      fail(name + " has " + std::to_string(c.size()) + " vertices, expected " + std::to_string(k));
    bool in_range = true;
    for (int u : c)
      if (u < 0 || u >= g.num_vertices()) {
        fail(name + " references vertex " + std::to_string(u) + " out of range");
        in_range = false;
      }
    if (!in_range) continue;
    for (std::size_t a = 0; a < c.size(); ++a)
      for (std::size_t b = a + 1; b < c.size(); ++b)
        if (!g.adjacent(c[a], c[b]))
          fail(name + " misses edge " + std::to_string(c[a]) + "-" + std::to_string(c[b]));
    for (int u : c) {
      if (owner[u] != -1)
        fail("vertex " + std::to_string(u) + " covered by cliques " + std::to_string(owner[u]) +
             " and " + std::to_string(i));
      owner[u] = static_cast<int>(i);
    }
  }
  if (perfect)
    for (int u = 0; u < g.num_vertices(); ++u)
      if (owner[u] == -1) fail("vertex " + std::to_string(u) + " is not covered");
  return res;
}

GammaInstance build_gamma(int n, int r, int k) {
  if (k < 2) throw PreconditionError("k must be at least 2");
  if (r < k) throw PreconditionError("r must be at least k");
  if (n <= 0 || n % k != 0) throw PreconditionError("k must divide n");
  const int part = n / k;
  MultipartiteGraph g(std::vector<int>(r, n));
  std::vector<int> part_of(g.num_vertices());
  // j is 1-based here to keep the adjacency rule readable.
  auto sub = [&](int off) { return off / part + 1; };
  for (int u = 0; u < g.num_vertices(); ++u) {
    auto vu = g.vertex(u);
    part_of[u] = vu.cls * k + (sub(vu.off) - 1);
  }
  for (int u = 0; u < g.num_vertices(); ++u) {
    auto vu = g.vertex(u);
    int j = sub(vu.off);
    for (int v = u + 1; v < g.num_vertices(); ++v) {
      auto vv = g.vertex(v);
      if (vv.cls == vu.cls) continue;
      int jj = sub(vv.off);
      bool adj = (j >= 3) ? (jj != j) : (jj != 3 - j);
      if (adj) g.add_edge(u, v);
    }
  }
  GammaInstance out{std::move(g), {}, ((r * n / k) % 2) == 1};
  out.subparts = make_labeling(out.graph, std::move(part_of));
  return out;
}

MultipartiteGraph complete_multipartite(const std::vector<int>& class_sizes) {
  MultipartiteGraph g(class_sizes);
  for (int u = 0; u < g.num_vertices(); ++u)
    for (int v = u + 1; v < g.num_vertices(); ++v)
      if (g.class_of(u) != g.class_of(v)) g.add_edge(u, v);
  return g;
}

int partite_min_degree(const MultipartiteGraph& g) {
  if (g.r() < 2) throw PreconditionError("partite minimum degree needs at least two classes");
  int best = -1;
  for (int u = 0; u < g.num_vertices(); ++u)
    for (int c = 0; c < g.r(); ++c) {
      if (c == g.class_of(u)) continue;
      int d = g.degree_into(u, c);
      if (best < 0 || d < best) best = d;
    }
  if (best < 0) {
    // No vertices at all: vacuous, report the smallest class size.
    best = *std::min_element(g.class_sizes().begin(), g.class_sizes().end());
  }
  return best;
}

namespace {
int single_class(const MultipartiteGraph& g, const std::vector<int>& s, const char* side) {
  if (s.empty()) throw PreconditionError(std::string("density: side ") + side + " is empty");
  int c = g.class_of(s.front());
  for (int u : s)
    if (g.class_of(u) != c)
      throw PreconditionError(std::string("density: side ") + side + " spans several classes");
  return c;
}
}  // namespace

std::int64_t edges_between(const MultipartiteGraph& g, const std::vector<int>& a,
                           const std::vector<int>& b) {
  Bitset bs = g.make_set(b);
  std::int64_t e = 0;
  for (int u : a) e += g.degree_into(u, bs);
  return e;
}

Rational density(const MultipartiteGraph& g, const std::vector<int>& a, const std::vector<int>& b) {
  int ca = single_class(g, a, "a");
  int cb = single_class(g, b, "b");
  if (ca == cb) throw PreconditionError("density: both sides lie in the same class");
  return Rational(edges_between(g, a, b),
                  static_cast<std::int64_t>(a.size()) * static_cast<std::int64_t>(b.size()));
}

MultipartiteGraph blow_up(const MultipartiteGraph& g, int factor) {
  if (factor < 1) throw PreconditionError("blow-up factor must be positive");
  std::vector<int> sizes = g.class_sizes();
  for (int& s : sizes) s *= factor;
  MultipartiteGraph h(sizes);
  auto copy = [&](int u, int t) {
    auto v = g.vertex(u);
    return h.id(v.cls, v.off * factor + t);
  };
  for (auto [u, v] : g.edges())
    for (int a = 0; a < factor; ++a)
      for (int b = 0; b < factor; ++b) h.add_edge(copy(u, a), copy(v, b));
  return h;
}

std::vector<Clique> clique_complex_edges(const MultipartiteGraph& g, int p) {
  if (p < 1 || p > g.r()) throw PreconditionError("clique size must lie in [1, r]");
  return enumerate_cliques_parallel(g, p);
}

Subgraph induced_subgraph(const MultipartiteGraph& g, const std::vector<std::vector<int>>& per_class) {
  if (static_cast<int>(per_class.size()) != g.r())
    throw PreconditionError("induced_subgraph needs one vertex list per class");
  std::vector<int> sizes;
  Subgraph out;
  for (int c = 0; c < g.r(); ++c) {
    sizes.push_back(static_cast<int>(per_class[c].size()));
    for (int u : per_class[c]) {
      if (g.class_of(u) != c) throw PreconditionError("vertex listed under the wrong class");
      out.to_parent.push_back(u);
    }
  }
  out.graph = MultipartiteGraph(sizes);
  const int n = static_cast<int>(out.to_parent.size());
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      if (g.adjacent(out.to_parent[a], out.to_parent[b])) out.graph.add_edge(a, b);
  return out;
}

MultipartiteGraph permute_graph(const MultipartiteGraph& g, const std::vector<int>& class_perm,
                                const std::vector<std::vector<int>>& off_perm) {
  std::vector<int> sizes(g.r());
  for (int c = 0; c < g.r(); ++c) sizes[class_perm[c]] = g.class_size(c);
  MultipartiteGraph h(sizes);
  auto map = [&](int u) {
    auto v = g.vertex(u);
    return h.id(class_perm[v.cls], off_perm[v.cls][v.off]);
  };
  for (auto [u, v] : g.edges()) h.add_edge(map(u), map(v));
  return h;
}

MultipartiteGraph random_min_degree_graph(const std::vector<int>& class_sizes, int min_degree,
                                          std::uint64_t seed, double try_fraction) {
  MultipartiteGraph g = complete_multipartite(class_sizes);
  auto edges = g.edges();
  std::mt19937_64 rng(seed);
  std::shuffle(edges.begin(), edges.end(), rng);
  auto tries = static_cast<std::size_t>(try_fraction * static_cast<double>(edges.size()));
  for (std::size_t i = 0; i < tries && i < edges.size(); ++i) {
    auto [u, v] = edges[i];
    if (g.degree_into(u, g.class_of(v)) <= min_degree) continue;
    if (g.degree_into(v, g.class_of(u)) <= min_degree) continue;
    g.remove_edge(u, v);
  }
  return g;
}

BarrierInstance space_barrier(int r, int p, int n, int j) {
  if (r < 2 || p < 2 || n < 1 || j < 1 || j >= p) throw PreconditionError("space_barrier: need r, p >= 2, n >= 1, 1 <= j < p");
  MultipartiteGraph g(std::vector<int>(r, p * n));
  std::vector<int> part(g.num_vertices(), 0);
  for (int u = 0; u < g.num_vertices(); ++u) part[u] = g.vertex(u).off < j * n ? 1 : 0;
  for (int u = 0; u < g.num_vertices(); ++u)
    for (int w = u + 1; w < g.num_vertices(); ++w) {
      const int cu = g.class_of(u), cw = g.class_of(w);
      if (cu == cw) continue;
      if (part[u] && part[w] && cu % j == cw % j) continue;
      g.add_edge(u, w);
    }
  PartitionLabeling q = make_labeling(g, part);
  return BarrierInstance{std::move(g), std::move(q)};
}

BarrierInstance divisibility_barrier(int r, int n) {
  if (r < 2 || n < 1) throw PreconditionError("divisibility_barrier: need r >= 2, n >= 1");
  MultipartiteGraph g(std::vector<int>(r, 2 * n));
  std::vector<int> part(g.num_vertices());
  for (int u = 0; u < g.num_vertices(); ++u) {
    const Vertex v = g.vertex(u);
    part[u] = 2 * v.cls + (v.off < n ? 0 : 1);
  }
  for (int u = 0; u < g.num_vertices(); ++u)
    for (int w = u + 1; w < g.num_vertices(); ++w)
      if (g.class_of(u) != g.class_of(w) && part[u] % 2 == part[w] % 2) g.add_edge(u, w);
  PartitionLabeling q = make_labeling(g, part);
  return BarrierInstance{std::move(g), std::move(q)};
}

}  // namespace kpack
