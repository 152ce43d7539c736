#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "kpack/bitset.hpp"
#include "kpack/rational.hpp"

namespace kpack {

struct Vertex {
  int cls = 0;
  int off = 0;
  auto operator<=>(const Vertex&) const = default;
};

// r-partite graph. Class c occupies the contiguous global id range
// [class_begin(c), class_end(c)), so the slice of an adjacency row over that
// range is the bit matrix for the ordered class pair.
class MultipartiteGraph {
 public:
  MultipartiteGraph() = default;
  explicit MultipartiteGraph(std::vector<int> class_sizes);

  int r() const { return static_cast<int>(sizes_.size()); }
  const std::vector<int>& class_sizes() const { return sizes_; }
  int class_size(int c) const { return sizes_.at(c); }
  int num_vertices() const { return total_; }
  bool equal_class_sizes() const;

  int id(Vertex v) const;
  int id(int cls, int off) const { return id(Vertex{cls, off}); }
  Vertex vertex(int id) const;
  int class_of(int id) const { return class_of_.at(id); }
  int class_begin(int c) const { return begin_.at(c); }
  int class_end(int c) const { return begin_.at(c) + sizes_.at(c); }

  void add_edge(int u, int v);
  void remove_edge(int u, int v);
  bool adjacent(int u, int v) const { return adj_[u].test(v); }
  const Bitset& neighbors(int u) const { return adj_.at(u); }
  const Bitset& class_mask(int c) const { return class_mask_.at(c); }
  int degree_into(int u, int c) const {
    return static_cast<int>(adj_[u].and_count(class_mask_[c]));
  }
  int degree_into(int u, const Bitset& set) const {
    return static_cast<int>(adj_[u].and_count(set));
  }
  std::size_t edge_count() const;
  // Each edge once as (u, v) with u < v, sorted.
  std::vector<std::pair<int, int>> edges() const;
  Bitset empty_set() const { return Bitset(static_cast<std::size_t>(total_)); }
  Bitset make_set(const std::vector<int>& ids) const;

 private:
  void check_id(int u) const;

  std::vector<int> sizes_;
  std::vector<int> begin_;
  std::vector<int> class_of_;
  std::vector<Bitset> adj_;
  std::vector<Bitset> class_mask_;
  int total_ = 0;
};

struct PartitionLabeling {
  int d = 0;
  std::vector<int> part_of;  // indexed by global id
  bool respects_classes = false;
};

// Validates parts (nonempty, in range) and computes respects_classes.
PartitionLabeling make_labeling(const MultipartiteGraph& g, std::vector<int> part_of);
// For a class-refining labeling: the class containing each part.
std::vector<int> part_classes(const MultipartiteGraph& g, const PartitionLabeling& q);

using IndexVector = std::vector<std::int64_t>;
IndexVector index_vector(const std::vector<int>& s, const PartitionLabeling& q);

using Clique = std::vector<int>;  // sorted global ids
using IndexSet = std::vector<int>;  // sorted class indices

struct CliquePacking {
  std::vector<Clique> cliques;
};

IndexSet index_set(const MultipartiteGraph& g, const Clique& c);
std::map<IndexSet, int> index_counts(const MultipartiteGraph& g, const CliquePacking& m);
bool is_clique(const MultipartiteGraph& g, const std::vector<int>& vs);
bool is_balanced(const MultipartiteGraph& g, const CliquePacking& m, int p);

struct PackingCheck {
  bool ok = true;
  std::vector<std::string> violations;
};
// k = 0 skips the size check. `perfect` demands every vertex be covered.
PackingCheck verify_packing(const MultipartiteGraph& g, const CliquePacking& m, int k,
                            bool perfect);

struct GammaInstance {
  MultipartiteGraph graph;
  PartitionLabeling subparts;  // part = class * k + (j - 1) for subpart V^j
  bool rn_over_k_odd = false;
};

GammaInstance build_gamma(int n, int r, int k);
MultipartiteGraph complete_multipartite(const std::vector<int>& class_sizes);
int partite_min_degree(const MultipartiteGraph& g);

std::int64_t edges_between(const MultipartiteGraph& g, const std::vector<int>& a,
                           const std::vector<int>& b);
Rational density(const MultipartiteGraph& g, const std::vector<int>& a,
                 const std::vector<int>& b);

MultipartiteGraph blow_up(const MultipartiteGraph& g, int factor);

// All p-cliques (one vertex per class), sorted lexicographically.
std::vector<Clique> clique_complex_edges(const MultipartiteGraph& g, int p);

struct Subgraph {
  MultipartiteGraph graph;
  std::vector<int> to_parent;  // sub id -> parent id
};
// Keeps the listed vertices; classes with no listed vertex are kept empty.
Subgraph induced_subgraph(const MultipartiteGraph& g, const std::vector<std::vector<int>>& per_class);

// Relabels classes by class_perm and offsets within class c by off_perm[c].
MultipartiteGraph permute_graph(const MultipartiteGraph& g, const std::vector<int>& class_perm,
                                const std::vector<std::vector<int>>& off_perm);

// Complete r-partite graph thinned by deleting edges in a seeded random order,
// skipping deletions that would push either endpoint below min_degree into
// the other's class. try_fraction in [0,1] caps how many deletions are tried.
MultipartiteGraph random_min_degree_graph(const std::vector<int>& class_sizes, int min_degree,
                                          std::uint64_t seed, double try_fraction = 1.0);

// Blow-up of J_r(S, j) as a graph: classes of size p*n, S = the first j*n
// offsets of each class; S-vertices of classes c, c' with c = c' mod j are
// non-adjacent, so every clique meets S in at most j vertices. part_of is 1
// on S and 0 elsewhere.
struct BarrierInstance {
  MultipartiteGraph graph;
  PartitionLabeling labels;
};
BarrierInstance space_barrier(int r, int p, int n, int j);
// Classes of size 2n split into halves (parts 2c, 2c + 1); only same-side
// pairs are edges, so every edge has an even number of second-half ends and
// the robust edge lattice is the even-coordinate lattice.
BarrierInstance divisibility_barrier(int r, int n);

}  // namespace kpack
