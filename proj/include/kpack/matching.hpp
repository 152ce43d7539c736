#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "kpack/graph.hpp"
#include "kpack/rational.hpp"

namespace kpack {

// ---- degree sequences -------------------------------------------------------

// d must be sorted descending (PreconditionError otherwise).
bool is_multigraphic(const std::vector<int>& d);
// Loopless multigraph with degree sequence d, as index pairs (i < j).
std::vector<std::pair<int, int>> realize_multigraph(const std::vector<int>& d);

// ---- rectangle transversals -------------------------------------------------

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

struct Rectangle {
  int s = 0;
  int r = 0;
  std::set<Cell> colored;
};

// <= r coloured cells, <= 1 per column, <= r-1 per row, s <= r.
bool transversal_hypotheses_hold(const Rectangle& rect);
std::optional<std::vector<Cell>> find_transversal(const Rectangle& rect);

// ---- matchings --------------------------------------------------------------

struct BipartiteGraph {
  int left = 0;
  int right = 0;
  std::vector<std::vector<int>> adj;  // left vertex -> right neighbours
};

// Hopcroft-Karp. Returns mate of each left vertex (-1 if unmatched).
std::vector<int> max_bipartite_matching(const BipartiteGraph& b);

struct RegularMatchingResult {
  bool regular = false;
  int degree = 0;
  std::optional<std::vector<int>> matching;  // perfect, left -> right
};
RegularMatchingResult regular_bipartite_perfect_matching(const BipartiteGraph& b);

// Edmonds' blossom algorithm; mate per vertex (-1 if unmatched).
std::vector<int> maximum_matching(const std::vector<std::vector<int>>& adj);
std::vector<int> maximum_matching(const MultipartiteGraph& g);

struct EvenPath {
  int cls = 0;
  std::vector<int> path;  // vertex ids, both ends in class cls
};
// Simple even path between the two vertices of some class.
std::optional<EvenPath> even_path_between_copartners(const MultipartiteGraph& h);

// ---- balanced matchings -----------------------------------------------------

struct PairCompleteMatching {
  CliquePacking matching;
  int n_prime = 0;
  int corrections = 0;  // number of correction matchings M_l
  bool in_window = false;
};

// halves[j] = X_j within class j. zeta >= 1 disables the near-completeness
// checks. Throws ObstructionError on odd |X|, SizingError/SupplyError when no
// admissible n' works.
PairCompleteMatching pair_complete_balanced_matching(const MultipartiteGraph& g,
                                                     const std::vector<std::vector<int>>& halves,
                                                     const Rational& zeta);

struct Configuration {
  IndexSet S;
  int a = 0, a2 = 0, b = 0, b2 = 0;  // T = (a, a', b, b')
  std::vector<int> K, K2;             // indices S+{b}, S+{b'}
  int v = -1, v2 = -1;                // v in V_a, v' in V_a'
  bool flipped = false;
  bool fake = false;
};

// The two cliques the configuration currently contributes.
std::pair<Clique, Clique> current_cliques(const Configuration& c);
bool verify_configuration(const MultipartiteGraph& g, const Configuration& c);

// Greedy pool of vertex-disjoint configurations formed by pairs of cliques of
// m, round-robin over (S,T) patterns. p = 2 patterns with a != 0 are padded
// with fake configurations when allow_fake is set.
std::vector<Configuration> discover_configurations(const MultipartiteGraph& g, const CliquePacking& m,
                                                   int p, int per_pattern, bool allow_fake);

struct FlipResult {
  CliquePacking packing;
  int flips = 0;
  std::vector<std::string> log;
};

// Index sets of size p over [r] in the processing order used by flip_balance:
// everything outside the terminal family first, terminal family last.
std::vector<IndexSet> flip_order(int r, int p);
std::vector<IndexSet> terminal_family(int r, int p);

FlipResult flip_balance(const MultipartiteGraph& g, const CliquePacking& m, std::vector<Configuration> pool,
                        int r, int p);

struct ExactSearchResult {
  std::optional<CliquePacking> packing;
  bool completed = false;  // true: the verdict is exact
  std::uint64_t nodes = 0;
};

ExactSearchResult exact_balanced_clique_packing(const MultipartiteGraph& g, int p, bool require_balanced,
                                                std::uint64_t budget);

}  // namespace kpack
