#pragma once

#include <optional>
#include <vector>

#include "kpack/bitset.hpp"
#include "kpack/graph.hpp"

// Hot loops with an OpenMP version and a serial reference. Both variants must
// return identical, order-stable results; tests compare them directly.
namespace kpack {

std::vector<Clique> enumerate_cliques_serial(const MultipartiteGraph& g, int p);
std::vector<Clique> enumerate_cliques_parallel(const MultipartiteGraph& g, int p);

// Pick one option per group such that every two picks are compatible.
// compat[a][b][x] (a < b) is the set of options of group b compatible with
// option x of group a. Returns the lexicographically least selection.
struct SelectionProblem {
  std::vector<int> group_sizes;
  std::vector<std::vector<std::vector<Bitset>>> compat;
};

std::optional<std::vector<int>> find_selection_serial(const SelectionProblem& prob);
std::optional<std::vector<int>> find_selection_parallel(const SelectionProblem& prob);

}  // namespace kpack
