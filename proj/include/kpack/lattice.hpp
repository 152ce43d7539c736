#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "kpack/graph.hpp"

namespace kpack {

// Subgroup of Z^d with a Hermite-normal-form basis: rows in echelon order,
// positive pivots, entries above each pivot reduced into [0, pivot).
class IntegerLattice {
 public:
  explicit IntegerLattice(int dim = 0, std::vector<IndexVector> generators = {});

  int dim() const { return dim_; }
  const std::vector<IndexVector>& generators() const { return gens_; }
  const std::vector<IndexVector>& basis() const { return basis_; }
  bool contains(const IndexVector& v) const;

 private:
  int dim_;
  std::vector<IndexVector> gens_;
  std::vector<IndexVector> basis_;
};

IntegerLattice robust_edge_lattice(const std::vector<std::vector<int>>& edges,
                                   const PartitionLabeling& q, std::int64_t mu_count);

struct CompletenessResult {
  bool complete = true;
  std::optional<std::pair<int, int>> violating;
};

CompletenessResult is_complete_wrt(const IntegerLattice& lattice, const PartitionLabeling& q,
                                   const MultipartiteGraph& g);

struct MinimalPartition {
  PartitionLabeling q;
  IntegerLattice lattice;
  std::vector<std::pair<int, int>> merges;  // in the numbering current at merge time
};

// Merges parts i, j of one class while u_i - u_j lies in the robust lattice.
MinimalPartition merge_to_minimal(const std::vector<std::vector<int>>& edges,
                                  const PartitionLabeling& q, const MultipartiteGraph& g,
                                  std::int64_t mu_count);

}  // namespace kpack
