#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kpack/graph.hpp"

namespace kpack {

struct OracleVerdict {
  bool exists = false;
  std::optional<CliquePacking> witness;
  std::uint64_t nodes_explored = 0;
  bool completed = false;
};

// Exhaustive perfect K_k-packing search. Written separately from the
// matching engine so the two can be compared.
OracleVerdict brute_force_packing(const MultipartiteGraph& g, int k, std::uint64_t budget = 50'000'000);

// Class-preserving isomorphism (classes may be permuted) with build_gamma(n,r,k).
bool is_isomorphic_to_gamma(const MultipartiteGraph& g, int n, int r, int k);

struct SampleSpec {
  bool exhaustive = false;
  int count = 0;
  std::uint64_t seed = 1;
};
SampleSpec parse_sample(const std::string& text);  // "exhaustive" or "random:COUNT:SEED"

struct BoundaryEntry {
  int index = 0;
  std::uint64_t seed = 0;
  int min_degree = 0;
  bool completed = false;
  bool exists = false;
  bool parity_odd = false;
  bool gamma_iso = false;
  bool counterexample = false;
  MultipartiteGraph graph;  // kept only for counterexamples and incomplete runs
};

struct BoundaryReport {
  int r = 0, k = 0, n = 0;
  std::string sample;
  int threshold = 0;
  std::int64_t examined = 0;    // graphs generated
  std::int64_t qualifying = 0;  // with delta* >= threshold
  std::int64_t packed = 0;
  std::int64_t extremal = 0;    // no packing, explained by parity + isomorphism
  std::int64_t incomplete = 0;  // oracle budget hit
  std::vector<BoundaryEntry> entries;  // qualifying instances in order
  std::vector<BoundaryEntry> counterexamples;
};

BoundaryReport verify_theorem_boundary(int r, int k, int n, const SampleSpec& sample,
                                       std::uint64_t budget = 50'000'000);

}  // namespace kpack
