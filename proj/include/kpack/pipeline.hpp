#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kpack/detect.hpp"
#include "kpack/graph.hpp"
#include "kpack/rational.hpp"

namespace kpack {

struct PipelineParams {
  Rational d{1, 100};      // density slack; sqrt(d) must be rational
  Rational beta{1, 50};
  Rational alpha{1, 10};
  Rational zeta{1};        // pair-complete matching tolerance, >= 1 skips checks
  std::vector<Rational> split_thresholds;  // empty: k-1 values d, 2d, ...
  int eta_count = 1;       // ij-distributed cliques per ordered heavy pair
  std::uint64_t budget = 5'000'000;
  std::uint64_t extend_budget = 20'000;  // backtracking nodes per extension
  int oracle_vertex_limit = 15;
  DetectOptions detect;
  std::optional<RowDecomposition> planted;  // decomposition of G[X] in g ids
};

// ---- blocks -----------------------------------------------------------------

struct BadRecord {
  int v = -1;
  std::string reason;  // "diagonal", "half", "fill"
  int row = -1, col = -1;  // the failing block (or the half's column)
  int count = 0;
  int threshold = 0;
};

struct VertexMove {
  int v = -1;
  int from_row = -1;  // -1 for reinstated fill vertices
  int to_row = -1;
  int bad_blocks = 0;
};

struct BlockAssignment {
  int n = 0;  // block unit: |X^i_j| = p_i n
  std::vector<int> p;
  std::vector<int> x_row;  // fixed row in X, -1 for vertices outside X
  std::vector<int> w_row;  // current W row
  std::vector<char> good;
  std::vector<char> pair_complete;  // per row
  std::vector<char> in_t;  // original half T (pair-complete rows)
  std::vector<char> in_s;  // half S after the reassignment rule
  std::vector<BadRecord> bad;
  std::vector<VertexMove> moves;
  std::vector<Bitset> x_blocks;  // row * r + col
  bool all_good = false;  // treat every vertex as good during extensions

  int s() const { return static_cast<int>(p.size()); }
  std::vector<int> block(const MultipartiteGraph& g, int i, int j) const;  // W^i_j
  Bitset block_set(const MultipartiteGraph& g, int i, int j) const;
  bool is_good(int v) const { return all_good || good[v]; }
  // Blocks X^i_j (j != class of v) with |N(v) cap X^i_j| < p_i n - n/2.
  std::vector<std::pair<int, int>> bad_blocks(const MultipartiteGraph& g, int v) const;
  bool block_bad_for(const MultipartiteGraph& g, int v, int i, int j) const;
};

// Rechecks every recorded bad vertex. Empty result means consistent.
std::vector<std::string> audit_assignment(const MultipartiteGraph& g, const BlockAssignment& a);
// Vertices with two bad blocks in one column. Large n rules these out; small
// instances can have them.
std::vector<std::string> column_conflicts(const MultipartiteGraph& g, const BlockAssignment& a);

// decomp is over g (row_of = -1 for vertices outside X); halves gives T^i_j
// for pair-complete rows (empty vector for the others).
BlockAssignment classify_bad_vertices(const MultipartiteGraph& g, const RowDecomposition& decomp,
                                      const std::vector<std::vector<std::vector<int>>>& halves,
                                      const Rational& sqrt_d);

// ---- clique extension ------------------------------------------------------

struct ExtendRequest {
  std::vector<int> seed;                 // K'': seed[0] may be bad, the rest good
  std::vector<std::vector<int>> A;       // column sets per row
  std::vector<int> parity;               // per row: -1 none, else target |K cap S^i|
  Bitset forbidden;
  std::uint64_t budget = 20'000;
};

struct ExtendResult {
  std::optional<Clique> clique;
  std::string failure;  // failing step when absent
};

ExtendResult extend_clique(const MultipartiteGraph& g, const BlockAssignment& a, const ExtendRequest& req);

// ---- building blocks -------------------------------------------------------

enum class BlockKind { Proper, Ij, ProperOutside, ThroughVertex, IjEdge };

struct BlockRequest {
  BlockKind kind = BlockKind::Proper;
  int i = -1, j = -1;        // ij rows, or the row l for ProperOutside
  int v = -1, u = -1;        // through-vertex v; edge (u, v) with u good
  int parity = -1;           // b for Ij (0 or 3 on row i) and IjEdge (0 or 1 on row j)
  std::vector<std::vector<int>> family;  // Proper with a fixed family
  std::function<bool(const std::vector<std::vector<int>>&)> accept;  // optional family filter
};

struct BlockResult {
  std::optional<Clique> clique;
  std::vector<std::vector<int>> family;  // columns used per row
  std::string failure;
};

BlockResult building_block(const MultipartiteGraph& g, const BlockAssignment& a, const BlockRequest& req,
                           const Bitset& forbidden, std::uint64_t budget = 20'000);

// All families (A_1..A_s) of disjoint column sets with |A_i| = sizes[i],
// lexicographic order.
std::vector<std::vector<std::vector<int>>> column_families(int r, const std::vector<int>& sizes);

// ---- ledger ----------------------------------------------------------------

struct LedgerEntry {
  Clique clique;
  int stage = 0;          // 1..5, 6 for the row-parity step
  std::string tag;        // "proper", "ij", "proper_outside"
  int row_plus = -1, row_minus = -1, outside = -1;
};

struct DeletionLedger {
  std::vector<LedgerEntry> entries;
  std::vector<std::string> events;  // M_2 replacements and similar

  Bitset covered(const MultipartiteGraph& g) const;
  std::vector<LedgerEntry> stage(int m) const;
};

// Disjointness, cliqueness and tag re-verification against the assignment.
std::vector<std::string> verify_ledger(const MultipartiteGraph& g, const BlockAssignment& a,
                                       const DeletionLedger& ledger, int k);

// ---- stages ----------------------------------------------------------------

struct StageReport {
  std::string name;
  int deleted = 0;
  std::vector<std::string> recounts;
  bool ok = true;
  std::string failure;
};

bool extremal_row_structure(const BlockAssignment& a);

// Each returns false (report.failure set) on a supply or search failure and
// throws InternalError when a postcondition recount fails.
bool balance_rows(const MultipartiteGraph& g, BlockAssignment& a, DeletionLedger& ledger, int n_plus,
                  const PipelineParams& params, StageReport& report);
bool prepare_multirow(const MultipartiteGraph& g, BlockAssignment& a, DeletionLedger& ledger,
                      const PipelineParams& params, StageReport& report);

struct SizingPlan {
  int n_prime = 0;
  std::vector<std::vector<int>> removals;  // R_ij still to delete after M_1, M_2
  int cliques = 0;                         // total cliques M_3 must add
};

bool cover_and_divisibility(const MultipartiteGraph& g, BlockAssignment& a, DeletionLedger& ledger,
                            int n_plus, const PipelineParams& params, SizingPlan& plan,
                            StageReport& report);
bool balance_columns(const MultipartiteGraph& g, BlockAssignment& a, DeletionLedger& ledger, int n_plus,
                     const PipelineParams& params, StageReport& report);

struct FinalBlocks {
  int n_prime = 0;
  std::vector<int> p;
  std::vector<std::vector<std::vector<int>>> blocks;  // [row][col] -> ids, sorted
  std::vector<std::vector<std::vector<int>>> halves;  // S' per pair-complete row
};

bool balance_blocks(const MultipartiteGraph& g, BlockAssignment& a, DeletionLedger& ledger, int n_plus,
                    const PipelineParams& params, FinalBlocks& out, StageReport& report);

// Minimum over v in X'^i_j, i' != i, j' != j of |N(v) cap X'^i'_j'| - p_i' n'.
int final_degree_slack(const MultipartiteGraph& g, const FinalBlocks& x);

struct RowPackings {
  std::vector<CliquePacking> rows;
  std::vector<std::string> log;
};

bool fix_row_parity_and_matchability(const MultipartiteGraph& g, BlockAssignment& a, FinalBlocks& x,
                                     DeletionLedger& ledger, const PipelineParams& params,
                                     RowPackings& out, StageReport& report);

struct GlueLog {
  std::vector<int> sigma;
  int n_per_class = 0;
  std::int64_t min_degree = 0;
  std::int64_t full_degree = 0;  // N^{s-1}
};

struct GlueResult {
  std::optional<CliquePacking> packing;
  std::vector<GlueLog> logs;
  std::string failure;
};

GlueResult glue_rows(const MultipartiteGraph& g, const FinalBlocks& x, const RowPackings& rows);

// ---- driver ----------------------------------------------------------------

enum class SolveStatus { Packed, Extremal, Diagnosis };
std::string to_string(SolveStatus s);

struct SolveResult {
  SolveStatus status = SolveStatus::Diagnosis;
  std::optional<CliquePacking> packing;
  std::vector<StageReport> stages;
  std::string route;  // "matching", "exact", "pipeline", "oracle"
  nlohmann::ordered_json diagnosis = nlohmann::ordered_json::object();
};

SolveResult solve(const MultipartiteGraph& g, int k, const PipelineParams& params = {});
nlohmann::ordered_json solve_result_to_json(const MultipartiteGraph& g, const SolveResult& res);

// The full deletion pipeline on its own (no fallback). Throws PreconditionError
// for r <= 3 or k < 3.
struct PipelineRun {
  bool ok = false;
  std::optional<CliquePacking> packing;
  std::vector<StageReport> stages;
  BlockAssignment assignment;
  DeletionLedger ledger;
  FinalBlocks final_blocks;
  std::vector<GlueLog> glue;
  std::string failure;
};
PipelineRun run_pipeline(const MultipartiteGraph& g, int k, const PipelineParams& params);

}  // namespace kpack
