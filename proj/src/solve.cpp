#include <algorithm>
#include <numeric>

#include "kpack/errors.hpp"
#include "kpack/io.hpp"
#include "kpack/matching.hpp"
#include "kpack/oracle.hpp"
#include "kpack/pipeline.hpp"

namespace kpack {

std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Packed: return "packed";
    case SolveStatus::Extremal: return "extremal";
    case SolveStatus::Diagnosis: return "diagnosis";
  }
  return "diagnosis";
}

namespace {

std::int64_t factorial(int m) {
  std::int64_t f = 1;
  for (int i = 2; i <= m; ++i) f *= i;
  return f;
}

std::vector<Rational> default_thresholds(const PipelineParams& params, int k) {
  if (!params.split_thresholds.empty()) return params.split_thresholds;
  std::vector<Rational> t;
  for (int i = 1; i < k; ++i) t.push_back(params.d * i);
  return t;
}

// Planted decompositions are checked against X; otherwise G[X] is decomposed.
RowDecomposition decompose(const MultipartiteGraph& g, int k, int n, const std::vector<std::vector<int>>& xs,
                           const PipelineParams& params, StageReport& rep) {
  RowDecomposition out;
  if (params.planted) {
    out = *params.planted;
    validate_decomposition(g, out);
    if (out.n != n) throw PreconditionError("planted decomposition: block unit must be floor(n+/k)");
    for (int j = 0; j < g.r(); ++j)
      for (int v = g.class_begin(j); v < g.class_end(j); ++v) {
        const bool in_x = v - g.class_begin(j) < k * n;
        if (in_x != (out.row_of[v] >= 0)) throw PreconditionError("planted decomposition must cover exactly X");
      }
    rep.recounts.push_back("planted decomposition with " + std::to_string(out.s()) + " rows");
    return out;
  }
  Subgraph sub = induced_subgraph(g, xs);
  auto res = iterate_decomposition(sub.graph, k, default_thresholds(params, k), params.detect);
  out.n = res.decomp.n;
  out.p = res.decomp.p;
  out.row_of.assign(g.num_vertices(), -1);
  for (std::size_t t = 0; t < sub.to_parent.size(); ++t) out.row_of[sub.to_parent[t]] = res.decomp.row_of[t];
  rep.recounts.push_back("decomposition with " + std::to_string(out.s()) + " rows after " +
                         std::to_string(res.events.size()) + " splits, min diagonal density " +
                         to_string(res.min_diagonal));
  return out;
}

std::string weights_text(const std::vector<int>& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + std::to_string(p[i]);
  return s + ")";
}

// Single-row case: delete rC/k cliques, C per class, then pack the rest.
bool single_row(const MultipartiteGraph& g, int k, int n_plus, BlockAssignment& a, const PipelineParams& params,
                PipelineRun& run) {
  const int r = g.r();
  const std::int64_t rf = factorial(r);
  StageReport trim;
  trim.name = "trim";
  const int np = static_cast<int>((n_plus / k) / rf * rf);
  if (np == 0) {
    trim.ok = false;
    trim.failure = "no n' with r! | n' fits in n+/k";
    run.stages.push_back(trim);
    run.failure = "trim: " + trim.failure;
    return false;
  }
  const int C = n_plus - k * np;
  const int count = r * C / k;
  a.all_good = true;
  std::fill(a.w_row.begin(), a.w_row.end(), 0);
  Bitset used = g.empty_set();
  for (int t = 0; t < count; ++t) {
    std::vector<int> cols;
    for (int q = 0; q < k; ++q) cols.push_back((t * k + q) % r);
    std::sort(cols.begin(), cols.end());
    BlockRequest req;
    req.kind = BlockKind::Proper;
    req.family = {cols};
    auto res = building_block(g, a, req, used, params.extend_budget);
    if (!res.clique) {
      trim.ok = false;
      trim.failure = "supply shortfall while trimming: " + res.failure;
      run.stages.push_back(trim);
      run.failure = "trim: " + trim.failure;
      return false;
    }
    for (int v : *res.clique) used.set(v);
    run.ledger.entries.push_back(LedgerEntry{*res.clique, 1, "proper", -1, -1, -1});
  }
  for (int j = 0; j < r; ++j) {
    int left = 0;
    for (int v = g.class_begin(j); v < g.class_end(j); ++v) left += used.test(v) ? 0 : 1;
    if (left != k * np) throw InternalError("trim: class " + std::to_string(j) + " has the wrong remainder");
  }
  auto ver = verify_ledger(g, a, run.ledger, k);
  if (!ver.empty()) throw InternalError("trim: ledger re-verification failed: " + ver.front());
  trim.deleted = count;
  trim.recounts.push_back("each class keeps k n' = " + std::to_string(k * np) + " vertices; r! | n'");
  run.stages.push_back(trim);

  StageReport row;
  row.name = "rows";
  std::vector<std::vector<int>> keep(r);
  for (int j = 0; j < r; ++j)
    for (int v = g.class_begin(j); v < g.class_end(j); ++v)
      if (!used.test(v)) keep[j].push_back(v);
  Subgraph sub = induced_subgraph(g, keep);
  auto res = exact_balanced_clique_packing(sub.graph, k, true, params.budget);
  if (!res.packing) {
    row.ok = false;
    row.failure = res.completed ? "no balanced perfect K_k-packing (proven absent)" : "search budget exhausted";
    run.stages.push_back(row);
    run.failure = "rows: " + row.failure;
    return false;
  }
  CliquePacking m;
  for (const auto& e : run.ledger.entries) m.cliques.push_back(e.clique);
  for (const auto& c : res.packing->cliques) {
    Clique d;
    for (int v : c) d.push_back(sub.to_parent[v]);
    std::sort(d.begin(), d.end());
    m.cliques.push_back(d);
  }
  std::sort(m.cliques.begin(), m.cliques.end());
  row.recounts.push_back("balanced perfect K_k-packing of G', " + std::to_string(res.nodes) + " nodes");
  run.stages.push_back(row);
  run.final_blocks.n_prime = np;
  run.final_blocks.p = a.p;
  run.packing = m;
  return true;
}

bool certified_extremal(const MultipartiteGraph& g, int k, int n_plus) {
  const int r = g.r();
  if (n_plus % k != 0 || (static_cast<std::int64_t>(r) * n_plus / k) % 2 == 0) return false;
  return is_isomorphic_to_gamma(g, n_plus, r, k);
}

int odd_components(const MultipartiteGraph& g) {
  const int N = g.num_vertices();
  std::vector<int> comp(N, -1);
  int odd = 0;
  for (int s = 0; s < N; ++s) {
    if (comp[s] >= 0) continue;
    std::vector<int> stack{s};
    comp[s] = s;
    int size = 0;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      ++size;
      const Bitset& nb = g.neighbors(u);
      for (std::size_t w = nb.next(0); w < nb.size(); w = nb.next(w + 1))
        if (comp[w] < 0) {
          comp[w] = s;
          stack.push_back(static_cast<int>(w));
        }
    }
    odd += size % 2;
  }
  return odd;
}

CliquePacking checked(const MultipartiteGraph& g, const CliquePacking& m, int k) {
  auto chk = verify_packing(g, m, k, true);
  if (!chk.ok) throw InternalError("solve: produced packing fails verification: " + chk.violations.front());
  return m;
}

nlohmann::ordered_json stage_json(const StageReport& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["deleted"] = s.deleted;
  j["recounts"] = s.recounts;
  j["ok"] = s.ok;
  if (!s.failure.empty()) j["failure"] = s.failure;
  return j;
}

// No packing found by an exact method: extremal or a diagnosis.
void settle_absent(const MultipartiteGraph& g, int k, int n_plus, bool completed, SolveResult& out) {
  if (completed && certified_extremal(g, k, n_plus)) {
    out.status = SolveStatus::Extremal;
    out.diagnosis["reason"] = "isomorphic to the extremal construction and no perfect packing exists";
    return;
  }
  out.status = SolveStatus::Diagnosis;
  if (completed) {
    out.diagnosis["reason"] = "no perfect packing exists (small-n exception)";
    out.diagnosis["parity_odd"] =
        n_plus % k == 0 && (static_cast<std::int64_t>(g.r()) * n_plus / k) % 2 == 1;
    out.diagnosis["gamma_isomorphic"] = n_plus % k == 0 && is_isomorphic_to_gamma(g, n_plus, g.r(), k);
  } else {
    out.diagnosis["reason"] = "search budget exhausted";
  }
}

}  // namespace

PipelineRun run_pipeline(const MultipartiteGraph& g, int k, const PipelineParams& params) {
  const int r = g.r();
  if (r <= 3 || k < 3 || k > r) throw PreconditionError("run_pipeline: needs r > 3 and 3 <= k <= r");
  if (!g.equal_class_sizes()) throw PreconditionError("run_pipeline: classes must have equal sizes");
  const int n_plus = g.class_size(0);
  if ((static_cast<std::int64_t>(r) * n_plus) % k != 0) throw PreconditionError("run_pipeline: k must divide r n+");
  const int need = static_cast<int>(ceil_of(Rational((k - 1) * static_cast<std::int64_t>(n_plus), k)));
  if (partite_min_degree(g) < need) throw PreconditionError("run_pipeline: partite minimum degree too small");
  auto sqrt_d = exact_sqrt(params.d);
  if (!sqrt_d) throw PreconditionError("run_pipeline: d must be a rational square");

  PipelineRun run;
  StageReport setup;
  setup.name = "setup";
  const int n = n_plus / k;
  std::vector<std::vector<int>> xs(r);
  for (int j = 0; j < r; ++j)
    for (int t = 0; t < k * n; ++t) xs[j].push_back(g.id(j, t));
  setup.recounts.push_back("n = " + std::to_string(n) + ", deleted " + std::to_string(n_plus - k * n) +
                           " highest offsets per class from X");
  RowDecomposition decomp = decompose(g, k, n, xs, params, setup);
  setup.recounts.push_back("row weights " + weights_text(decomp.p));
  std::vector<std::vector<std::vector<int>>> halves(decomp.s());
  for (int i = 0; i < decomp.s(); ++i) {
    if (decomp.p[i] != 2) continue;
    std::vector<std::vector<int>> blocks(r);
    for (int j = 0; j < r; ++j) blocks[j] = decomp.block(g, i, j);
    Subgraph sub = induced_subgraph(g, blocks);
    auto w = is_pair_complete(sub.graph, params.d, params.detect);
    if (!w) continue;
    std::vector<std::vector<int>> h(r);
    bool sized = true;
    for (int j = 0; j < r; ++j) {
      for (int v : w->halves[j]) h[j].push_back(sub.to_parent[v]);
      std::sort(h[j].begin(), h[j].end());
      sized = sized && static_cast<int>(h[j].size()) == n;
    }
    if (!sized) continue;
    halves[i] = h;
    setup.recounts.push_back("row " + std::to_string(i) + " is pair-complete");
  }
  run.assignment = classify_bad_vertices(g, decomp, halves, *sqrt_d);
  auto audit = audit_assignment(g, run.assignment);
  if (!audit.empty()) throw InternalError("setup: assignment audit failed: " + audit.front());
  setup.recounts.push_back(std::to_string(run.assignment.bad.size()) + " bad vertices, " +
                           std::to_string(run.assignment.moves.size()) + " moves");
  auto conflicts = column_conflicts(g, run.assignment);
  if (!conflicts.empty()) {
    setup.ok = false;
    setup.failure = conflicts.front() + " (" + std::to_string(conflicts.size()) + " such vertices)";
    run.stages.push_back(setup);
    run.failure = "setup: " + setup.failure;
    return run;
  }
  run.stages.push_back(setup);

  BlockAssignment& a = run.assignment;
  if (a.s() == 1) {
    run.ok = single_row(g, k, n_plus, a, params, run);
    if (run.ok) checked(g, *run.packing, k);
    return run;
  }

  auto step = [&](StageReport& rep, bool ok) {
    run.stages.push_back(rep);
    if (!ok) run.failure = rep.name + ": " + rep.failure;
    return ok;
  };
  {
    StageReport rep;
    if (!step(rep, balance_rows(g, a, run.ledger, n_plus, params, rep))) return run;
  }
  {
    StageReport rep;
    if (!step(rep, prepare_multirow(g, a, run.ledger, params, rep))) return run;
  }
  {
    StageReport rep;
    SizingPlan plan;
    if (!step(rep, cover_and_divisibility(g, a, run.ledger, n_plus, params, plan, rep))) return run;
  }
  {
    StageReport rep;
    if (!step(rep, balance_columns(g, a, run.ledger, n_plus, params, rep))) return run;
  }
  {
    StageReport rep;
    if (!step(rep, balance_blocks(g, a, run.ledger, n_plus, params, run.final_blocks, rep))) return run;
  }
  RowPackings rows;
  {
    StageReport rep;
    if (!step(rep, fix_row_parity_and_matchability(g, a, run.final_blocks, run.ledger, params, rows, rep)))
      return run;
  }
  StageReport glue;
  glue.name = "glue";
  auto gr = glue_rows(g, run.final_blocks, rows);
  run.glue = gr.logs;
  for (const auto& l : gr.logs) {
    std::string sig;
    for (std::size_t t = 0; t < l.sigma.size(); ++t) sig += (t ? "," : "") + std::to_string(l.sigma[t]);
    glue.recounts.push_back("sigma (" + sig + "): N = " + std::to_string(l.n_per_class) + ", min degree " +
                            std::to_string(l.min_degree) + " of " + std::to_string(l.full_degree));
  }
  if (!gr.packing) {
    glue.ok = false;
    glue.failure = gr.failure;
    step(glue, false);
    return run;
  }
  glue.deleted = static_cast<int>(gr.packing->cliques.size());
  run.stages.push_back(glue);
  CliquePacking all = *gr.packing;
  for (const auto& e : run.ledger.entries) all.cliques.push_back(e.clique);
  std::sort(all.cliques.begin(), all.cliques.end());
  run.packing = checked(g, all, k);
  run.ok = true;
  return run;
}

SolveResult solve(const MultipartiteGraph& g, int k, const PipelineParams& params) {
  const int r = g.r();
  if (k < 1) throw PreconditionError("solve: k must be positive");
  if (k > r) throw PreconditionError("solve: k must not exceed the number of classes");
  if (!g.equal_class_sizes()) throw PreconditionError("solve: classes must have equal sizes");
  const int n_plus = g.class_size(0);
  if ((static_cast<std::int64_t>(r) * n_plus) % k != 0) throw PreconditionError("solve: k must divide r n+");
  const int need = static_cast<int>(ceil_of(Rational((k - 1) * static_cast<std::int64_t>(n_plus), k)));
  const int delta = n_plus == 0 ? 0 : partite_min_degree(g);
  if (delta < need)
    throw PreconditionError("solve: partite minimum degree " + std::to_string(delta) + " is below " +
                            std::to_string(need));

  SolveResult out;
  if (n_plus == 0) {
    out.status = SolveStatus::Packed;
    out.route = "trivial";
    out.packing = CliquePacking{};
    return out;
  }
  if (k == 1) {
    CliquePacking m;
    for (int v = 0; v < g.num_vertices(); ++v) m.cliques.push_back({v});
    out.status = SolveStatus::Packed;
    out.route = "trivial";
    out.packing = checked(g, m, 1);
    return out;
  }
  if (k == 2) {
    out.route = "matching";
    auto mate = maximum_matching(g);
    CliquePacking m;
    int unmatched = 0;
    for (int v = 0; v < g.num_vertices(); ++v) {
      if (mate[v] < 0) ++unmatched;
      else if (v < mate[v]) m.cliques.push_back({v, mate[v]});
    }
    if (unmatched == 0) {
      out.status = SolveStatus::Packed;
      out.packing = checked(g, m, 2);
      return out;
    }
    const int odd = odd_components(g);
    out.diagnosis["odd_components"] = odd;
    out.diagnosis["unmatched"] = unmatched;
    settle_absent(g, k, n_plus, true, out);
    return out;
  }

  const bool small = g.num_vertices() <= params.oracle_vertex_limit;
  if (small || r <= 3) {
    out.route = "exact";
    auto res = exact_balanced_clique_packing(g, k, false, params.budget);
    if (res.packing) {
      out.status = SolveStatus::Packed;
      out.packing = checked(g, *res.packing, k);
      return out;
    }
    bool completed = res.completed;
    if (!completed) {
      auto v = brute_force_packing(g, k, params.budget);
      out.route = "oracle";
      if (v.exists) {
        out.status = SolveStatus::Packed;
        out.packing = checked(g, *v.witness, k);
        return out;
      }
      completed = v.completed;
    }
    settle_absent(g, k, n_plus, completed, out);
    return out;
  }

  out.route = "pipeline";
  std::string why;
  try {
    PipelineRun run = run_pipeline(g, k, params);
    out.stages = run.stages;
    if (run.ok) {
      out.status = SolveStatus::Packed;
      out.packing = run.packing;
      return out;
    }
    why = run.failure;
  } catch (const PreconditionError& e) {
    why = e.what();
  } catch (const std::runtime_error& e) {
    why = e.what();
  }
  out.route = "oracle";
  out.diagnosis["pipeline_failure"] = why;
  auto v = brute_force_packing(g, k, params.budget);
  out.diagnosis["oracle_nodes"] = v.nodes_explored;
  if (v.exists) {
    out.status = SolveStatus::Packed;
    out.packing = checked(g, *v.witness, k);
    return out;
  }
  settle_absent(g, k, n_plus, v.completed, out);
  return out;
}

nlohmann::ordered_json solve_result_to_json(const MultipartiteGraph& g, const SolveResult& res) {
  nlohmann::ordered_json j;
  j["status"] = to_string(res.status);
  j["packing"] = res.packing ? packing_to_json(g, *res.packing) : nlohmann::ordered_json(nullptr);
  j["stages"] = nlohmann::ordered_json::array();
  for (const auto& s : res.stages) j["stages"].push_back(stage_json(s));
  j["diagnosis"] = res.diagnosis;
  j["route"] = res.route;
  return j;
}

}  // namespace kpack
