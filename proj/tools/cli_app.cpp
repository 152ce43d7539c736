#include "cli_app.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <optional>

#include "kpack/detect.hpp"
#include "kpack/errors.hpp"
#include "kpack/io.hpp"
#include "kpack/oracle.hpp"
#include "kpack/pipeline.hpp"

namespace kpack {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Rational threshold(const std::string& flag, const std::string& text) {
  if (text.empty()) throw UsageError(flag + " needs a rational value num/den");
  Rational q{0};
  try {
    q = parse_rational(text);
  } catch (const PreconditionError&) {
    throw UsageError(flag + ": cannot parse '" + text + "' as num/den");
  }
  if (q <= 0) throw UsageError(flag + " must be positive");
  return q;
}

void emit(const json& j, const std::string& path, std::ostream& out) {
  if (path.empty()) out << j.dump(2) << "\n";
  else write_json_file(path, j);
}

DetectMode mode_of(const std::string& m) {
  try {
    return parse_mode(m);
  } catch (const PreconditionError& e) {
    throw UsageError(e.what());
  }
}

json boundary_json(const BoundaryReport& rep) {
  json j;
  j["r"] = rep.r;
  j["k"] = rep.k;
  j["n"] = rep.n;
  j["sample"] = rep.sample;
  j["threshold"] = rep.threshold;
  j["examined"] = rep.examined;
  j["qualifying"] = rep.qualifying;
  j["packed"] = rep.packed;
  j["extremal"] = rep.extremal;
  j["incomplete"] = rep.incomplete;
  j["entries"] = json::array();
  for (const auto& e : rep.entries)
    j["entries"].push_back(json{{"index", e.index},
                                {"seed", e.seed},
                                {"min_degree", e.min_degree},
                                {"completed", e.completed},
                                {"exists", e.exists},
                                {"parity_odd", e.parity_odd},
                                {"gamma_iso", e.gamma_iso},
                                {"counterexample", e.counterexample}});
  j["counterexamples"] = json::array();
  for (const auto& e : rep.counterexamples)
    j["counterexamples"].push_back(json{{"index", e.index}, {"seed", e.seed}, {"graph", graph_to_json(e.graph)}});
  return j;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Perfect clique packings in multipartite graphs"};
  app.require_subcommand(1);

  std::string input, output, packing_path, kind, base = "gamma", barrier = "space", mode = "auto";
  std::string th_d = "1/100", th_beta = "1/50", sample = "exhaustive";
  int n = 0, r = 0, k = 0, p = 2, j = 1, d = 2, factor = 2, floor_size = 1;
  int min_degree = -1;
  double try_fraction = 1.0;
  std::uint64_t seed = 1, budget = 5'000'000;

  auto* gen = app.add_subcommand("gen", "Generate an instance");
  gen->add_option("--kind", kind, "gamma|random|blowup|barrier")->required()
      ->check(CLI::IsMember({"gamma", "random", "blowup", "barrier"}));
  gen->add_option("--n", n, "class size (part size for gamma)");
  gen->add_option("--r", r, "number of classes");
  gen->add_option("--k", k, "clique size");
  gen->add_option("--seed", seed, "random seed");
  gen->add_option("--min-degree", min_degree, "random: partite minimum degree to keep");
  gen->add_option("--try-fraction", try_fraction, "random: fraction of edge deletions tried");
  gen->add_option("--factor", factor, "blowup factor");
  gen->add_option("--base", base, "blowup base: gamma|complete")->check(CLI::IsMember({"gamma", "complete"}));
  gen->add_option("--barrier", barrier, "space|divisibility")->check(CLI::IsMember({"space", "divisibility"}));
  gen->add_option("--p", p, "barrier weight p");
  gen->add_option("--j", j, "space barrier j");
  gen->add_option("--d", d, "divisibility lattice dimension (2)");
  gen->add_option("--output", output, "output file (stdout when absent)");

  auto* det = app.add_subcommand("detect", "Structural diagnosis");
  det->add_option("--input", input, "graph file")->required();
  det->add_option("--k", p, "weight p of the row (clique size inside it)");
  det->add_option("--threshold-d", th_d, "density threshold num/den");
  det->add_option("--threshold-beta", th_beta, "robustness / containment fraction num/den");
  det->add_option("--floor", floor_size, "smallest part of a refinement");
  det->add_option("--mode", mode, "exact|heuristic|auto");
  det->add_option("--seed", seed, "heuristic seed");
  det->add_option("--output", output, "output file");

  auto* sol = app.add_subcommand("solve", "Find a perfect K_k-packing");
  sol->add_option("--input", input, "graph file")->required();
  sol->add_option("--k", k, "clique size")->required();
  sol->add_option("--budget", budget, "search node budget");
  sol->add_option("--seed", seed, "detector seed");
  sol->add_option("--threshold-d", th_d, "d num/den (its square root must be rational)");
  sol->add_option("--threshold-beta", th_beta, "beta num/den");
  sol->add_option("--mode", mode, "exact|heuristic|auto");
  sol->add_option("--output", output, "output file");

  auto* ver = app.add_subcommand("verify", "Check a packing against a graph");
  ver->add_option("--input", input, "graph file")->required();
  ver->add_option("--packing", packing_path, "packing or solve result file")->required();
  ver->add_option("--k", k, "clique size (0: any)");
  ver->add_option("--output", output, "output file");

  auto* har = app.add_subcommand("harness", "Check the theorem boundary on small instances");
  har->add_option("--r", r, "number of classes")->required();
  har->add_option("--k", k, "clique size")->required();
  har->add_option("--n", n, "class size")->required();
  har->add_option("--sample", sample, "exhaustive | N | random:COUNT:SEED");
  har->add_option("--seed", seed, "seed for --sample N");
  har->add_option("--budget", budget, "oracle budget per instance");
  har->add_option("--output", output, "output file");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (gen->parsed()) {
      json jout;
      if (kind == "gamma") {
        auto gi = build_gamma(n, r, k);
        jout = graph_to_json(gi.graph, &gi.subparts);
      } else if (kind == "random") {
        if (r < 1 || n < 0) throw UsageError("random needs --r and --n");
        const int md = min_degree >= 0 ? min_degree : (k > 0 ? ((k - 1) * n + k - 1) / k : 0);
        jout = graph_to_json(random_min_degree_graph(std::vector<int>(r, n), md, seed, try_fraction));
      } else if (kind == "blowup") {
        if (base == "gamma") {
          auto gi = build_gamma(n, r, k);
          jout = graph_to_json(blow_up(gi.graph, factor));
        } else {
          jout = graph_to_json(blow_up(complete_multipartite(std::vector<int>(r, n)), factor));
        }
      } else {
        BarrierInstance b;
        if (barrier == "space") {
          b = space_barrier(r, p, n, j);
        } else {
          if (d != 2) throw UsageError("divisibility barrier: only the even-coordinate lattice (--d 2) is built");
          b = divisibility_barrier(r, n);
        }
        jout = graph_to_json(b.graph, &b.labels);
      }
      emit(jout, output, out);
      return 0;
    }
    if (det->parsed()) {
      BarrierThresholds th;
      th.d = threshold("--threshold-d", th_d);
      const Rational beta = threshold("--threshold-beta", th_beta);
      th.floor_size = floor_size;
      th.opts.mode = mode_of(mode);
      th.opts.seed = seed;
      GraphFile f = graph_from_json(read_json_file(input));
      const MultipartiteGraph& g = f.graph;
      if (!g.equal_class_sizes() || p < 1 || g.class_size(0) % p != 0)
        throw PreconditionError("detect: classes must have equal size divisible by --k");
      std::int64_t np = 1;
      for (int t = 0; t < p; ++t) np *= g.class_size(0) / p;
      th.mu_count = floor_of(beta * np);
      th.space_tolerance = floor_of(beta * np);
      auto rep = diagnose_barriers(g, p, th, f.labels ? &*f.labels : nullptr);
      emit(diagnosis_to_json(g, rep), output, out);
      return 0;
    }
    if (sol->parsed()) {
      PipelineParams params;
      params.d = threshold("--threshold-d", th_d);
      params.beta = threshold("--threshold-beta", th_beta);
      if (budget == 0) throw UsageError("--budget must be positive");
      params.budget = budget;
      params.detect.mode = mode_of(mode);
      params.detect.seed = seed;
      GraphFile f = graph_from_json(read_json_file(input));
      auto res = solve(f.graph, k, params);
      emit(solve_result_to_json(f.graph, res), output, out);
      switch (res.status) {
        case SolveStatus::Packed: return 0;
        case SolveStatus::Extremal: return 2;
        case SolveStatus::Diagnosis: return 3;
      }
      return 3;
    }
    if (ver->parsed()) {
      GraphFile f = graph_from_json(read_json_file(input));
      json pj = read_json_file(packing_path);
      if (pj.is_object() && pj.contains("packing")) pj = pj["packing"];
      if (pj.is_null()) throw PreconditionError("verify: the result holds no packing");
      CliquePacking m = packing_from_json(f.graph, pj);
      auto chk = verify_packing(f.graph, m, k, true);
      json jout;
      jout["ok"] = chk.ok;
      jout["violations"] = chk.violations;
      emit(jout, output, out);
      return chk.ok ? 0 : 3;
    }
    if (har->parsed()) {
      SampleSpec spec;
      if (!sample.empty() && std::all_of(sample.begin(), sample.end(), ::isdigit))
        spec = SampleSpec{false, std::stoi(sample), seed};
      else
        spec = parse_sample(sample);
      auto rep = verify_theorem_boundary(r, k, n, spec, budget);
      emit(boundary_json(rep), output, out);
      return 0;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}

}  // namespace kpack
