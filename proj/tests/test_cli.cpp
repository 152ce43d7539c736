#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include "cli_app.hpp"
#include "kpack/io.hpp"
#include "support/naive.hpp"

using namespace kpack;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream o, e;
  const int code = run_cli(args, o, e);
  return {code, o.str(), e.str()};
}

fs::path scratch() {
  auto d = fs::temp_directory_path() / ("kpack_cli_test_" + std::to_string(::getpid()));
  fs::create_directories(d);
  return d;
}

}  // namespace

TEST_CASE("gen is deterministic and round-trips") {
  const auto d = scratch();
  auto a = cli({"gen", "--kind", "random", "--r", "3", "--n", "4", "--k", "2", "--seed", "9"});
  auto b = cli({"gen", "--kind", "random", "--r", "3", "--n", "4", "--k", "2", "--seed", "9"});
  auto c = cli({"gen", "--kind", "random", "--r", "3", "--n", "4", "--k", "2", "--seed", "10"});
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  CHECK(a.out != c.out);
  auto g = graph_from_json(json::parse(a.out)).graph;
  CHECK(g.r() == 3);
  CHECK(partite_min_degree(g) >= 2);

  CHECK(cli({"gen", "--kind", "gamma", "--n", "3", "--r", "3", "--k", "3", "--output", (d / "g.json").string()})
            .code == 0);
  auto f = graph_from_json(read_json_file((d / "g.json").string()));
  CHECK(f.graph.num_vertices() == 9);
  CHECK(f.labels.has_value());
  CHECK(naive::edge_set(f.graph) == naive::edge_set(build_gamma(3, 3, 3).graph));
}

TEST_CASE("solve exit codes and verify") {
  const auto d = scratch();
  const auto gp = (d / "gamma.json").string(), rp = (d / "res.json").string();
  cli({"gen", "--kind", "gamma", "--n", "3", "--r", "3", "--k", "3", "--output", gp});
  auto ext = cli({"solve", "--input", gp, "--k", "3"});
  CHECK(ext.code == 2);
  CHECK(json::parse(ext.out)["status"] == "extremal");
  CHECK(json::parse(ext.out)["packing"].is_null());

  const auto kp = (d / "k.json").string();
  cli({"gen", "--kind", "blowup", "--base", "complete", "--n", "1", "--r", "3", "--factor", "3", "--output", kp});
  auto ok = cli({"solve", "--input", kp, "--k", "3", "--output", rp});
  CHECK(ok.code == 0);
  CHECK(cli({"verify", "--input", kp, "--packing", rp, "--k", "3"}).code == 0);

  // tamper: swap two vertices between cliques of different index patterns
  auto res = read_json_file(rp);
  auto& pk = res["packing"]["cliques"];
  REQUIRE(pk.size() >= 2);
  std::swap(pk[0][0], pk[1][1]);
  write_json_file((d / "bad.json").string(), res);
  auto bad = cli({"verify", "--input", kp, "--packing", (d / "bad.json").string(), "--k", "3"});
  CHECK(bad.code == 3);
  auto bj = json::parse(bad.out);
  CHECK(bj["ok"] == false);
  CHECK(!bj["violations"].empty());
}

TEST_CASE("usage errors exit with 1") {
  const auto d = scratch();
  const auto gp = (d / "c.json").string();
  cli({"gen", "--kind", "blowup", "--base", "complete", "--n", "1", "--r", "3", "--factor", "3", "--output", gp});
  auto empty = cli({"solve", "--input", gp, "--k", "3", "--threshold-d", ""});
  CHECK(empty.code == 1);
  CHECK(empty.err.find("usage error") != std::string::npos);
  CHECK(cli({"solve", "--input", gp, "--k", "3", "--threshold-d", "abc"}).code == 1);
  CHECK(cli({"solve", "--input", gp}).code == 1);
  CHECK(cli({"frobnicate"}).code == 1);
  CHECK(cli({}).code == 1);
  CHECK(cli({"gen", "--kind", "barrier", "--barrier", "divisibility", "--r", "3", "--n", "1", "--d", "3"}).code == 1);
  // precondition failures are errors too
  CHECK(cli({"solve", "--input", gp, "--k", "4"}).code == 1);
}

TEST_CASE("detect flags generated barriers") {
  const auto d = scratch();
  const auto sp = (d / "space.json").string(), dp = (d / "div.json").string();
  CHECK(cli({"gen", "--kind", "barrier", "--barrier", "space", "--r", "3", "--p", "3", "--n", "1", "--j", "1",
             "--output", sp})
            .code == 0);
  auto det = cli({"detect", "--input", sp, "--k", "3", "--threshold-d", "1/4", "--mode", "exact"});
  CHECK(det.code == 0);
  CHECK(!json::parse(det.out)["space"].empty());
  CHECK(cli({"gen", "--kind", "barrier", "--barrier", "divisibility", "--r", "3", "--n", "1", "--output", dp}).code ==
        0);
  auto dd = cli({"detect", "--input", dp, "--k", "2", "--threshold-d", "1/4", "--mode", "exact"});
  CHECK(dd.code == 0);
  CHECK(!json::parse(dd.out)["divisibility"].empty());
}

TEST_CASE("harness subcommand") {
  auto h = cli({"harness", "--r", "2", "--k", "2", "--n", "2", "--sample", "exhaustive"});
  CHECK(h.code == 0);
  auto j = json::parse(h.out);
  CHECK(j["examined"] == 16);
  CHECK(j["counterexamples"].empty());
  auto h2 = cli({"harness", "--r", "3", "--k", "3", "--n", "3", "--sample", "5", "--seed", "2"});
  CHECK(h2.code == 0);
  CHECK(json::parse(h2.out)["examined"] == 5);
}

TEST_CASE("the installed binary reports the same exit codes") {
  const char* bin = std::getenv("KPACK_CLI");
  if (!bin) return;
  const auto d = scratch();
  const auto gp = (d / "bin_gamma.json").string();
  auto sh = [&](const std::string& cmd) {
    const int st = std::system((std::string(bin) + " " + cmd + " >/dev/null 2>&1").c_str());
    return WEXITSTATUS(st);
  };
  CHECK(sh("gen --kind gamma --n 3 --r 3 --k 3 --output " + gp) == 0);
  CHECK(sh("solve --input " + gp + " --k 3") == 2);
  CHECK(sh("solve --input " + gp + " --k 3 --threshold-d ''") == 1);
}
