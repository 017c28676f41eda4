#include <doctest.h>

#include <filesystem>
#include <sstream>

#include "pgp/cli.hpp"
#include "pgp/io.hpp"
#include "pgp/pruning.hpp"

using namespace pgp;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

// Fresh scratch directory per test case.
struct Scratch {
  fs::path dir;
  explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("pgp_cli_" + name)) {
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string operator/(const std::string& file) const { return (dir / file).string(); }
};

}  // namespace

TEST_CASE("generate") {
  Scratch s("generate");
  const Run r = cli({"generate", "grid", "--rows", "30", "--cols", "30", "--spacing", "1.0", "--out", s / "g.g2o"});
  CHECK(r.code == kExitOk);
  const auto g = parse_graph(read_file(s / "g.g2o")).graph;
  CHECK(g.vertex_count() == 900);
  CHECK(parse_poses(read_file(s / "g.gt")).size() == 900);

  const Run a = cli({"generate", "random", "--steps", "500", "--seed", "7"});
  const Run b = cli({"generate", "random", "--steps", "500", "--seed", "7"});
  CHECK(a.code == kExitOk);
  CHECK(a.out == b.out);
  CHECK(parse_graph(a.out).graph.vertex_count() == 500);
  CHECK(cli({"generate", "random", "--steps", "500", "--seed", "8"}).out != a.out);

  const Run noisy = cli({"generate", "grid", "--rows", "5", "--cols", "5", "--spacing", "1", "--noise", "--corrupt",
                         "0.5", "--seed", "3"});
  CHECK(noisy.code == kExitOk);
  CHECK(parse_graph(noisy.out).graph.count_corrupted(EdgeKind::loop_closure) > 0);
  CHECK(noisy.out == cli({"generate", "grid", "--rows", "5", "--cols", "5", "--spacing", "1", "--noise", "--corrupt",
                          "0.5", "--seed", "3"})
                         .out);
}

TEST_CASE("usage errors exit with 1") {
  const Run missing = cli({"generate", "grid", "--rows", "30", "--cols", "30"});
  CHECK(missing.code == kExitUsage);
  CHECK_FALSE(missing.err.empty());
  CHECK(cli({}).code == kExitUsage);
  CHECK(cli({"frobnicate"}).code == kExitUsage);
  CHECK(cli({"generate", "grid", "--rows", "1", "--cols", "30", "--spacing", "1"}).code == kExitUsage);
  CHECK(cli({"montecarlo", "--preset", "p_reference", "--methods", "sid"}).code == kExitUsage);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("data errors exit with 2") {
  Scratch s("data_errors");
  write_file(s / "bad.g2o", "VERTEX_SE2 0 0 0 0\nEDGE_SE2 0 5 1 0 0 1 0 0 1 0 1\n");
  const Run r = cli({"optimize", s / "bad.g2o", "--out", s / "o.g2o"});
  CHECK(r.code == kExitData);
  CHECK(r.err.find("line 2") != std::string::npos);
  write_file(s / "a.g2o", "VERTEX_SE2 0 0 0 0\nVERTEX_SE2 1 1 0 0\nEDGE_SE2 0 1 1 0 0 1 0 0 1 0 1\n");
  write_file(s / "b.gt", "VERTEX_SE2 0 0 0 0\n");
  CHECK(cli({"eval", s / "a.g2o", s / "b.gt"}).code == kExitData);
}

TEST_CASE("prune") {
  Scratch s("prune");
  REQUIRE(cli({"generate", "grid", "--rows", "30", "--cols", "30", "--spacing", "0.3", "--out", s / "g.g2o"}).code ==
          kExitOk);
  const std::string input = read_file(s / "g.g2o");

  CHECK(cli({"prune", s / "g.g2o", "--preset", "p_reference", "--out", s / "ref.g2o"}).code == kExitOk);
  CHECK(read_file(s / "ref.g2o") == input);

  const Run aggressive = cli({"prune", s / "g.g2o", "--preset", "p_aggressive", "--out", s / "agg.g2o"});
  CHECK(aggressive.code == kExitOk);
  CHECK(aggressive.out.find("before: 900 vertices") != std::string::npos);
  const PoseGraph pruned = parse_graph(read_file(s / "agg.g2o")).graph;
  CHECK(pruned.vertex_count() < 900);
  const PruneLog log = parse_prune_log(read_file(s / "agg.g2o.log"));
  CHECK(log.marginalizations() == 900 - pruned.vertex_count());
  // The log replays to the written graph.
  CHECK(serialize_graph(replay_prune_log(parse_graph(input).graph, log)) == read_file(s / "agg.g2o"));

  CHECK(cli({"prune", s / "g.g2o", "--s-hat", "5", "--n-hat", "50", "--m-hat", "50", "--e-hat", "5", "--d-hat", "5",
             "--N-hat", "10", "--out", s / "flags.g2o", "--log", s / "flags.log"})
            .code == kExitOk);
  CHECK(read_file(s / "flags.g2o") == read_file(s / "agg.g2o"));
  CHECK(read_file(s / "flags.log") == read_file(s / "agg.g2o.log"));

  CHECK(cli({"prune", s / "missing.g2o", "--out", s / "x.g2o"}).code != kExitOk);
}

TEST_CASE("config file sits between preset and flags") {
  Scratch s("config");
  REQUIRE(cli({"generate", "grid", "--rows", "20", "--cols", "20", "--spacing", "0.3", "--out", s / "g.g2o"}).code ==
          kExitOk);
  write_file(s / "cautious.ini", "s-hat=15\n");
  cli({"prune", s / "g.g2o", "--preset", "p_cautious", "--out", s / "preset.g2o"});
  cli({"prune", s / "g.g2o", "--config", s / "cautious.ini", "--out", s / "file.g2o"});
  CHECK(read_file(s / "file.g2o") == read_file(s / "preset.g2o"));

  cli({"prune", s / "g.g2o", "--out", s / "agg.g2o"});
  cli({"prune", s / "g.g2o", "--config", s / "cautious.ini", "--s-hat", "5", "--out", s / "flag.g2o"});
  CHECK(read_file(s / "flag.g2o") == read_file(s / "agg.g2o"));
  CHECK(read_file(s / "flag.g2o") != read_file(s / "file.g2o"));
}

TEST_CASE("optimize and eval") {
  Scratch s("optimize");
  REQUIRE(cli({"generate", "grid", "--rows", "8", "--cols", "8", "--spacing", "0.5", "--noise", "--out", s / "g.g2o"})
              .code == kExitOk);
  const Run self = cli({"eval", s / "g.g2o", s / "g.g2o"});
  CHECK(self.code == kExitOk);
  for (const char* metric : {"TE ", "ME ", "RME"}) {
    const auto at = self.out.find(metric);
    REQUIRE(at != std::string::npos);
    const std::string line = self.out.substr(at, self.out.find('\n', at) - at);
    CHECK(line.find("0 +- 0 m") != std::string::npos);
    CHECK(line.find("0 +- 0 deg") != std::string::npos);
  }

  const Run opt = cli({"optimize", s / "g.g2o", "--out", s / "o.g2o", "--trace", s / "trace.txt"});
  CHECK(opt.code == kExitOk);
  CHECK_FALSE(read_file(s / "trace.txt").empty());
  const Run before = cli({"eval", s / "g.g2o", s / "g.gt"});
  const Run after = cli({"eval", s / "o.g2o", s / "g.gt"});
  CHECK(before.code == kExitOk);
  CHECK(after.code == kExitOk);
  CHECK(after.out != before.out);
}

TEST_CASE("montecarlo") {
  const Run exact = cli({"montecarlo", "--runs", "1", "--fractions", "0", "--methods", "none", "--sigma", "0"});
  CHECK(exact.code == kExitOk);
  std::istringstream rows(exact.out);
  std::string header, row;
  std::getline(rows, header);
  std::getline(rows, row);
  CHECK(header == "method,corruption_fraction,runs,q25,median,q75");
  // method,fraction,runs,q25,median,q75
  std::vector<std::string> cells;
  std::stringstream fields(row);
  for (std::string f; std::getline(fields, f, ',');) cells.push_back(f);
  REQUIRE(cells.size() == 6);
  CHECK(cells[0] == "none");
  CHECK(std::stod(cells[4]) < 1e-6);

  const std::vector<std::string> small{"montecarlo", "--runs", "2", "--rows", "8", "--cols", "8", "--fractions",
                                       "0,0.2", "--m-hat", "10", "--n-hat", "10", "--format", "jsonl"};
  const Run a = cli(small);
  CHECK(a.code == kExitOk);
  CHECK(a.err.find("violations 0") != std::string::npos);
  CHECK(cli(small).out == a.out);
}
