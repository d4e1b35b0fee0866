#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "pcast/cli.hpp"
#include "pcast/config.hpp"
#include "pcast/metrics.hpp"

using namespace pcast;
namespace fs = std::filesystem;

namespace {

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv = {"pcast"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// a dump contains its own destination under the `output` key, so fixpoint
// comparisons have to blank that line
std::string without_output_key(const std::string& text) {
  std::istringstream in(text);
  std::string line, out;
  while (std::getline(in, line))
    if (line.rfind("output = ", 0) != 0) out += line + "\n";
  return out;
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() / ("pcast-test-" + std::to_string(::getpid()) + "-" +
                                        std::to_string(counter++));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static inline int counter = 0;
};

// a world small enough for sub-second CLI runs but kept by the filter
const std::vector<std::string> kWorld = {
    "--trace-nodes", "16", "--trace-days", "3", "--trace-locations", "6",
    "--trace-communities", "4", "--packets-count", "40", "--seed", "2",
};

std::vector<std::string> with_world(std::vector<std::string> args) {
  args.insert(args.end(), kWorld.begin(), kWorld.end());
  return args;
}

} // namespace

TEST_CASE("config --dump emits a re-parsable fixpoint") {
  TempDir tmp;
  const auto dumped = tmp.file("dump.cfg");
  REQUIRE(cli({"config", "--dump", "--p1", "0.3", "--policy", "credit", "--output", dumped}) == 0);

  const auto first = slurp(dumped);
  CHECK(first.find("p1 = 0.3") != std::string::npos);
  CHECK(first.find("policy = credit") != std::string::npos);

  const auto redumped = tmp.file("redump.cfg");
  REQUIRE(cli({"-c", dumped, "config", "--dump", "--output", redumped}) == 0);
  CHECK(without_output_key(slurp(redumped)) == without_output_key(first));
}

TEST_CASE("command line errors use the documented exit codes") {
  TempDir tmp;
  CHECK(cli({"--help"}) == 0);
  CHECK(cli({"config"}) == 1);                        // nothing to do
  CHECK(cli({"no-such-command"}) == 1);
  CHECK(cli({"simulate", "--delta", "0"}) == 1);      // invalid configuration
  CHECK(cli({"simulate", "--no-such-flag", "1"}) == 1);
  CHECK(cli({"compare", tmp.file("missing-a.csv"), tmp.file("missing-b.csv")}) == 2);
  CHECK(cli({"-c", tmp.file("missing.cfg"), "config", "--dump"}) == 2);
}

TEST_CASE("gen-trace writes a parsable trace and refuses accidental overwrites") {
  TempDir tmp;
  const auto trace = tmp.file("trace.csv");
  REQUIRE(cli({"gen-trace", "-o", trace, "--trace-nodes", "10", "--trace-days", "2",
               "--trace-seed", "3"}) == 0);
  std::ifstream in(trace);
  const auto records = parse_trace(in);
  CHECK(records.size() == 10 * 2 * 4); // nodes x days x default sessions per day

  CHECK(cli({"gen-trace", "-o", trace, "--trace-nodes", "10"}) == 2);
  CHECK(cli({"gen-trace", "-o", trace, "--trace-nodes", "10", "--trace-days", "2",
             "--trace-seed", "3", "--force"}) == 0);
}

TEST_CASE("simulate is reproducible byte for byte") {
  TempDir tmp;
  const auto a = tmp.file("a.csv");
  const auto b = tmp.file("b.csv");
  REQUIRE(cli(with_world({"simulate", "--p1", "0.3", "--output", a})) == 0);
  REQUIRE(cli(with_world({"simulate", "--p1", "0.3", "--output", b})) == 0);
  const auto bytes = slurp(a);
  CHECK(bytes == slurp(b));

  std::istringstream csv(bytes);
  const auto rows = read_csv(csv);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].packets == 40);
  CHECK(rows[0].echo.p1 == 0.3);
  CHECK(rows[0].echo.trace.find("synthetic") != std::string::npos);
}

TEST_CASE("simulate writes event logs on request") {
  TempDir tmp;
  const auto log = tmp.file("events.log");
  REQUIRE(cli(with_world({"simulate", "--output", tmp.file("out.csv"), "--log-file", log})) == 0);
  const auto text = slurp(log);
  CHECK(text.rfind("# packet_id,time,event,from,to\n", 0) == 0);
  CHECK(text.find("deliver") != std::string::npos);
}

TEST_CASE("screened packets all deliver in a clean rerun") {
  TempDir tmp;
  const auto packets = tmp.file("packets.txt");
  REQUIRE(cli(with_world({"screen", "-o", packets})) == 0);

  const auto out = tmp.file("screened.csv");
  REQUIRE(cli(with_world({"simulate", "--packets-file", packets, "--output", out})) == 0);
  std::istringstream csv(slurp(out));
  const auto rows = read_csv(csv);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].packets > 0);
  CHECK(rows[0].delivery_ratio == 1.0);
}

TEST_CASE("a dumped assignment reproduces the run when loaded back") {
  TempDir tmp;
  const auto asg = tmp.file("assignment.txt");
  const auto a = tmp.file("a.csv");
  const auto b = tmp.file("b.csv");
  REQUIRE(cli(with_world({"simulate", "--p1", "0.4", "--assignment-dump", asg, "--output", a})) == 0);
  CHECK(slurp(asg).find(",1,") != std::string::npos); // someone is malicious
  REQUIRE(cli(with_world({"simulate", "--p1", "0.4", "--assignment-load", asg, "--output", b})) == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("a profile cache round-trips the world") {
  TempDir tmp;
  const auto cache = tmp.file("profiles.txt");
  const auto a = tmp.file("a.csv");
  const auto b = tmp.file("b.csv");
  REQUIRE(cli(with_world({"simulate", "--profile-cache", cache, "--output", a})) == 0);
  CHECK(fs::exists(cache));
  REQUIRE(cli(with_world({"simulate", "--profile-cache", cache, "--output", b})) == 0);
  CHECK(slurp(a) == slurp(b));
}

TEST_CASE("sweeps order rows value-major and ignore the job count") {
  TempDir tmp;
  const auto serial = tmp.file("serial.csv");
  const auto parallel = tmp.file("parallel.csv");
  REQUIRE(cli(with_world({"sweep", "--param", "p2", "--values", "0.2,0.8", "--seeds", "2",
                          "--p1", "0.5", "--output", serial})) == 0);
  REQUIRE(cli(with_world({"sweep", "--param", "p2", "--values", "0.2,0.8", "--seeds", "2",
                          "--p1", "0.5", "--jobs", "3", "--output", parallel})) == 0);
  CHECK(slurp(serial) == slurp(parallel));

  std::istringstream csv(slurp(serial));
  const auto rows = read_csv(csv);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].echo.sweep_value == "0.2");
  CHECK(rows[1].echo.sweep_value == "0.2");
  CHECK(rows[2].echo.sweep_value == "0.8");
  CHECK(rows[3].echo.sweep_value == "0.8");
  CHECK(rows[0].echo.seed + 1 == rows[1].echo.seed);
  CHECK(rows[0].echo.sweep_key == "p2");
  CHECK(rows[0].echo.p2 == 0.2);
  CHECK(rows[2].echo.p2 == 0.8);
}

TEST_CASE("compare joins two sweeps over the same points") {
  TempDir tmp;
  const auto none = tmp.file("none.csv");
  const auto credit = tmp.file("credit.csv");
  REQUIRE(cli(with_world({"sweep", "--param", "p1", "--values", "0.2,0.6", "--output", none})) == 0);
  REQUIRE(cli(with_world({"sweep", "--param", "p1", "--values", "0.2,0.6", "--policy", "credit",
                          "--output", credit})) == 0);

  const auto cmp = tmp.file("cmp.csv");
  REQUIRE(cli({"compare", none, credit, "-o", cmp}) == 0);
  const auto text = slurp(cmp);
  CHECK(text.find("none") != std::string::npos);
  CHECK(text.find("credit") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') >= 3); // header plus two points

  // different sweep points refuse to join
  const auto other = tmp.file("other.csv");
  REQUIRE(cli(with_world({"sweep", "--param", "p1", "--values", "0.2,0.7", "--output", other})) == 0);
  CHECK(cli({"compare", none, other, "-o", tmp.file("bad.csv")}) == 1);
}
