#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "gtqa/io.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path =
        fs::temp_directory_path() / ("gtqa_cli_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

int run_cli(const std::string& args) {
  const std::string command = std::string(GTQA_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int status = std::system(command.c_str());
  return WEXITSTATUS(status);
}

std::string strip_metadata(const std::string& report_json) {
  json j = json::parse(report_json);
  j.erase("metadata");
  return j.dump();
}

}  // namespace

TEST_CASE("gen: deterministic files, validation exit codes") {
  TempDir dir;
  CHECK(run_cli("gen --n 20 --d 3 --kind qubo --seed 7 --out " + dir.file("a.json")) == 0);
  CHECK(run_cli("gen --n 20 --d 3 --kind qubo --seed 7 --out " + dir.file("b.json")) == 0);
  CHECK(gtqa::read_text_file(dir.file("a.json")) == gtqa::read_text_file(dir.file("b.json")));

  json inst = json::parse(gtqa::read_text_file(dir.file("a.json")));
  CHECK(inst["n"] == 20);
  CHECK(inst["edges"].size() == 30);
  CHECK(inst["kind"] == "qubo");

  // infeasible parameters -> exit 2
  CHECK(run_cli("gen --n 5 --d 3 --out " + dir.file("bad.json")) == 2);
  CHECK(run_cli("gen --badflag 1") == 2);
  CHECK(run_cli("definitely-not-a-subcommand") == 2);
}

TEST_CASE("gen: maxcut forces J=-1, h=0") {
  TempDir dir;
  CHECK(run_cli("gen --n 16 --d 3 --kind maxcut --seed 3 --out " + dir.file("mc.json")) == 0);
  json inst = json::parse(gtqa::read_text_file(dir.file("mc.json")));
  CHECK(inst["kind"] == "maxcut");
  for (const auto& e : inst["edges"]) CHECK(e[2].get<double>() == -1.0);
  for (const auto& h : inst["h"]) CHECK(h.get<double>() == 0.0);
}

TEST_CASE("run: emits report and traces; missing instance is exit 2") {
  TempDir dir;
  REQUIRE(run_cli("gen --n 10 --d 3 --seed 5 --out " + dir.file("inst.json")) == 0);
  CHECK(run_cli("run --instance " + dir.file("inst.json") + " --T 4 --dt 0.2 --chi 4" +
                " --out-prefix " + dir.file("r")) == 0);
  json report = json::parse(gtqa::read_text_file(dir.file("r.report.json")));
  CHECK(report["layers"] == 20);
  CHECK(report["bitstring"].size() == 10);
  CHECK(report.contains("metadata"));
  std::string z_csv = gtqa::read_text_file(dir.file("r.z.csv"));
  CHECK(z_csv.rfind("layer,qubit,z\n", 0) == 0);
  // 20 layers x 10 qubits + header
  CHECK(std::count(z_csv.begin(), z_csv.end(), '\n') == 201);

  CHECK(run_cli("run --T 4 --chi 4") == 2);                       // no instance
  CHECK(run_cli("run --instance /nonexistent --T 4 --chi 4") == 2);  // io error
  CHECK(run_cli("run --instance " + dir.file("inst.json") + " --T 4.1 --dt 0.2 --chi 4") ==
        2);  // non-integral T/dt
}

TEST_CASE("run: identical flags give byte-identical outputs modulo metadata") {
  TempDir dir;
  REQUIRE(run_cli("gen --n 10 --d 3 --seed 11 --out " + dir.file("inst.json")) == 0);
  REQUIRE(run_cli("run --instance " + dir.file("inst.json") +
                  " --T 4 --dt 0.2 --chi 4 --out-prefix " + dir.file("one")) == 0);
  REQUIRE(run_cli("run --instance " + dir.file("inst.json") +
                  " --T 4 --dt 0.2 --chi 4 --out-prefix " + dir.file("two")) == 0);
  CHECK(strip_metadata(gtqa::read_text_file(dir.file("one.report.json"))) ==
        strip_metadata(gtqa::read_text_file(dir.file("two.report.json"))));
  CHECK(gtqa::read_text_file(dir.file("one.z.csv")) ==
        gtqa::read_text_file(dir.file("two.z.csv")));
  CHECK(gtqa::read_text_file(dir.file("one.trace.csv")) ==
        gtqa::read_text_file(dir.file("two.trace.csv")));
}

TEST_CASE("run: kill-and-resume from a checkpoint matches the uninterrupted run") {
  TempDir dir;
  REQUIRE(run_cli("gen --n 10 --d 3 --seed 13 --out " + dir.file("inst.json")) == 0);
  // full run
  REQUIRE(run_cli("run --instance " + dir.file("inst.json") +
                  " --T 8 --dt 0.2 --chi 4 --out-prefix " + dir.file("full")) == 0);
  // interrupted run: checkpoint at layer 20 of 40 (simulates a kill at 50%)
  REQUIRE(run_cli("run --instance " + dir.file("inst.json") +
                  " --T 8 --dt 0.2 --chi 4 --checkpoint " + dir.file("cp.json") +
                  " --checkpoint-every 20 --out-prefix " + dir.file("interrupted")) == 0);
  REQUIRE(fs::exists(dir.file("cp.json")));
  {
    gtqa::Snapshot cp = gtqa::load_snapshot(dir.file("cp.json"));
    CHECK(cp.checkpoint.next_layer == 21);
  }
  REQUIRE(run_cli("run --resume " + dir.file("cp.json") + " --out-prefix " +
                  dir.file("resumed")) == 0);
  CHECK(strip_metadata(gtqa::read_text_file(dir.file("resumed.report.json"))) ==
        strip_metadata(gtqa::read_text_file(dir.file("full.report.json"))));
  CHECK(gtqa::read_text_file(dir.file("resumed.z.csv")) ==
        gtqa::read_text_file(dir.file("full.z.csv")));
}

TEST_CASE("sample: product snapshot gives identical bitstrings; tail flag works") {
  TempDir dir;
  REQUIRE(run_cli("gen --n 8 --d 3 --seed 17 --out " + dir.file("inst.json")) == 0);
  // very long anneal on a tiny instance: essentially a computational product state
  REQUIRE(run_cli("run --instance " + dir.file("inst.json") +
                  " --T 60 --dt 0.2 --chi 8 --out-prefix " + dir.file("r") + " --save-state " +
                  dir.file("state.json")) == 0);
  REQUIRE(run_cli("sample --state " + dir.file("state.json") + " --count 5 --seed 2 --out " +
                  dir.file("s.jsonl")) == 0);
  std::istringstream lines(gtqa::read_text_file(dir.file("s.jsonl")));
  std::string line, first;
  int count = 0;
  while (std::getline(lines, line)) {
    json record = json::parse(line);
    CHECK(record["bitstring"].size() == 8);
    CHECK(record["log_probability"].get<double>() <= 0.0);
    if (count == 0) first = record["bitstring"].dump();
    ++count;
  }
  CHECK(count == 5);

  CHECK(run_cli("sample --state " + dir.file("state.json") +
                " --count 2 --seed 3 --tail-brute-force 4 --out " + dir.file("t.jsonl")) == 0);
  CHECK(run_cli("sample --state " + dir.file("state.json") +
                " --count 2 --seed 3 --order random --out " + dir.file("o.jsonl")) == 0);
}

TEST_CASE("verify: single instance report") {
  TempDir dir;
  REQUIRE(run_cli("gen --n 10 --d 3 --seed 19 --out " + dir.file("inst.json")) == 0);
  CHECK(run_cli("verify --instance " + dir.file("inst.json") + " --T 2 --dt 0.2 --chi 4 --out " +
                dir.file("v.json")) == 0);
  json v = json::parse(gtqa::read_text_file(dir.file("v.json")));
  CHECK(v["epsilon"].get<double>() >= 0.0);
  CHECK(v["entropy_rel_error"].get<double>() >= 0.0);
  CHECK(v.contains("optimum"));
  CHECK(v["optimum"].get<double>() >= v["objective"].get<double>() - 1e-9);
}

TEST_CASE("verify: batch mode emits quantiles") {
  TempDir dir;
  CHECK(run_cli("verify --n 10 --d 3 --seeds 3 --seed-base 100 --T 2 --dt 0.2 --chi 4 "
                "--threads 2 --out " +
                dir.file("v.json")) == 0);
  json v = json::parse(gtqa::read_text_file(dir.file("v.json")));
  CHECK(v["runs"].size() == 3);
  CHECK(v["epsilon_quantiles"].contains("median"));
}

TEST_CASE("loops: heavy-hex analysis and random graphs") {
  TempDir dir;
  CHECK(run_cli("loops --heavy-hex --out " + dir.file("hh.csv") + " --hist " +
                dir.file("hist.csv")) == 0);
  std::string hist = gtqa::read_text_file(dir.file("hist.csv"));
  CHECK(hist.rfind("loop_length,count\n", 0) == 0);
  CHECK(hist.find("12,") != std::string::npos);
  // smallest length in the histogram is 12
  std::istringstream lines(hist);
  std::string line;
  std::getline(lines, line);  // header
  std::getline(lines, line);
  CHECK(line.rfind("12,", 0) == 0);

  CHECK(run_cli("loops --n 64 --d 3 --seed 4 --out " + dir.file("rr.csv")) == 0);
  CHECK(run_cli("loops --out " + dir.file("x.csv")) == 2);  // no graph given
}

TEST_CASE("bench: table sorted by objective, brute dominates") {
  TempDir dir;
  REQUIRE(run_cli("gen --n 12 --d 3 --seed 23 --out " + dir.file("inst.json")) == 0);
  CHECK(run_cli("bench --instance " + dir.file("inst.json") +
                " --solvers gtqa,sa,brute --T 4 --dt 0.2 --chi 4 --format csv --out " +
                dir.file("bench.csv")) == 0);
  std::istringstream lines(gtqa::read_text_file(dir.file("bench.csv")));
  std::string header, first_row;
  std::getline(lines, header);
  CHECK(header == "solver,objective");
  std::getline(lines, first_row);
  double previous = 1e300;
  std::string row = first_row;
  int rows = 0;
  do {
    const auto comma = row.find(',');
    REQUIRE(comma != std::string::npos);
    double value = std::stod(row.substr(comma + 1));
    CHECK(value <= previous + 1e-12);
    previous = value;
    ++rows;
  } while (std::getline(lines, row) && !row.empty());
  CHECK(rows == 3);
  // the top row must be the exhaustive optimum
  CHECK((first_row.rfind("brute,", 0) == 0 || first_row.rfind("sa,", 0) == 0));
}
