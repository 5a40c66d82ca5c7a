// Drives the built `medie` binary end to end.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path kData = MEDIE_TEST_DATA;

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("medie_cli_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// `env` is prepended verbatim, e.g. "MEDIE_SEED=3".
Result run(const std::string& args, const std::string& env = "") {
  const fs::path err = scratch() / "stderr.txt";
  const std::string cmd = (env.empty() ? "" : "env " + env + " ") + "'" + MEDIE_CLI + "' " + args + " 2>'" +
                          err.string() + "'";
  Result r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err);
  return r;
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

// Every regular file under `dir`, relative path -> bytes, minus run.json.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().filename() != "run.json") {
      out[fs::relative(e.path(), dir).string()] = slurp(e.path());
    }
  }
  return out;
}

nlohmann::json manifest_without_time(const fs::path& p) {
  auto j = nlohmann::json::parse(slurp(p));
  j.erase("started_at");
  j.erase("wall_clock_seconds");
  return j;
}

}  // namespace

TEST_CASE("version and usage errors") {
  auto r = run("--version");
  CHECK(r.code == 0);
  CHECK(r.out.rfind("medie ", 0) == 0);
  CHECK(run("").code == 2);
  CHECK(run("frobnicate").code == 2);
  CHECK(run("validate").code == 2);  // --corpus is required
  CHECK(run("validate --corpus x --bogus").code == 2);
  CHECK(run("score --gold a --pred b --task event").code == 2);
  r = run("validate --corpus " + q(scratch() / "missing"));
  CHECK(r.code == 2);
  CHECK(r.err.find("medie validate: error:") == 0);
  CHECK(run("--help").code == 0);
}

TEST_CASE("validate the worked example") {
  const auto r = run("--strict validate --corpus " + q(kData / "respiratory"));
  CHECK(r.code == 0);
  CHECK(r.out == "1 documents, 0 violations in 0 documents\n");
}

TEST_CASE("violations: report, then strict failure") {
  const fs::path dir = scratch() / "bad";
  fs::create_directories(dir);
  std::ofstream(dir / "d1.txt") << "白细胞计数正常";
  std::ofstream(dir / "d1.ann") << "T1\tTest-Result 0 7\t白细胞计数正常\nA1\tNegation T1\n";

  auto r = run("validate --corpus " + q(dir) + " --report " + q(scratch() / "bad.jsonl"));
  CHECK(r.code == 0);
  CHECK(r.out.find("d1\t") == 0);
  CHECK(r.out.find("1 documents, 1 violations in 1 documents") != std::string::npos);
  CHECK(fs::exists(scratch() / "bad.jsonl"));
  CHECK(fs::exists(scratch() / "bad.jsonl.run.json"));

  CHECK(run("validate --strict --corpus " + q(dir)).code == 1);
  CHECK(run("validate --corpus " + q(dir), "MEDIE_STRICT=1").code == 1);
  // Strict ingestion in other commands too.
  CHECK(run("--strict convert --in " + q(dir) + " --out " + q(scratch() / "bad_conv")).code == 1);
  CHECK(run("convert --in " + q(dir) + " --out " + q(scratch() / "bad_conv")).code == 0);
}

TEST_CASE("score prints strict micro scores") {
  const fs::path d = kData / "score_4_5_3";
  auto r = run("score --gold " + q(d / "gold") + " --pred " + q(d / "pred") + " --task entity");
  CHECK(r.code == 0);
  CHECK(r.out == "entity    P=0.6000 R=0.7500 F1=0.6667  (gold 4, pred 5, correct 3)\n");

  const fs::path report = scratch() / "score.jsonl";
  r = run("score --gold " + q(d / "gold") + " --pred " + q(d / "pred") + " --types --out " + q(report));
  CHECK(r.code == 0);
  CHECK(r.out.find("Self-Reported Abnormality") != std::string::npos);
  CHECK(r.out.find("relation  P=0.0000") != std::string::npos);
  std::istringstream lines(slurp(report));
  std::string first;
  std::getline(lines, first);
  const auto j = nlohmann::json::parse(first);
  CHECK(j["task"] == "entity");
  CHECK(j["correct"] == 3);
  const auto m = nlohmann::json::parse(slurp(report.string() + ".run.json"));
  CHECK(m["command"] == "score");
  CHECK(m["tool"] == "medie");

  // Swapping roles swaps P and R.
  r = run("score --gold " + q(d / "pred") + " --pred " + q(d / "gold") + " --task entity");
  CHECK(r.out.find("P=0.7500 R=0.6000 F1=0.6667") != std::string::npos);
}

TEST_CASE("agreement of identical annotations") {
  const auto r = run("iaa --a " + q(kData / "respiratory") + " --b " + q(kData / "respiratory"));
  CHECK(r.code == 0);
  CHECK(r.out.find("entity    P=1.0000 R=1.0000 F1=1.0000") != std::string::npos);
  CHECK(r.out.find("relation  P=1.0000 R=1.0000 F1=1.0000") != std::string::npos);
  CHECK(r.out.find("attribute P=1.0000 R=1.0000 F1=1.0000") != std::string::npos);
  CHECK(run("iaa --a " + q(kData / "respiratory") + " --b " + q(kData / "score_4_5_3" / "gold")).code == 2);
}

TEST_CASE("generation is reproducible across seeds sources and job counts") {
  const fs::path a = scratch() / "gen_a", b = scratch() / "gen_b", c = scratch() / "gen_c", d = scratch() / "gen_d";
  REQUIRE(run("generate --records 12 --seed 5 --jobs 1 --out " + q(a)).code == 0);
  REQUIRE(run("--seed 5 --jobs 3 generate --records 12 --out " + q(b)).code == 0);
  REQUIRE(run("generate --records 12 --out " + q(c), "MEDIE_SEED=5 MEDIE_JOBS=2").code == 0);
  REQUIRE(run("generate --records 12 --seed 6 --out " + q(d), "MEDIE_SEED=5").code == 0);
  CHECK(tree(a) == tree(b));
  CHECK(tree(a) == tree(c));
  CHECK(tree(a) != tree(d));  // the flag beats the environment
  CHECK(fs::exists(a / "manifest.jsonl"));

  const auto ma = manifest_without_time(a / "run.json"), mb = manifest_without_time(b / "run.json");
  CHECK(ma["seed"] == 5);
  CHECK(ma["command"] == "generate");
  CHECK(ma.contains("options"));
  auto jobs_free = [](nlohmann::json m) {
    m["options"].erase("jobs");
    m["options"].erase("out");
    m["outputs"] = nlohmann::json::array();
    return m;
  };
  CHECK(jobs_free(ma) == jobs_free(mb));
  CHECK(run("--strict validate --corpus " + q(a)).code == 0);
}

TEST_CASE("split, convert and encode") {
  const fs::path gen = scratch() / "sce_gen", split = scratch() / "sce_split", so = scratch() / "sce_standoff",
                 back = scratch() / "sce_back";
  REQUIRE(run("generate --records 10 --seed 1 --out " + q(gen)).code == 0);
  auto r = run("split --corpus " + q(gen) + " --counts 6,2,2 --out " + q(split));
  CHECK(r.code == 0);
  CHECK(r.out.find("6/2/2") != std::string::npos);
  CHECK(run("split --corpus " + q(gen) + " --counts 9,2,2 --out " + q(scratch() / "sce_x")).code == 2);

  CHECK(run("convert --in " + q(split) + " --to standoff --out " + q(so)).code == 0);
  CHECK(run("convert --in " + q(so) + " --to internal --out " + q(back)).code == 0);
  r = run("iaa --a " + q(split) + " --b " + q(so));
  CHECK(r.out.find("F1=1.0000  (gold") != std::string::npos);

  const fs::path bio = scratch() / "train.bio";
  r = run("encode --corpus " + q(split) + " --split train --out " + q(bio));
  CHECK(r.code == 0);
  const auto text = slurp(bio);
  CHECK(text.find("\tB-") != std::string::npos);
  CHECK(fs::exists(bio.string() + ".run.json"));
  CHECK(run("encode --corpus " + q(gen) + " --split train --out " + q(bio)).code == 2);  // no splits yet
}

TEST_CASE("sampling") {
  const fs::path gen = scratch() / "smp_gen";
  REQUIRE(run("generate --records 30 --seed 2 --out " + q(gen)).code == 0);
  const fs::path ids = scratch() / "ids.txt";
  auto r = run("sample --corpus " + q(gen) + " --default-quota 2 --out " + q(ids));
  CHECK(r.code == 0);
  std::istringstream in(slurp(ids));
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) n += !line.empty();
  CHECK(n > 0);
  CHECK(r.out.find("selected " + std::to_string(n) + " of 30 records") != std::string::npos);
  CHECK(run("sample --corpus " + q(gen) + " --cap 0 --default-quota 2 --out " + q(ids)).code == 2);
}

TEST_CASE("cleanup") { fs::remove_all(scratch()); }
