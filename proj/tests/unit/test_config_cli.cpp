// Copyright 2026 The tritrace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tritrace/config.hpp"
#include "tritrace/io.hpp"

#ifndef TRITRACE_CLI_PATH
#error "TRITRACE_CLI_PATH must name the CLI binary"
#endif

namespace tritrace {
namespace {

namespace fs = std::filesystem;

TEST(ConfigParse, SectionsCommentsAndTopLevelKeys) {
  const auto v = parse_config_text(
      "# experiment\n"
      "command = clt\n"
      "n = 100   # inline comment\n"
      "[ensemble]\n"
      "model = hatano_nelson\n"
      "[laws]\n"
      "d = uniform(-1, 1)\n");
  EXPECT_EQ(v.at("run.command").value, "clt");
  EXPECT_EQ(v.at("run.n").value, "100");
  EXPECT_EQ(v.at("run.n").line, 3);
  EXPECT_EQ(v.at("laws.d").value, "uniform(-1, 1)");
}

int parse_error_line(const std::string& text) {
  try {
    resolve_config(parse_config_text(text));
  } catch (const ParseError& e) {
    return e.line();
  }
  return -1;
}

TEST(ConfigParse, ErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line(""), 1);
  EXPECT_EQ(parse_error_line("# only a comment\n\n"), 2);
  EXPECT_EQ(parse_error_line("command = types\nk = 3\nbogus = 1\n"), 3);
  EXPECT_EQ(parse_error_line("command = types\n[nowhere]\n"), 2);
  EXPECT_EQ(parse_error_line("command = types\nk = 3\nk = 4\n"), 3);
  EXPECT_EQ(parse_error_line("command = types\njust text\n"), 2);
  EXPECT_EQ(parse_error_line("command = clt\nn = 10\nk = 1\ntrials = many\n"), 4);
  EXPECT_EQ(parse_error_line("command = clt\nn = 10\nk = 1\n[laws]\nd = cauchy(0,1)\n"), 5);
  EXPECT_EQ(parse_error_line("command = dance\n"), 1);
}

TEST(ConfigResolve, DefaultsAndOverrides) {
  auto v = parse_config_text("command = clt\nn = 100\nk_list = 1,2\ntrials = 50\n");
  auto c = resolve_config(v);
  EXPECT_EQ(c.master_seed, kDefaultSeed);
  EXPECT_EQ(c.master_seed, 0x5EEDu);
  EXPECT_EQ(c.k_list, (std::vector<int>{1, 2}));
  EXPECT_EQ(c.ensemble.model, Model::kAnderson);
  EXPECT_EQ(c.alpha, 0.0);
  set_override(v, "run.n", "200");
  set_override(v, "run.master_seed", "0x10");
  set_override(v, "ensemble.model", "beta_hermite");
  c = resolve_config(v);
  EXPECT_EQ(c.n, 200u);
  EXPECT_EQ(c.master_seed, 16u);
  EXPECT_EQ(c.alpha, 0.5);
  EXPECT_EQ(c.epsilon, 0.5);
  EXPECT_THROW(set_override(v, "run.colour", "red"), InvalidArgument);
}

TEST(ConfigResolve, WorkersFallBackToEnvironment) {
  const auto v = parse_config_text("command = types\nk = 2\n");
  ::setenv("TRITRACE_WORKERS", "3", 1);
  EXPECT_EQ(resolve_config(v).workers, 3u);
  ::setenv("TRITRACE_WORKERS", "auto", 1);
  EXPECT_EQ(resolve_config(v).workers, 0u);
  ::unsetenv("TRITRACE_WORKERS");
  auto w = v;
  set_override(w, "run.workers", "8");
  EXPECT_EQ(resolve_config(w).workers, 8u);
  set_override(w, "run.workers", "zero");
  EXPECT_THROW(resolve_config(w), InvalidArgument);
}

TEST(ConfigResolve, CommandRequirements) {
  EXPECT_THROW(resolve_config(parse_config_text("command = clt\nk = 1\n")), InvalidArgument);
  EXPECT_THROW(resolve_config(parse_config_text("command = types\n")), InvalidArgument);
  EXPECT_THROW(resolve_config(parse_config_text("command = mdp\nk_list = 1,2\nn = 10\n")),
               InvalidArgument);
  EXPECT_THROW(resolve_config(parse_config_text("command = cramer\n")), InvalidArgument);
  EXPECT_THROW(resolve_config(parse_config_text("command = types\nk = 17\n")), InvalidArgument);
  EXPECT_NO_THROW(resolve_config(parse_config_text("command = types\nk = 17\nk_max = 17\n")));
}

TEST(Io, MatrixCsvRoundTrip) {
  const TridiagonalMatrix q({0.1, -2.5}, {1.0, 1e-300, 3.25}, {7.0, 0.3333333333333333});
  std::istringstream in(matrix_csv(q));
  const auto back = read_matrix_csv(in);
  EXPECT_TRUE(std::equal(q.sub().begin(), q.sub().end(), back.sub().begin()));
  EXPECT_TRUE(std::equal(q.diag().begin(), q.diag().end(), back.diag().begin()));
  EXPECT_TRUE(std::equal(q.sup().begin(), q.sup().end(), back.sup().begin()));
  std::istringstream bad("sub,diag,sup\n1,2,3\n");
  EXPECT_THROW(read_matrix_csv(bad), ParseError);
}

TEST(Io, TypeTableRoundTrip) {
  std::ostringstream out;
  write_type_table(out, enumerate_types(6));
  std::istringstream in(out.str());
  EXPECT_EQ(read_type_table(in), enumerate_types(6));
  std::istringstream broken("{\"k\":1,\"l\":0,\"m\":[],\"n\":[1],\"count\":1}\n{oops}\n");
  try {
    read_type_table(broken);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2);
  }
}

// ------------------------------------------------------------------ CLI

struct CliResult {
  int status;
  std::string out;
  std::string err;
};

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("tritrace_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  CliResult run(const std::string& args) {
    const auto out = dir_ / "stdout.txt";
    const auto err = dir_ / "stderr.txt";
    const std::string command = std::string(TRITRACE_CLI_PATH) + " " + args + " > " +
                                out.string() + " 2> " + err.string();
    const int raw = std::system(command.c_str());
    return {WEXITSTATUS(raw), slurp(out), slurp(err)};
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  std::string write(const std::string& name, const std::string& content) {
    const auto p = dir_ / name;
    std::ofstream(p) << content;
    return p.string();
  }

  fs::path dir_;
};

TEST_F(Cli, TypesTable) {
  const auto r = run("types --k 4");
  EXPECT_EQ(r.status, 0);
  std::istringstream in(r.out);
  std::string line;
  std::vector<std::string> counts;
  std::getline(in, line);  // header
  while (std::getline(in, line)) counts.push_back(line.substr(line.rfind('\t') + 1));
  EXPECT_EQ(counts, (std::vector<std::string>{"1", "4", "4", "4", "2", "4"}));
}

TEST_F(Cli, TraceBothPathsAgree) {
  const auto r = run("trace --ensemble anderson --n 64 --k 6 --seed 7");
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("k=6 expansion="), std::string::npos);
  const auto rel = r.out.find("relative=");
  ASSERT_NE(rel, std::string::npos);
  EXPECT_LE(std::stod(r.out.substr(rel + 9)), 1e-9);
}

TEST_F(Cli, EmptyConfigIsAParseError) {
  const auto r = run("run --config " + write("empty.ini", ""));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("line 1"), std::string::npos);
}

TEST_F(Cli, MalformedConfigReportsLine) {
  const auto r = run("run --config " + write("bad.ini", "command = types\nk = 3\n[laws]\nq = 1\n"));
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("line 4"), std::string::npos) << r.err;
}

TEST_F(Cli, DumpSampleFeedsTrace) {
  const auto matrix = (dir_ / "q.csv").string();
  ASSERT_EQ(run("dump-sample --ensemble hatano_nelson --n 20 --seed 3 --output " + matrix).status, 0);
  const auto r = run("trace --input " + matrix + " --k-list 1,2,5");
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("k=5"), std::string::npos);
}

TEST_F(Cli, CltOutputIndependentOfWorkers) {
  const auto config = write("clt.ini",
                            "command = clt\nn = 200\nk_list = 1,3\ntrials = 3000\n"
                            "master_seed = 11\nformat = json\n[stats]\nreplicas = 20000\n");
  const auto one = (dir_ / "one.json").string();
  const auto eight = (dir_ / "eight.json").string();
  const auto r1 = run("run --config " + config + " --workers 1 --output " + one);
  const auto r8 = run("run --config " + config + " --workers 8 --output " + eight);
  EXPECT_NE(r1.status, 1) << r1.err;
  EXPECT_EQ(r1.status, r8.status);
  const auto a = slurp(one);
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, slurp(eight));
  EXPECT_NE(a.find("\"tritrace_version\""), std::string::npos);
  EXPECT_NE(a.find("\"master_seed\": 11"), std::string::npos);
}

TEST_F(Cli, CltRejectsWrongTarget) {
  // D_1 = Var(d) = 1/3, but the beta-Hermite table at beta = 2 says 1.
  const auto r = run("clt --n 500 --k 1 --trials 2000 --law-d 'uniform(-1,1)' "
                     "--target beta_hermite --beta 2");
  EXPECT_EQ(r.status, 2) << r.out << r.err;
}

TEST_F(Cli, DegenerateTargetIsAnError) {
  const auto r = run("clt --n 100 --k 2 --trials 200 --replicas 1000");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("degenerate"), std::string::npos);
}

TEST_F(Cli, CramerCsv) {
  const auto r = run("cramer --law rademacher --x-grid 0,0.5");
  EXPECT_EQ(r.status, 0);
  EXPECT_NE(r.out.find("# tritrace"), std::string::npos);
  EXPECT_NE(r.out.find("0.5,0.1308"), std::string::npos) << r.out;
}

TEST_F(Cli, MdpCsv) {
  const auto out = (dir_ / "mdp.csv").string();
  const auto r = run("mdp --k 1 --n-list 16,64 --delta-list 1 --trials 20000 --format csv --output " + out);
  EXPECT_NE(r.status, 1) << r.err;
  const auto text = slurp(out);
  EXPECT_NE(text.find("n,nu,delta,tail_prob,empirical_rate,predicted_rate,trials,flags"),
            std::string::npos);
}

TEST_F(Cli, TypeCacheRoundTrip) {
  const auto cache = (dir_ / "cache").string();
  EXPECT_EQ(run("types --k 5 --type-cache " + cache).status, 0);
  EXPECT_TRUE(fs::exists(dir_ / "cache" / "types_k5.jsonl"));
  const auto again = run("types --k 5 --type-cache " + cache);
  EXPECT_EQ(again.status, 0);
  EXPECT_EQ(again.out, run("types --k 5").out);
}

TEST_F(Cli, UnknownFlagIsAnError) {
  EXPECT_EQ(run("types --k 4 --colour red").status, 1);
  EXPECT_EQ(run("").status, 1);
}

}  // namespace
}  // namespace tritrace
