#include <gtest/gtest.h>

#include "jointlmr/cli.hpp"
#include "jointlmr/io.hpp"
#include "jointlmr/synth.hpp"
#include "test_support.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

using namespace jointlmr;
using jointlmr::test::bitwise_equal;
using jointlmr::test::random_matrix;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

std::map<std::string, std::string> parse_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

nlohmann::json read_json(const fs::path& p) {
  std::ifstream in(p);
  return nlohmann::json::parse(in);
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("jointlmr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
  }

  std::string p(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, JointOnZeroInputs) {
  io::write_rdm(p("zi.rdm"), DenseMatrix::Zero(4, 4));
  io::write_rdm(p("zt.rdm"), DenseMatrix::Zero(4, 4));
  const Result r = run({"joint", "--input-i", p("zi.rdm"), "--input-t", p("zt.rdm"), "--out-dir", p("out")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kv = parse_kv(r.out);
  EXPECT_EQ(kv.at("converged"), "true");
  EXPECT_EQ(kv.at("iterations"), "1");
  for (const char* name : {"L.rdm", "S_I.rdm", "S_T.rdm"}) {
    EXPECT_TRUE(io::read_rdm(dir_ / "out" / name).isZero(0.0)) << name;
  }
  EXPECT_EQ(read_text(dir_ / "out" / "residuals.csv"), "iteration,r_I,r_T\n1,0,0\n");
}

TEST_F(CliTest, ManifestEchoesPublishedDefaults) {
  io::write_rdm(p("i.rdm"), random_matrix(6, 5, 1));
  io::write_rdm(p("t.rdm"), random_matrix(6, 5, 2));
  ASSERT_EQ(run({"joint", "--input-i", p("i.rdm"), "--input-t", p("t.rdm"), "--out-dir", p("out"),
                 "--max-iters", "20"})
                .code,
            0);
  const auto m = read_json(dir_ / "out" / "manifest.json");
  EXPECT_EQ(m["config"]["lambda"], 1.0);
  EXPECT_EQ(m["config"]["mu"], 10.0);
  EXPECT_EQ(m["config"]["max_iters"], 20);
  EXPECT_EQ(m["config"]["epsilon"], 1e-7);
  EXPECT_EQ(m["format_version"], cli::kManifestVersion);
  EXPECT_EQ(m["inputs"]["i"]["sha256"], io::sha256_file(p("i.rdm")));
  EXPECT_EQ(m["inputs"]["align"], "none");
  EXPECT_TRUE(m.contains("timing"));

  // Without the override, K is the published 3000.
  ASSERT_EQ(run({"joint", "--input-i", p("i.rdm"), "--input-t", p("t.rdm"), "--out-dir", p("out2")}).code, 0);
  EXPECT_EQ(read_json(dir_ / "out2" / "manifest.json")["config"]["max_iters"], 3000);
}

TEST_F(CliTest, ConfigFilePrecedence) {
  io::write_rdm(p("i.rdm"), random_matrix(6, 5, 1));
  std::ofstream(p("cfg.json")) << R"({"lambda": 0.5, "mu": 4, "max_iters": 7})";
  ASSERT_EQ(run({"joint", "--input-i", p("i.rdm"), "--input-t", p("i.rdm"), "--out-dir", p("out"),
                 "--config", p("cfg.json"), "--mu", "6"})
                .code,
            0);
  const auto m = read_json(dir_ / "out" / "manifest.json");
  EXPECT_EQ(m["config"]["lambda"], 0.5);  // from file
  EXPECT_EQ(m["config"]["mu"], 6.0);      // flag wins
  EXPECT_EQ(m["config"]["max_iters"], 7);
  EXPECT_EQ(m["config"]["epsilon"], 1e-7);  // default

  std::ofstream(p("bad.json")) << R"({"rho": 1})";
  EXPECT_EQ(run({"joint", "--input-i", p("i.rdm"), "--input-t", p("i.rdm"), "--out-dir", p("o3"),
                 "--config", p("bad.json")})
                .code,
            cli::kValidation);
}

TEST_F(CliTest, DecomposeMatchesJointOnDuplicatedInputBitwise) {
  io::write_rdm(p("x.rdm"), random_matrix(10, 12, 3, 2.0));
  ASSERT_EQ(run({"decompose", "--input", p("x.rdm"), "--out-dir", p("d"), "--svt-tau", "0.05",
                 "--mu", "10", "--max-iters", "300", "--lambda", "0.4"})
                .code,
            0);
  ASSERT_EQ(run({"joint", "--input-i", p("x.rdm"), "--input-t", p("x.rdm"), "--out-dir", p("j"),
                 "--mu", "10", "--max-iters", "300", "--lambda", "0.4"})
                .code,
            0);
  EXPECT_EQ(read_text(dir_ / "d" / "L.rdm"), read_text(dir_ / "j" / "L.rdm"));
  EXPECT_EQ(read_text(dir_ / "d" / "S.rdm"), read_text(dir_ / "j" / "S_I.rdm"));
  EXPECT_EQ(read_json(dir_ / "d" / "manifest.json")["config"]["svt_tau"], 0.05);
}

TEST_F(CliTest, DecomposeDefaultsAndErrors) {
  io::write_rdm(p("z.rdm"), DenseMatrix::Zero(3, 3));
  const Result ok = run({"decompose", "--input", p("z.rdm"), "--out-dir", p("d")});
  ASSERT_EQ(ok.code, 0);
  EXPECT_TRUE(io::read_rdm(dir_ / "d" / "L.rdm").isZero(0.0));
  EXPECT_TRUE(io::read_rdm(dir_ / "d" / "S.rdm").isZero(0.0));
  EXPECT_EQ(read_json(dir_ / "d" / "manifest.json")["config"]["svt_tau"], 0.1);

  EXPECT_EQ(run({"decompose", "--input", p("missing.rdm"), "--out-dir", p("d2")}).code, cli::kIo);
  EXPECT_EQ(run({"decompose", "--input", p("z.rdm"), "--out-dir", p("d3"), "--svt-tau", "-1"}).code,
            cli::kValidation);
}

TEST_F(CliTest, ExitCodesPartitionErrorClasses) {
  io::write_rdm(p("a.rdm"), random_matrix(4, 4, 1));
  io::write_rdm(p("b.rdm"), random_matrix(4, 3, 2));
  std::ofstream(p("bad.rdm"), std::ios::binary) << "NOPE00000000";

  EXPECT_EQ(run({"joint", "--input-i", p("a.rdm")}).code, cli::kUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(run({"joint", "--input-i", p("a.rdm"), "--input-t", p("a.rdm"), "--out-dir", p("o"),
                 "--bogus"})
                .code,
            cli::kUsage);
  EXPECT_EQ(run({"joint", "--input-i", p("a.rdm"), "--input-t", p("b.rdm"), "--out-dir", p("o")}).code,
            cli::kValidation);
  EXPECT_EQ(run({"joint", "--input-i", p("a.rdm"), "--input-t", p("a.rdm"), "--out-dir", p("o"),
                 "--lambda", "0"})
                .code,
            cli::kValidation);
  EXPECT_EQ(run({"joint", "--input-i", p("missing.rdm"), "--input-t", p("a.rdm"), "--out-dir", p("o")}).code,
            cli::kIo);
  EXPECT_EQ(run({"joint", "--input-i", p("bad.rdm"), "--input-t", p("a.rdm"), "--out-dir", p("o")}).code,
            cli::kIo);
  EXPECT_EQ(run({"--help"}).code, cli::kOk);
}

TEST_F(CliTest, NumericalFailureExitCode) {
  // Opposite near-overflow inputs with a dead-zone wider than any entry:
  // the dual update overflows and the next SVD sees inf.
  io::write_rdm(p("pos.rdm"), DenseMatrix::Constant(2, 2, 1.5e308));
  io::write_rdm(p("neg.rdm"), DenseMatrix::Constant(2, 2, -1.5e308));
  const Result r = run({"joint", "--input-i", p("pos.rdm"), "--input-t", p("neg.rdm"), "--out-dir", p("o"),
                        "--lambda", "1e300", "--mu", "1e-8"});
  EXPECT_EQ(r.code, cli::kNumerical);
  EXPECT_NE(r.err.find("iteration 2"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("2x2"), std::string::npos) << r.err;
}

TEST_F(CliTest, AlignAndCenterOptions) {
  io::write_rdm(p("a.rdm"), random_matrix(6, 3, 1));
  io::write_rdm(p("b.rdm"), random_matrix(4, 3, 2));
  for (const char* mode : {"truncate", "mean-pool"}) {
    const std::string out = p(std::string("o_") + mode);
    ASSERT_EQ(run({"joint", "--input-i", p("a.rdm"), "--input-t", p("b.rdm"), "--out-dir", out,
                   "--align", mode, "--center", "--max-iters", "50"})
                  .code,
              0);
    const auto m = read_json(fs::path(out) / "manifest.json");
    EXPECT_EQ(m["inputs"]["align"], mode);
    EXPECT_EQ(m["inputs"]["center"], true);
    EXPECT_EQ(io::read_rdm(fs::path(out) / "L.rdm").rows(), 4);
  }
}

TEST_F(CliTest, CsvInputsAndOutputs) {
  const DenseMatrix a = random_matrix(5, 4, 7);
  io::write_csv(p("a.csv"), a);
  ASSERT_EQ(run({"joint", "--input-i", p("a.csv"), "--input-t", p("a.csv"), "--out-dir", p("o"),
                 "--format", "csv", "--max-iters", "30"})
                .code,
            0);
  EXPECT_TRUE(fs::exists(dir_ / "o" / "L.csv"));
  EXPECT_EQ(io::read_csv(dir_ / "o" / "S_T.csv").rows(), 5);
}

TEST_F(CliTest, FuseWithoutParamsIsUniform) {
  io::write_rdm(p("l.rdm"), random_matrix(3, 4, 1));
  io::write_rdm(p("si.rdm"), random_matrix(3, 4, 2));
  io::write_rdm(p("st.rdm"), random_matrix(3, 4, 3));
  const Result r = run({"fuse", "--l", p("l.rdm"), "--s-i", p("si.rdm"), "--s-t", p("st.rdm"), "--out", p("r.rdm")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kv = parse_kv(r.out);
  for (const char* k : {"alpha_L", "alpha_I", "alpha_T"}) EXPECT_EQ(std::stod(kv.at(k)), 1.0 / 3.0);
  EXPECT_TRUE(fs::exists(p("r.rdm.manifest.json")));
}

TEST_F(CliTest, FuseEqualComponentsAndRecomposition) {
  const DenseMatrix m = random_matrix(3, 3, 4);
  io::write_rdm(p("m.rdm"), m);
  DenseMatrix params = random_matrix(1, 10, 5);
  io::write_rdm(p("params.rdm"), params);
  Result r = run({"fuse", "--l", p("m.rdm"), "--s-i", p("m.rdm"), "--s-t", p("m.rdm"),
                  "--params", p("params.rdm"), "--out", p("r.rdm")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE((io::read_rdm(p("r.rdm")) - m).cwiseAbs().maxCoeff(), 1e-15);

  const DenseMatrix l = random_matrix(3, 3, 6), si = random_matrix(3, 3, 7), st = random_matrix(3, 3, 8);
  io::write_rdm(p("l.rdm"), l);
  io::write_rdm(p("si.rdm"), si);
  io::write_rdm(p("st.rdm"), st);
  r = run({"fuse", "--l", p("l.rdm"), "--s-i", p("si.rdm"), "--s-t", p("st.rdm"), "--params",
           p("params.rdm"), "--out", p("r2.rdm")});
  ASSERT_EQ(r.code, 0);
  const auto kv = parse_kv(r.out);
  const double al = std::stod(kv.at("alpha_L")), ai = std::stod(kv.at("alpha_I")), at = std::stod(kv.at("alpha_T"));
  const DenseMatrix recomposed = al * l + ai * si + at * st;
  EXPECT_LE((io::read_rdm(p("r2.rdm")) - recomposed).cwiseAbs().maxCoeff(), 1e-12);

  io::write_rdm(p("short.rdm"), random_matrix(1, 9, 9));
  EXPECT_EQ(run({"fuse", "--l", p("l.rdm"), "--s-i", p("si.rdm"), "--s-t", p("st.rdm"), "--params",
                 p("short.rdm"), "--out", p("r3.rdm")})
                .code,
            cli::kValidation);
}

TEST_F(CliTest, GenerateIsDeterministic) {
  const std::vector<std::string> base{"generate", "--seed", "42", "--rows", "16", "--cols", "12",
                                      "--rank", "3", "--density", "0.1"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out-dir", p("g1")});
  b.insert(b.end(), {"--out-dir", p("g2")});
  ASSERT_EQ(run(a).code, 0);
  ASSERT_EQ(run(b).code, 0);
  for (const char* f : {"I.rdm", "T.rdm", "truth/L.rdm", "truth/S_I.rdm", "truth/S_T.rdm", "metadata.json"}) {
    EXPECT_EQ(io::sha256_file(dir_ / "g1" / f), io::sha256_file(dir_ / "g2" / f)) << f;
  }
  const auto meta = read_json(dir_ / "g1" / "metadata.json");
  EXPECT_EQ(meta["generator"], std::string(kGeneratorId));
  EXPECT_EQ(meta["spec"]["seed"], 42);

  EXPECT_EQ(run({"generate", "--rank", "99", "--out-dir", p("g3")}).code, cli::kValidation);
}

TEST_F(CliTest, EvalTruthAgainstItself) {
  ASSERT_EQ(run({"generate", "--rows", "12", "--cols", "10", "--rank", "2", "--out-dir", p("g")}).code, 0);
  const Result r = run({"eval", "--estimate", p("g/truth"), "--truth", p("g/truth")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto kv = parse_kv(r.out);
  EXPECT_EQ(std::stod(kv.at("rel_err_L")), 0.0);
  EXPECT_EQ(std::stod(kv.at("rel_err_S_I")), 0.0);
  EXPECT_EQ(std::stod(kv.at("support_f1")), 1.0);
  EXPECT_EQ(run({"eval", "--estimate", p("nowhere"), "--truth", p("g/truth")}).code, cli::kIo);
}

TEST_F(CliTest, SweepWritesCheckpointRows) {
  ASSERT_EQ(run({"generate", "--rows", "20", "--cols", "16", "--rank", "2", "--out-dir", p("g")}).code, 0);
  const Result r = run({"sweep", "--input-i", p("g/I.rdm"), "--input-t", p("g/T.rdm"), "--out-dir", p("s"),
                        "--checkpoints", "5,20,10", "--truth", p("g/truth"), "--lambda", "0.25"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::ifstream in(dir_ / "s" / "sweep.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("checkpoint,iterations_run,r_I,r_T,max_residual,rel_err_L", 0), 0u);
  std::vector<int> cps;
  while (std::getline(in, line)) cps.push_back(std::stoi(line.substr(0, line.find(','))));
  EXPECT_EQ(cps, (std::vector<int>{5, 10, 20}));
  EXPECT_EQ(read_json(dir_ / "s" / "manifest.json")["config"]["max_iters"], 20);
}
