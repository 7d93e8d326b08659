#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

namespace hierslu {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hierslu");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("hierslu_cli_test_" + std::string(
        ::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  Result synth() {
    return run_cli({"synth", "--domains", "2", "--intents", "2", "--utterances", "4", "--out", path("c.tsv")});
  }

  Result train(const std::string& out, const std::string& aggregator = "avg") {
    return run_cli({"train", "--corpus", path("c.tsv"), "--aggregator", aggregator, "--k-s", "4", "--k-i", "4",
                    "--k-d", "4", "--hidden", "3", "--samples", "2", "--iters", "5", "--lr", "0.01", "--seed",
                    "7", "--out", path(out)});
  }

  fs::path dir_;
};

TEST_F(Cli, SynthTrainEvalExportNeighbors) {
  ASSERT_EQ(synth().code, 0);
  const auto tr = train("m", "maxpool");
  ASSERT_EQ(tr.code, 0) << tr.err;
  for (const auto* f : {"config.json", "parameters.txt", "corpus.tsv", "loss.txt"}) {
    EXPECT_TRUE(fs::exists(dir_ / "m" / f)) << f;
  }
  const auto ev = run_cli({"eval", "--model", path("m"), "--corpus", path("c.tsv"), "--out", path("r.json")});
  ASSERT_EQ(ev.code, 0) << ev.err;
  const auto report = nlohmann::json::parse(ev.out);
  for (const auto* k : {"intra_domain_intent_cosine", "inter_domain_intent_cosine", "margin", "domain_accuracy",
                        "joint_loss"}) {
    EXPECT_TRUE(report.contains(k)) << k;
  }
  EXPECT_EQ(nlohmann::json::parse(slurp(path("r.json"))), report);
  const auto ex = run_cli({"export", "--model", path("m"), "--out", path("s.txt")});
  ASSERT_EQ(ex.code, 0) << ex.err;
  const auto nb = run_cli({"neighbors", "--snapshot", path("s.txt"), "--query", "intent:domain00_intent00",
                           "--k", "3"});
  ASSERT_EQ(nb.code, 0) << nb.err;
  EXPECT_EQ(std::count(nb.out.begin(), nb.out.end(), '\n'), 3);
  EXPECT_EQ(nb.out.rfind("intent:", 0), 0u);
}

TEST_F(Cli, TrainingIsByteIdentical) {
  ASSERT_EQ(synth().code, 0);
  ASSERT_EQ(train("a").code, 0);
  ASSERT_EQ(train("b").code, 0);
  EXPECT_EQ(slurp(dir_ / "a" / "parameters.txt"), slurp(dir_ / "b" / "parameters.txt"));
  EXPECT_EQ(slurp(dir_ / "a" / "loss.txt"), slurp(dir_ / "b" / "loss.txt"));
  const auto ea = run_cli({"export", "--model", path("a"), "--out", path("a.txt")});
  const auto eb = run_cli({"export", "--model", path("b"), "--out", path("b.txt")});
  ASSERT_EQ(ea.code, 0);
  EXPECT_EQ(slurp(path("a.txt")), slurp(path("b.txt")));
}

TEST_F(Cli, BaselineAndEvalRejection) {
  ASSERT_EQ(synth().code, 0);
  const auto bl = run_cli({"baseline", "--variant", "2", "--target", "intent", "--corpus", path("c.tsv"), "--k-s",
                           "4", "--hidden", "3", "--iters", "5", "--out", path("b")});
  ASSERT_EQ(bl.code, 0) << bl.err;
  EXPECT_EQ(run_cli({"export", "--model", path("b"), "--out", path("s.txt")}).code, 0);
  EXPECT_EQ(run_cli({"eval", "--model", path("b"), "--corpus", path("c.tsv")}).code, 1);
  const auto few = run_cli({"baseline", "--variant", "1", "--q", "2", "--corpus", path("c.tsv"), "--k-s", "4",
                            "--hidden", "3", "--iters", "5", "--out", path("b1")});
  EXPECT_EQ(few.code, 2);
}

TEST_F(Cli, NeighborsClampToAvailableEntries) {
  std::ofstream(path("s.txt")) << "intent:a 1 0\nintent:b 0.5 0.5\n";
  const auto r = run_cli({"neighbors", "--snapshot", path("s.txt"), "--query", "intent:a", "--k", "3"});
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "intent:b 0.70710678118654746\n");
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"train", "--bogus"}).code, 1);
  EXPECT_EQ(run_cli({"train", "--corpus", path("absent.tsv"), "--out", path("m")}).code, 2);
  std::ofstream(path("bad.tsv")) << "only two\tfields\n";
  EXPECT_EQ(run_cli({"train", "--corpus", path("bad.tsv"), "--out", path("m")}).code, 2);
  ASSERT_EQ(synth().code, 0);
  EXPECT_EQ(run_cli({"train", "--corpus", path("c.tsv"), "--aggregator", "median", "--out", path("m")}).code, 1);
  EXPECT_EQ(run_cli({"neighbors", "--snapshot", path("absent.txt"), "--query", "intent:a"}).code, 2);
}

TEST_F(Cli, GradcheckPasses) {
  const auto r = run_cli({"gradcheck"});
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(std::count(r.out.begin(), r.out.end(), '\n'), 7);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

}  // namespace
}  // namespace hierslu
