#include <gtest/gtest.h>
#include <json.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

const char* cli() { return ORDMIX_CLI; }

const std::string kFast = " --max-iter 3 --gibbs-burn-in 10 --gibbs-samples 20 --prob-points 64";

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ordmix_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const std::string& args) const {
    const std::string cmd = std::string("\"") + cli() + "\" " + args + " > \"" + path("stdout.txt") + "\" 2> \"" + path("stderr.txt") + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string stdout_text() const { return slurp(path("stdout.txt")); }

  static std::string slurp(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  void simulate(const std::string& out, int n, int scenario = 1, int seed = 7) const {
    ASSERT_EQ(run("simulate --scenario " + std::to_string(scenario) + " --n " + std::to_string(n) + " --seed " +
                  std::to_string(seed) + " --out \"" + path(out) + "\""),
              0);
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, HelpAndUsageErrors) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_EQ(run("fit --help"), 0);
  EXPECT_EQ(run("no-such-command"), 2);
  EXPECT_EQ(run("fit"), 2);
  EXPECT_EQ(run("simulate --scenario 4 --out x"), 2);
  EXPECT_EQ(run("fit --data \"" + path("absent.csv") + "\" --k 2 --seed 1"), 2);
}

TEST_F(CliTest, SimulateIsByteReproducible) {
  simulate("a", 300, 3);
  simulate("b", 300, 3);
  for (const char* f : {"data.csv", "truth.csv", "scenario.json"})
    EXPECT_EQ(slurp(path(std::string("a/") + f)), slurp(path(std::string("b/") + f))) << f;
  std::ifstream truth(path("a/truth.csv"));
  std::string line;
  std::getline(truth, line);
  int noisy = 0, rows = 0;
  while (std::getline(truth, line)) {
    ++rows;
    noisy += line.back() == '1' ? 1 : 0;
  }
  EXPECT_EQ(rows, 300);
  EXPECT_EQ(noisy, 60);
}

TEST_F(CliTest, FitSingleClusterLabelsAllOne) {
  simulate("d", 40);
  ASSERT_EQ(run("fit --data \"" + path("d/data.csv") + "\" --k 1 --seed 3 --out \"" + path("fit") + "\"" + kFast), 0);
  const auto summary = nlohmann::json::parse(stdout_text());
  EXPECT_EQ(summary.at("k").get<int>(), 1);
  EXPECT_EQ(summary.at("n_units").get<int>(), 40);
  std::ifstream labels(path("fit/labels.csv"));
  std::string line;
  std::getline(labels, line);
  int rows = 0;
  while (std::getline(labels, line)) {
    ++rows;
    EXPECT_EQ(line.substr(line.find(',') + 1), "1");
  }
  EXPECT_EQ(rows, 40);
  EXPECT_TRUE(fs::exists(path("fit/model.json")));
  EXPECT_TRUE(fs::exists(path("fit/tau.csv")));
}

TEST_F(CliTest, SelectKRangeAndMethodValidation) {
  simulate("d", 20);
  EXPECT_EQ(run("select-k --data \"" + path("d/data.csv") + "\" --k-min 3 --k-max 2 --seed 1"), 2);
  EXPECT_EQ(run("compare --data \"" + path("d/data.csv") + "\" --k 2 --methods mom,kmeans --seed 1"), 2);
  ASSERT_EQ(run("select-k --data \"" + path("d/data.csv") + "\" --k-min 1 --k-max 2 --seed 1 --out \"" + path("bic.csv") + "\"" + kFast), 0);
  const std::string table = slurp(path("bic.csv"));
  EXPECT_EQ(table.rfind("k,n_params,loglik,bic,converged,failed,best\n", 0), 0u) << table;
}

TEST_F(CliTest, EvalAgainstItself) {
  simulate("d", 50, 2);
  ASSERT_EQ(run("eval --labels \"" + path("d/truth.csv") + "\" --truth \"" + path("d/truth.csv") + "\" --model \"" +
                path("d/scenario.json") + "\" --true-model \"" + path("d/scenario.json") + "\""),
            0);
  const auto j = nlohmann::json::parse(stdout_text());
  EXPECT_DOUBLE_EQ(j.at("ari_all").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j.at("ari_non_noisy").get<double>(), 1.0);
  EXPECT_DOUBLE_EQ(j.at("mape").at("mean").get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(j.at("mape").at("phi_diag").get<double>(), 0.0);
  EXPECT_DOUBLE_EQ(j.at("mape").at("sigma_diag").get<double>(), 0.0);
}

TEST_F(CliTest, FitIsByteIdenticalAcrossThreadCounts) {
  simulate("d", 40);
  const std::string base = "fit --data \"" + path("d/data.csv") + "\" --k 2 --seed 11" + kFast;
  ASSERT_EQ(run(base + " --threads 1 --out \"" + path("t1") + "\""), 0);
  ASSERT_EQ(run(base + " --threads 4 --out \"" + path("t4") + "\""), 0);
  for (const char* f : {"model.json", "labels.csv", "tau.csv"})
    EXPECT_EQ(slurp(path(std::string("t1/") + f)), slurp(path(std::string("t4/") + f))) << f;
}

TEST_F(CliTest, CompareWritesOneRowPerMethod) {
  simulate("d", 40);
  ASSERT_EQ(run("compare --data \"" + path("d/data.csv") + "\" --k 2 --seed 2 --truth \"" + path("d/truth.csv") +
                "\" --true-model \"" + path("d/scenario.json") + "\" --out \"" + path("cmp.csv") + "\"" + kFast),
            0);
  std::ifstream in(path("cmp.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "method,k,loglik,bic,n_iter,converged,ari,ari_non_noisy,mape_mean,mape_phi_diag,mape_sigma_diag,runtime_s");
  std::vector<std::string> methods;
  while (std::getline(in, line)) {
    methods.push_back(line.substr(0, line.find(',')));
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "NA");
  }
  EXPECT_EQ(methods, (std::vector<std::string>{"mom", "mmn", "gmm"}));
}
