#include "ordmix/io.hpp"
#include "ordmix/mom.hpp"
#include "ordmix/simulate.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace ordmix;
namespace fs = std::filesystem;

namespace {

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("ordmix_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  fs::path dir_;
};

bool same(const OrdinalDataset& a, const OrdinalDataset& b) {
  if (a.levels != b.levels || a.unit_ids != b.unit_ids || a.units.size() != b.units.size()) return false;
  for (std::size_t i = 0; i < a.units.size(); ++i)
    if (a.units[i] != b.units[i]) return false;
  return true;
}

std::string message_of(const std::string& p) {
  try {
    read_dataset(p);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_F(IoTest, LongRoundTrip) {
  const OrdinalDataset ds = generate(benchmark_scenario(30, 0.1, 1)).dataset;
  write_dataset_long(ds, path("long.csv"));
  EXPECT_TRUE(same(read_dataset(path("long.csv")), ds));
}

TEST_F(IoTest, WideRoundTrip) {
  const OrdinalDataset ds = generate(benchmark_scenario(30, 0.1, 2)).dataset;
  write_dataset_wide(ds, path("wide.csv"));
  EXPECT_TRUE(same(read_dataset(path("wide.csv")), ds));
}

TEST_F(IoTest, LongRowsInAnyOrder) {
  const std::string p = write("d.csv",
                              "# levels: v1=3,v2=2\nunit,variable,time,level\n"
                              "b,2,1,2\na,1,1,3\nb,1,1,1\na,2,1,1\n");
  const OrdinalDataset ds = read_dataset(p);
  ASSERT_EQ(ds.n_units(), 2u);
  EXPECT_EQ(ds.unit_ids, (std::vector<std::string>{"b", "a"}));
  EXPECT_EQ(ds.units[0](0, 0), 1);
  EXPECT_EQ(ds.units[0](1, 0), 2);
  EXPECT_EQ(ds.units[1](0, 0), 3);
}

TEST_F(IoTest, LevelsSuppliedSeparately) {
  const std::string p = write("d.csv", "unit,v1_t1,v2_t1\nu,2,1\n");
  const OrdinalDataset ds = read_dataset(p, std::vector<int>{2, 2});
  EXPECT_EQ(ds.levels, (std::vector<int>{2, 2}));
}

TEST_F(IoTest, MissingLevelsNameTheVariable) {
  const std::string msg = message_of(write("d.csv", "unit,v1_t1,v2_t1\nu,2,1\n"));
  EXPECT_NE(msg.find("v1"), std::string::npos);
  EXPECT_NE(msg.find("v2"), std::string::npos);
}

TEST_F(IoTest, OutOfRangeLevelReportsLine) {
  const std::string msg = message_of(write("d.csv", "# levels: v1=3\nunit,variable,time,level\na,1,1,2\nb,1,1,4\n"));
  EXPECT_NE(msg.find("line 4"), std::string::npos) << msg;
}

TEST_F(IoTest, DuplicateAndMissingCells) {
  const std::string dup = message_of(write("dup.csv", "# levels: v1=3\nunit,variable,time,level\na,1,1,2\na,1,1,3\n"));
  EXPECT_NE(dup.find("line 4"), std::string::npos) << dup;
  const std::string miss = message_of(write("miss.csv", "# levels: v1=3\nunit,variable,time,level\na,1,1,2\na,1,2,2\nb,1,1,1\n"));
  EXPECT_NE(miss.find("b"), std::string::npos) << miss;
}

TEST_F(IoTest, NonIntegerLevel) {
  const std::string msg = message_of(write("d.csv", "# levels: v1=3\nunit,v1_t1\na,2.5\n"));
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST_F(IoTest, MissingFileIsIoError) { EXPECT_THROW(read_dataset(path("absent.csv")), IoError); }

TEST_F(IoTest, ModelJsonRoundTripIsBitExact) {
  const Scenario s = benchmark_scenario(10, 0.0, 3);
  ModelFile mf{s.true_model(), s.levels, FitMetadata{}, nlohmann::json::object()};
  mf.model.components[1].mean(2, 3) = 0.1 + 0.2;
  mf.model.components[2].var_cov(0, 1) = mf.model.components[2].var_cov(1, 0) = 1.0 / 3.0;
  mf.model.weights = {0.1 + 0.2, 0.4, 1.0 - 0.4 - (0.1 + 0.2)};
  mf.fit->seed = 0xFFFFFFFFFFFFFFFFull;
  mf.fit->loglik_trace = {-123.456789012345678, -100.0 / 3.0};
  save_model(mf, path("m.json"));
  const ModelFile back = load_model(path("m.json"));
  EXPECT_EQ(back.levels, mf.levels);
  EXPECT_EQ(back.model.weights, mf.model.weights);
  for (int c = 0; c < 3; ++c) {
    const auto& a = mf.model.components[static_cast<std::size_t>(c)];
    const auto& b = back.model.components[static_cast<std::size_t>(c)];
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.time_cov, b.time_cov);
    EXPECT_EQ(a.var_cov, b.var_cov);
  }
  EXPECT_EQ(back.model.thresholds.cuts, mf.model.thresholds.cuts);
  ASSERT_TRUE(back.fit.has_value());
  EXPECT_EQ(back.fit->seed, mf.fit->seed);
  EXPECT_EQ(back.fit->loglik_trace, mf.fit->loglik_trace);
}

TEST_F(IoTest, MalformedModelIsDataError) {
  write("bad.json", "{\"schema_version\": 1, \"clusters\": 3}");
  EXPECT_THROW(load_model(path("bad.json")), DataError);
  write("junk.json", "not json");
  EXPECT_THROW(load_model(path("junk.json")), DataError);
}

TEST_F(IoTest, LabelsRoundTrip) {
  write_truth({"a", "b", "c"}, {1, 3, 2}, {0, 1, 0}, path("t.csv"));
  const LabelFile lf = read_labels(path("t.csv"));
  EXPECT_EQ(lf.ids, (std::vector<std::string>{"a", "b", "c"}));
  EXPECT_EQ(lf.labels, (std::vector<int>{1, 3, 2}));
  EXPECT_EQ(lf.noise, (std::vector<char>{0, 1, 0}));
  write_labels({"x", "y"}, {2, 1}, path("l.csv"));
  const LabelFile l2 = read_labels(path("l.csv"));
  EXPECT_EQ(l2.labels, (std::vector<int>{2, 1}));
  EXPECT_TRUE(l2.noise.empty());
}

TEST_F(IoTest, FormatDoubleRoundTrips) {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 12345.678901234567, 0.0})
    EXPECT_EQ(std::stod(format_double(v)), v);
}

TEST_F(IoTest, LongAndWideGiveIdenticalFits) {
  const OrdinalDataset ds = generate(benchmark_scenario(40, 0.0, 4)).dataset;
  write_dataset_long(ds, path("long.csv"));
  write_dataset_wide(ds, path("wide.csv"));
  FitConfig cfg;
  cfg.k = 2;
  cfg.seed = 5;
  cfg.max_iter = 3;
  cfg.gibbs.burn_in = 10;
  cfg.gibbs.n_samples = 20;
  cfg.prob_points = 64;
  const FitResult a = fit(read_dataset(path("long.csv")), cfg);
  const FitResult b = fit(read_dataset(path("wide.csv")), cfg);
  EXPECT_EQ(a.loglik_trace, b.loglik_trace);
  EXPECT_EQ(a.labels, b.labels);
}
