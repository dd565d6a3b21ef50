#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cvi/cli/commands.hpp"

namespace fs = std::filesystem;
using cvi::cli::CommandOptions;

namespace {

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("cvi_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const std::string& name, const std::string& text) {
    const auto path = dir_ / name;
    std::ofstream(path) << text;
    return path.string();
  }

  CommandOptions opts(const std::string& config, const std::string& out = "out") {
    CommandOptions o;
    o.config_path = config;
    o.out_dir = (dir_ / out).string();
    return o;
  }

  fs::path dir_;
  std::ostringstream log_, err_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

const char* kQuick = R"({
  "problem": {"name": "rayleigh", "n": 3, "seed": 3},
  "methods": [{"method": "rgd", "h": 0.1, "max_iters": 10, "stop_grad_tol": 0, "stop_f_tol": 0}],
  "plot": false
})";

}  // namespace

TEST_F(CliTest, RunWritesElevenRows) {
  ASSERT_EQ(cvi::cli::cmd_run(opts(write_config("c.json", kQuick)), log_, err_), 0) << err_.str();
  const auto rows = lines(slurp(dir_ / "out" / "rgd.csv"));
  ASSERT_EQ(rows.size(), 12u);
  EXPECT_EQ(rows[0], "k,t,f,grad_norm,constraint_violation,error_vs_oracle,newton_iters");
  EXPECT_EQ(rows[1].substr(0, 2), "0,");
  EXPECT_EQ(rows[11].substr(0, 3), "10,");
}

TEST_F(CliTest, RerunIsByteIdentical) {
  const auto cfg = write_config("c.json", kQuick);
  ASSERT_EQ(cvi::cli::cmd_run(opts(cfg, "a"), log_, err_), 0);
  ASSERT_EQ(cvi::cli::cmd_run(opts(cfg, "b"), log_, err_), 0);
  EXPECT_EQ(slurp(dir_ / "a" / "rgd.csv"), slurp(dir_ / "b" / "rgd.csv"));
}

TEST_F(CliTest, FiveMethodBlocksGiveFiveCsvs) {
  const auto cfg = write_config("c.json", R"({
    "problem": {"name": "rayleigh", "n": 20, "seed": 1},
    "methods": [
      {"method": "htvi_direct", "p": 6, "h": 0.001, "max_iters": 30},
      {"method": "htvi_adaptive", "p": 6, "h": 0.001, "max_iters": 30},
      {"method": "el_v1", "p": 6, "h": 0.001, "max_iters": 30},
      {"method": "el_v2", "p": 6, "h": 0.001, "max_iters": 30},
      {"method": "rgd", "h": 0.001, "max_iters": 30}
    ]})");
  ASSERT_EQ(cvi::cli::cmd_run(opts(cfg), log_, err_), 0) << err_.str();
  for (const char* name : {"htvi_direct", "htvi_adaptive", "el_v1", "el_v2", "rgd"})
    EXPECT_TRUE(fs::exists(dir_ / "out" / (std::string(name) + ".csv"))) << name;
}

TEST_F(CliTest, DuplicateLabelsAreMadeUnique) {
  const auto cfg = write_config("c.json", R"({
    "problem": {"name": "rayleigh", "n": 4, "seed": 1},
    "methods": [{"method": "rgd", "max_iters": 3}, {"method": "rgd", "max_iters": 3}]})");
  ASSERT_EQ(cvi::cli::cmd_run(opts(cfg), log_, err_), 0);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "rgd.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "rgd_2.csv"));
}

TEST_F(CliTest, CompareIdenticalBlocksAndPolylines) {
  const auto cfg = write_config("c.json", R"({
    "problem": {"name": "rayleigh", "n": 6, "seed": 2},
    "methods": [
      {"method": "htvi_adaptive", "label": "a", "max_iters": 40},
      {"method": "htvi_adaptive", "label": "b", "max_iters": 40},
      {"method": "rgd", "label": "c", "h": 0.1, "max_iters": 40}
    ]})");
  ASSERT_EQ(cvi::cli::cmd_compare(opts(cfg), log_, err_), 0) << err_.str();
  const auto rows = lines(slurp(dir_ / "out" / "compare.csv"));
  EXPECT_EQ(rows[0], "method,k,t,f,grad_norm,constraint_violation,error_vs_oracle,newton_iters");
  std::vector<std::string> a, b;
  for (const auto& r : rows) {
    if (r.rfind("a,", 0) == 0) a.push_back(r.substr(2));
    if (r.rfind("b,", 0) == 0) b.push_back(r.substr(2));
  }
  ASSERT_FALSE(a.empty());
  EXPECT_EQ(a, b);
  const auto svg = slurp(dir_ / "out" / "compare.svg");
  EXPECT_EQ(count(svg, "<polyline"), 3u);
  EXPECT_NE(svg.find("|f - f*|"), std::string::npos);
}

TEST_F(CliTest, CompareWithoutOracleFallsBackToRawF) {
  const auto cfg = write_config("c.json", R"({
    "problem": {"name": "procrustes", "n": 5, "m": 2, "l": 8, "seed": 4},
    "methods": [{"method": "rgd", "h": 0.05, "max_iters": 20}, {"method": "el_v1", "max_iters": 20}]})");
  ASSERT_EQ(cvi::cli::cmd_compare(opts(cfg), log_, err_), 0) << err_.str();
  const auto svg = slurp(dir_ / "out" / "compare.svg");
  EXPECT_EQ(count(svg, "<polyline"), 2u);
  EXPECT_EQ(svg.find("|f - f*|"), std::string::npos);
  // no oracle column in the combined trace
  const auto rows = lines(slurp(dir_ / "out" / "compare.csv"));
  EXPECT_NE(rows[1].find(",,"), std::string::npos);
}

TEST_F(CliTest, NoPlotSuppressesSvg) {
  const auto cfg = write_config("c.json", R"({
    "problem": {"name": "rayleigh", "n": 4, "seed": 1},
    "methods": [{"method": "rgd", "max_iters": 3}, {"method": "el_v2", "max_iters": 3}]})");
  auto o = opts(cfg);
  o.no_plot = true;
  ASSERT_EQ(cvi::cli::cmd_compare(o, log_, err_), 0);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "compare.csv"));
  EXPECT_FALSE(fs::exists(dir_ / "out" / "compare.svg"));
}

TEST_F(CliTest, ConfigErrorsExitOne) {
  EXPECT_EQ(cvi::cli::cmd_run(opts((dir_ / "missing.json").string()), log_, err_), 1);
  EXPECT_EQ(cvi::cli::cmd_run(opts(write_config("bad.json", "{ not json")), log_, err_), 1);
  EXPECT_EQ(cvi::cli::cmd_run(opts(write_config("m.json", R"({"problem": {"name": "rayleigh"},
      "methods": [{"method": "adam"}]})")), log_, err_), 1);
  EXPECT_EQ(cvi::cli::cmd_run(opts(write_config("p.json", R"({"problem": {"name": "lasso"},
      "methods": [{"method": "rgd"}]})")), log_, err_), 1);
  EXPECT_EQ(cvi::cli::cmd_run(opts(write_config("e.json", R"({"problem": {"name": "rayleigh"},
      "methods": []})")), log_, err_), 1);
  EXPECT_EQ(cvi::cli::cmd_run(opts(write_config("h.json", R"({"problem": {"name": "rayleigh"},
      "methods": [{"method": "rgd", "h": -1}]})")), log_, err_), 1);
  EXPECT_EQ(cvi::cli::cmd_compare(opts(write_config("c.json", kQuick)), log_, err_), 1);
  EXPECT_EQ(cvi::cli::cmd_order_check(opts(write_config("o.json", R"({"system": "kepler"})")),
                                      log_, err_), 1);
  EXPECT_NE(err_.str().find("config error"), std::string::npos);
}

TEST_F(CliTest, MatrixFileInput) {
  std::ofstream(dir_ / "a.txt") << "# diag\n2 0 0\n0 1 0\n\n0 0 3\n";
  const auto cfg = write_config("c.json", R"({
    "problem": {"name": "rayleigh", "file": ")" + (dir_ / "a.txt").string() + R"("},
    "methods": [{"method": "rgd", "h": 0.1, "max_iters": 2000, "stop_f_tol": 1e-10}]})");
  ASSERT_EQ(cvi::cli::cmd_run(opts(cfg), log_, err_), 0) << err_.str();
  const auto rows = lines(slurp(dir_ / "out" / "rgd.csv"));
  // error_vs_oracle is column 6; the oracle is -3
  const auto& last = rows.back();
  std::vector<std::string> cells;
  std::stringstream ss(last);
  for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
  EXPECT_LE(std::abs(std::stod(cells[5])), 1e-10);
  EXPECT_NEAR(std::stod(cells[2]), -3.0, 1e-9);

  std::ofstream(dir_ / "ragged.txt") << "1 2\n3\n";
  const auto bad = write_config("b.json", R"({
    "problem": {"name": "rayleigh", "file": ")" + (dir_ / "ragged.txt").string() + R"("},
    "methods": [{"method": "rgd"}]})");
  EXPECT_EQ(cvi::cli::cmd_run(opts(bad), log_, err_), 1);
}

TEST_F(CliTest, NumericalFailureWritesFailureRow) {
  const auto cfg = write_config("c.json", R"({
    "problem": {"name": "brockett", "n": 5, "m": 2, "seed": 3},
    "methods": [{"method": "htvi_direct", "max_iters": 10, "newton_tol": 1e-300, "newton_max_iter": 3}]})");
  EXPECT_EQ(cvi::cli::cmd_run(opts(cfg), log_, err_), 2);
  const auto rows = lines(slurp(dir_ / "out" / "htvi_direct.csv"));
  ASSERT_GE(rows.size(), 3u);
  EXPECT_EQ(rows.back(), "1,nan,nan,nan,nan,nan,");
}

TEST_F(CliTest, OrderCheckPassAndNegativeControl) {
  const auto good = write_config("g.json", R"({
    "system": "quadratic_htvi", "h_list": [0.1, 0.05, 0.025, 0.0125], "T": 1.0,
    "expected_rate": [0.85, 1.15]})");
  ASSERT_EQ(cvi::cli::cmd_order_check(opts(good), log_, err_), 0) << err_.str();
  EXPECT_NE(log_.str().find("PASS"), std::string::npos);
  const auto table = lines(slurp(dir_ / "out" / "order_check.csv"));
  EXPECT_EQ(table[0], "h,error,used");
  EXPECT_EQ(table.size(), 5u);

  const auto bad = write_config("b.json", R"({
    "system": "quadratic_htvi", "h_list": [0.1, 0.05, 0.025, 0.0125], "T": 1.0,
    "expected_rate": [3, 4]})");
  std::ostringstream log2;
  EXPECT_EQ(cvi::cli::cmd_order_check(opts(bad), log2, err_), 3);
  EXPECT_NE(log2.str().find("rate = "), std::string::npos);
  EXPECT_NE(log2.str().find("FAIL"), std::string::npos);

  const auto uneven = write_config("u.json", R"({
    "system": "quadratic_htvi", "h_list": [0.3, 0.2, 0.15], "T": 1.0})");
  EXPECT_EQ(cvi::cli::cmd_order_check(opts(uneven), log_, err_), 1);
}

TEST(ShippedConfigs, AllParse) {
  for (const auto& entry : fs::directory_iterator(fs::path(CVI_SOURCE_DIR) / "configs")) {
    const auto j = cvi::cli::read_json_file(entry.path().string());
    if (j.contains("system"))
      EXPECT_NO_THROW(cvi::cli::parse_order_check_config(j)) << entry.path();
    else
      EXPECT_NO_THROW(cvi::cli::build_problem(cvi::cli::parse_cli_config(j).problem))
          << entry.path();
  }
}
