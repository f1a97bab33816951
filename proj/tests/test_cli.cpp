#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hypercurv/cli.hpp"

using namespace hcurv;
namespace fs = std::filesystem;

namespace {

const char* kDisk = R"([domain]
shape = disk
radius = 0.78
h = 0.0625

[curvature]
k = 1
l = 0
sigma = 0.6

[solve]
epsilon_ladder = 0.04, 0.02
)";

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("hypercurv_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const auto p = dir / "run.ini";
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, ParsesDiskConfig) {
  const auto cfg = parse_config(kDisk);
  ASSERT_TRUE(std::holds_alternative<DiskShape>(cfg.shape));
  EXPECT_DOUBLE_EQ(std::get<DiskShape>(cfg.shape).radius, 0.78);
  EXPECT_DOUBLE_EQ(cfg.h, 0.0625);
  EXPECT_DOUBLE_EQ(cfg.schedule.sigma, 0.6);
  EXPECT_EQ(cfg.schedule.epsilon_ladder, (std::vector<double>{0.04, 0.02}));
  EXPECT_EQ(cfg.hash(), parse_config(kDisk).hash());
  EXPECT_EQ(cfg.hash().size(), 16u);
}

TEST(Config, GeneratedLadder) {
  std::string t = kDisk;
  t.replace(t.find("epsilon_ladder = 0.04, 0.02"), 27, "epsilon0 = 0.08\nlevels = 3");
  EXPECT_EQ(parse_config(t).schedule.epsilon_ladder, (std::vector<double>{0.08, 0.04, 0.02}));
}

TEST(Config, FieldLevelErrors) {
  auto messages = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const ConfigError& e) {
      return e.messages();
    }
    return std::vector<std::string>{};
  };
  std::string t = kDisk;
  t.replace(t.find("sigma = 0.6"), 11, "sigma = 1.2");
  auto m = messages(t);
  ASSERT_EQ(m.size(), 1u);
  EXPECT_NE(m[0].find("sigma"), std::string::npos);
  EXPECT_NE(m[0].find("(0, 1)"), std::string::npos);

  m = messages("[curvature]\nsigma = 0.5\n");
  ASSERT_FALSE(m.empty());
  EXPECT_NE(m[0].find("[domain]"), std::string::npos);

  m = messages(std::string(kDisk) + "bogus = 1\n[extra]\nx = 2\n");
  EXPECT_EQ(m.size(), 2u);

  t = kDisk;
  t.replace(t.find("radius = 0.78"), 13, "radius = abc");
  EXPECT_FALSE(messages(t).empty());

  t = kDisk;
  t.replace(t.find("0.04, 0.02"), 10, "0.02, 0.04");
  EXPECT_FALSE(messages(t).empty());
}

TEST(Export, NumberFormatting) {
  EXPECT_EQ(fmt_g(0.1), "0.10000000000000001");
  EXPECT_EQ(fmt_g(std::numeric_limits<double>::quiet_NaN()), "nan");
  EXPECT_EQ(fmt_g(-INFINITY), "-inf");
}

TEST(Export, ContourOfLinearField) {
  const GridDomain g(DiskShape{0.78}, 1.0 / 16);
  std::vector<double> v;
  for (const auto& n : g.nodes()) v.push_back(n.x);
  for (const auto& s : contour_segments(g, v, 0.1)) {
    EXPECT_NEAR(s.x0, 0.1, 1e-12);
    EXPECT_NEAR(s.x1, 0.1, 1e-12);
  }
  EXPECT_FALSE(contour_segments(g, v, 0.1).empty());
  const auto svg = contour_svg(g, v, "x");
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
}

class SolveCommand : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    dir_ = scratch("solve");
    cli::Options o;
    o.config = write_config(dir_, kDisk);
    o.out = (dir_ / "out").string();
    o.quiet = true;
    std::ostringstream out, err;
    rc_ = cli::run_solve(o, out, err);
    err_ = err.str();
  }
  static inline fs::path dir_;
  static inline int rc_ = -1;
  static inline std::string err_;
};

TEST_F(SolveCommand, SucceedsAndWritesArtifacts) {
  ASSERT_EQ(rc_, 0) << err_;
  for (const char* f : {"report.json", "convergence.log", "u.svg", "kappa_max.svg", "solution_eps0.04.csv",
                        "solution_eps0.02.csv"})
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
}

TEST_F(SolveCommand, ReportContents) {
  const auto j = nlohmann::json::parse(slurp(dir_ / "out" / "report.json"));
  EXPECT_TRUE(j["completed"].get<bool>());
  EXPECT_DOUBLE_EQ(j["h"].get<double>(), 0.0625);
  EXPECT_EQ(j["config_hash"].get<std::string>().size(), 16u);
  EXPECT_TRUE(j["tolerances"].contains("residual"));
  ASSERT_EQ(j["levels"].size(), 2u);
  for (const auto& lv : j["levels"]) {
    EXPECT_LE(lv["residual"].get<double>(), 2e-9);
    EXPECT_TRUE(lv["passed"].get<bool>());
    EXPECT_GE(lv["checks"].size(), 8u);
  }
}

TEST_F(SolveCommand, CsvLayout) {
  std::ifstream in(dir_ / "out" / "solution_eps0.02.csv");
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "x,y,u,w,nu_vertical,kappa_min,kappa_max,residual");
  std::getline(in, row);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 7);
}

TEST_F(SolveCommand, ReportCommandSummarizes) {
  cli::Options o;
  o.out = (dir_ / "out").string();
  std::ostringstream out, err;
  EXPECT_EQ(cli::run_report(o, out, err), 0);
  EXPECT_NE(out.str().find("pass"), std::string::npos);
}

TEST_F(SolveCommand, RepeatRunIsByteIdentical) {
  cli::Options o;
  o.config = (dir_ / "run.ini").string();
  o.out = (dir_ / "again").string();
  o.quiet = true;
  std::ostringstream out, err;
  ASSERT_EQ(cli::run_solve(o, out, err), 0);
  for (const auto& e : fs::directory_iterator(dir_ / "out"))
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "again" / e.path().filename())) << e.path().filename();
}

TEST(Commands, ConfigErrorsExitTwo) {
  const auto dir = scratch("errors");
  std::string t = kDisk;
  t.replace(t.find("sigma = 0.6"), 11, "sigma = 1.2");
  cli::Options o;
  o.config = write_config(dir, t);
  o.out = (dir / "out").string();
  std::ostringstream out, err;
  EXPECT_EQ(cli::run_solve(o, out, err), 2);
  EXPECT_NE(err.str().find("(0, 1)"), std::string::npos);

  o.config = write_config(dir, "[curvature]\nsigma = 0.5\n");
  EXPECT_EQ(cli::run_solve(o, out, err), 2);
  o.config = (dir / "missing.ini").string();
  EXPECT_EQ(cli::run_solve(o, out, err), 2);
}

TEST(Commands, ReportWithoutRunExitsTwo) {
  cli::Options o;
  o.out = scratch("noreport").string();
  std::ostringstream out, err;
  EXPECT_EQ(cli::run_report(o, out, err), 2);
}

TEST(Commands, OracleCompare) {
  const auto dir = scratch("oracle");
  cli::Options o;
  o.config = write_config(dir, kDisk);
  o.out = (dir / "out").string();
  o.quiet = true;
  std::ostringstream out, err;
  EXPECT_EQ(cli::run_oracle_compare(o, out, err), 0) << err.str();
  const auto j = nlohmann::json::parse(slurp(dir / "out" / "oracle_compare.json"));
  for (const auto& r : j["rows"]) EXPECT_LE(r["max_error"].get<double>(), 5 * 0.0625 * 0.0625);

  std::string t = kDisk;
  t.replace(t.find("shape = disk\nradius = 0.78"), 26, "shape = ellipse\na = 0.9\nb = 0.6");
  o.config = write_config(dir, t);
  EXPECT_EQ(cli::run_oracle_compare(o, out, err), 2);
}

TEST(Commands, ValidatePassesAndIsDeterministic) {
  const auto dir = scratch("validate");
  cli::Options o;
  o.quiet = true;
  std::ostringstream out, err;
  o.out = (dir / "a").string();
  EXPECT_EQ(cli::run_validate(o, out, err), 0) << err.str();
  o.out = (dir / "b").string();
  EXPECT_EQ(cli::run_validate(o, out, err), 0);
  EXPECT_EQ(slurp(dir / "a" / "validate.json"), slurp(dir / "b" / "validate.json"));
}

TEST(Commands, ValidateCatchesCorruptedGamma) {
  cli::Options o;
  o.quiet = true;
  ValidateOptions bad;
  bad.gamma = [](double y, double a) { return 2 * y * y * y - 2 * a * y * y - 2 * y + 2 * a; };
  std::ostringstream out, err;
  EXPECT_EQ(cli::run_validate(o, out, err, &bad), 1);
  EXPECT_NE(err.str().find("gamma"), std::string::npos);
}
