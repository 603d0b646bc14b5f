#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "movingheat/cli.hpp"

namespace movingheat {
namespace {

namespace fs = std::filesystem;

const char *minimal = R"(# constant domain, no noise
[domain]
kind = constant
T = 1

[sim]
n = 8
dt = 0.01
t_end = 0.5
)";

std::string error_of(std::string_view text) {
  try {
    parse_config_text(text);
  } catch (const ValidationError &e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string &name) {
  const auto dir = fs::temp_directory_path() / ("movingheat_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path &path, std::string_view text) {
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path &path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int run(std::vector<std::string> args, std::string *err_text = nullptr) {
  std::ostringstream err;
  const int code = cli::run(args, err);
  if (err_text) *err_text = err.str();
  return code;
}

TEST(ParseConfig, MinimalFileGetsDefaults) {
  const auto rc = parse_config_text(minimal);
  EXPECT_EQ(rc.sim.scheme, Scheme::exponential_em);
  EXPECT_EQ(rc.sim.output.grid_size, 129u);
  EXPECT_EQ(rc.sim.output.snapshot_stride, 1u);
  EXPECT_EQ(rc.sim.model.kind, DiffusionKind::zero);
  EXPECT_EQ(rc.sim.model.m, 8u);
  EXPECT_EQ(rc.sim.n_paths, 1u);
  EXPECT_EQ(rc.sim.seed, 0u);
  EXPECT_EQ(rc.sim.domain.a(0.3), 1.0);
  EXPECT_EQ(rc.initial.kind, InitialKind::modes);
}

TEST(ParseConfig, ResolvedTextRoundTrips) {
  const std::string text = std::string(minimal) +
                           "[noise]\nkind = moving_diagonal\ngamma = 0.5\nbeta = 0.5\nm = 12\n"
                           "[initial]\nkind = parabola\nscale = 2\n";
  const auto rc = parse_config_text(text);
  const auto again = parse_config_text(rc.resolved_text);
  EXPECT_EQ(again.resolved_text, rc.resolved_text);
  EXPECT_EQ(again.sim.model.m, 12u);
  EXPECT_EQ(again.sim.model.lipschitz_k, rc.sim.model.lipschitz_k);
  EXPECT_EQ(again.initial.scale, 2.0);
}

TEST(ParseConfig, StabilityGuardNamesTheBound) {
  const std::string text = "[domain]\nkind = constant\nT = 1\n[sim]\nn = 64\nscheme = explicit_em\n"
                           "dt = 0.01\nt_end = 1\n";
  const auto msg = error_of(text);
  // delta0 = 0.99 after the sampling margin: 1.9 (0.99 / (64 pi))^2.
  EXPECT_NE(msg.find("4.60"), std::string::npos) << msg;
  EXPECT_NE(msg.find("explicit_em"), std::string::npos) << msg;
}

TEST(ParseConfig, UnknownKeyIsNamed) {
  const auto msg = error_of(std::string(minimal) + "[noise]\nsigma_level = 0.3\n");
  EXPECT_NE(msg.find("sigma_level"), std::string::npos) << msg;
}

TEST(ParseConfig, OtherErrorsNameTheKey) {
  EXPECT_NE(error_of("[domain]\nkind = constant\n[sim]\nn = 4\ndt = 0.1\nt_end = 1\n").find("'T'"),
            std::string::npos);
  EXPECT_NE(error_of("[domain]\nkind = constant\nT = 1\n[sim]\nn = four\ndt = 0.1\nt_end = 1\n").find("'n'"),
            std::string::npos);
  EXPECT_NE(error_of("[domain]\nkind = constant\nT = 1\nT = 2\n[sim]\nn = 4\ndt = 0.1\nt_end = 1\n").find("'T'"),
            std::string::npos);
  EXPECT_NE(error_of("[solver]\nn = 4\n").find("[solver]"), std::string::npos);
  EXPECT_NE(error_of("n = 4\n").find("section"), std::string::npos);
  EXPECT_NE(error_of(std::string(minimal) + "[noise]\nkind = general_matrix\nmatrix_path = x.csv\n").find("'lipschitz_k'"),
            std::string::npos);
  EXPECT_NE(error_of(std::string(minimal) + "[noise]\nkind = general_matrix\nmatrix_path = /nonexistent/x.csv\n"
                                            "lipschitz_k = 1\n")
                .find("x.csv"),
            std::string::npos);
  EXPECT_NE(error_of("[domain]\nkind = linear\nslope = -3\nT = 1\n[sim]\nn = 4\ndt = 0.1\nt_end = 1\n"), "");
  EXPECT_NE(error_of("[domain]\nkind = constant\nT = 1\n[sim]\nn = 4\ndt = 0.3\nt_end = 1\n"), "");
}

TEST(ParseConfig, RelativePathsResolveAgainstConfigDirectory) {
  const auto dir = scratch("paths");
  write_file(dir / "sigma.csv", "0.3,0\n0,0.2\n");
  write_file(dir / "a.csv", "t,a\n0,1\n0.5,1.1\n1,1.2\n");
  const auto cfg = write_file(dir / "run.cfg", "[domain]\nkind = table\ntable_path = a.csv\nT = 1\n"
                                               "[noise]\nkind = general_matrix\nmatrix_path = sigma.csv\n"
                                               "lipschitz_k = 1\n[sim]\nn = 4\ndt = 0.01\nt_end = 1\n");
  const auto rc = parse_config(cfg.string());
  EXPECT_EQ(rc.sim.model.m, 2u);
  EXPECT_NEAR(rc.sim.domain.a(0.25), 1.05, 1e-12);
  EXPECT_NE(rc.resolved_text.find((dir / "sigma.csv").string()), std::string::npos);
  fs::remove_all(dir);
}

class CliTest : public ::testing::Test {
protected:
  void SetUp() override {
    unsetenv("MOVINGHEAT_OUT");
    dir = scratch(::testing::UnitTest::GetInstance()->current_test_info()->name());
    config = write_file(dir / "run.cfg", "[domain]\nkind = sinusoidal\namp = 0.5\nomega = 1\nT = 1\n"
                                         "[noise]\nkind = moving_diagonal\ngamma = 0.5\nbeta = 0.5\nm = 8\n"
                                         "[sim]\nn = 8\ndt = 0.01\nt_end = 0.2\nseed = 3\nn_paths = 6\n"
                                         "[output]\ngrid_size = 17\nsnapshot_stride = 5\n"
                                         "[initial]\nkind = parabola\n")
                 .string();
  }
  void TearDown() override {
    unsetenv("MOVINGHEAT_OUT");
    fs::remove_all(dir);
  }
  fs::path dir;
  std::string config;
};

TEST_F(CliTest, SimulateWritesTrajectoryFieldAndManifest) {
  ASSERT_EQ(run({"simulate", "--config", config, "--out", (dir / "out").string()}), 0);
  const auto traj = slurp(dir / "out" / "trajectory.csv");
  EXPECT_EQ(traj.substr(0, traj.find('\n')), "step,t,a_t,l2_sq,h1_sq,A_1,A_2,A_3,A_4,A_5,A_6,A_7,A_8");
  EXPECT_EQ(std::count(traj.begin(), traj.end(), '\n'), 1 + 5);
  const auto field = slurp(dir / "out" / "field.csv");
  EXPECT_EQ(field.substr(0, field.find('\n')), "t,x,u");
  EXPECT_EQ(std::count(field.begin(), field.end(), '\n'), 1 + 5 * 17);

  const auto manifest = nlohmann::json::parse(slurp(dir / "out" / "manifest.json"));
  EXPECT_EQ(manifest["command"], "simulate");
  EXPECT_EQ(manifest["seed"], 3);
  EXPECT_TRUE(manifest.contains("version"));
  EXPECT_TRUE(manifest.contains("wall_clock_seconds"));
  EXPECT_EQ(manifest["outputs"].size(), 2u);
  EXPECT_NE(manifest["config"].get<std::string>().find("kind = moving_diagonal"), std::string::npos);
}

TEST_F(CliTest, ManifestRerunReproducesOutputs) {
  ASSERT_EQ(run({"simulate", "--config", config, "--out", (dir / "a").string()}), 0);
  ASSERT_EQ(run({"simulate", "--config", (dir / "a" / "manifest.json").string(), "--out", (dir / "b").string()}), 0);
  EXPECT_EQ(slurp(dir / "a" / "trajectory.csv"), slurp(dir / "b" / "trajectory.csv"));
  EXPECT_EQ(slurp(dir / "a" / "field.csv"), slurp(dir / "b" / "field.csv"));
}

TEST_F(CliTest, CsvFieldsRoundTripExactly) {
  ASSERT_EQ(run({"simulate", "--config", config, "--out", dir.string()}), 0);
  const auto rc = parse_config(config);
  const auto traj = simulate(rc.sim, initial_state(rc.initial, rc.sim.n, rc.sim.domain));
  std::istringstream in(slurp(dir / "trajectory.csv"));
  std::string line;
  std::getline(in, line);
  for (std::size_t i = 0; std::getline(in, line); ++i) {
    std::vector<std::string> cells;
    std::istringstream row(line);
    for (std::string cell; std::getline(row, cell, ',');) cells.push_back(cell);
    ASSERT_EQ(cells.size(), 5u + 8u);
    EXPECT_EQ(std::stod(cells[1]), traj.times[i]);
    for (std::size_t k = 0; k < 8; ++k) EXPECT_EQ(std::stod(cells[5 + k]), traj.states[i].coeffs[k]);
  }
}

TEST_F(CliTest, EnsembleIsIndependentOfWorkerCount) {
  ASSERT_EQ(run({"ensemble", "--config", config, "--out", (dir / "w1").string(), "--workers", "1"}), 0);
  ASSERT_EQ(run({"ensemble", "--config", config, "--out", (dir / "w4").string(), "--workers", "4"}), 0);
  EXPECT_EQ(slurp(dir / "w1" / "ensemble.csv"), slurp(dir / "w4" / "ensemble.csv"));
  EXPECT_EQ(slurp(dir / "w1" / "moments.csv"), slurp(dir / "w4" / "moments.csv"));
}

TEST_F(CliTest, ConvergeEnergyAndOracleCommands) {
  ASSERT_EQ(run({"converge", "--config", config, "--out", dir.string(), "--levels", "4,8", "--seeds", "2"}), 0);
  const auto conv = slurp(dir / "converge.csv");
  EXPECT_EQ(conv.substr(0, conv.find('\n')), "seed,n,D_x,D_y");
  EXPECT_EQ(std::count(conv.begin(), conv.end(), '\n'), 1 + 4);

  ASSERT_EQ(run({"energy-check", "--config", config, "--out", dir.string()}), 0);
  const auto energy = slurp(dir / "energy.csv");
  EXPECT_EQ(energy.substr(0, energy.find('\n')), "t,l2_sq,visc,sto,hs,residual");

  std::string err;
  EXPECT_EQ(run({"oracle-compare", "--config", config, "--out", dir.string()}, &err), 1);
  EXPECT_NE(err.find("zero"), std::string::npos);

  const auto det = write_file(dir / "det.cfg", "[domain]\nkind = linear\nslope = 0.25\nT = 0.5\n"
                                               "[sim]\nn = 16\ndt = 0.001\nt_end = 0.5\n"
                                               "[output]\nsnapshot_stride = 100\n");
  ASSERT_EQ(run({"oracle-compare", "--config", det.string(), "--out", dir.string(), "--M", "128", "--dt-fd",
                 "0.001"}),
            0);
  const auto oracle = slurp(dir / "oracle.csv");
  EXPECT_EQ(oracle.substr(0, oracle.find('\n')), "t,discrepancy_l2");
  EXPECT_EQ(std::count(oracle.begin(), oracle.end(), '\n'), 1 + 6);
}

TEST_F(CliTest, CouplingDumpIsAntisymmetric) {
  ASSERT_EQ(run({"coupling-dump", "--config", config, "--out", dir.string(), "--n", "16", "--t", "0.3"}), 0);
  std::istringstream in(slurp(dir / "coupling.csv"));
  std::vector<std::vector<double>> m;
  for (std::string line; std::getline(in, line);) {
    std::vector<double> row;
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) row.push_back(std::stod(cell));
    m.push_back(row);
  }
  ASSERT_EQ(m.size(), 16u);
  for (std::size_t j = 0; j < 16; ++j) {
    ASSERT_EQ(m[j].size(), 16u);
    for (std::size_t k = 0; k < 16; ++k) EXPECT_EQ(m[j][k] + m[k][j], 0.0);
  }
  EXPECT_NE(m[0][1], 0.0);
}

TEST_F(CliTest, EnvironmentOverridesOut) {
  const auto target = dir / "from_env";
  setenv("MOVINGHEAT_OUT", target.string().c_str(), 1);
  ASSERT_EQ(run({"coupling-dump", "--config", config, "--out", (dir / "ignored").string()}), 0);
  EXPECT_TRUE(fs::exists(target / "coupling.csv"));
  EXPECT_TRUE(fs::exists(target / "manifest.json"));
  EXPECT_FALSE(fs::exists(dir / "ignored"));
}

TEST_F(CliTest, ExitCodes) {
  std::string err;
  EXPECT_EQ(run({"simulate", "--config", (dir / "missing.cfg").string()}, &err), 1);
  EXPECT_EQ(run({"simulate"}, &err), 1);
  EXPECT_EQ(run({"frobnicate", "--config", config}, &err), 1);
  const auto bad = write_file(dir / "bad.cfg", std::string(minimal) + "[noise]\nsigma_level = 1\n");
  EXPECT_EQ(run({"simulate", "--config", bad.string(), "--out", dir.string()}, &err), 1);
  EXPECT_NE(err.find("sigma_level"), std::string::npos);
  const auto blowup = write_file(dir / "blowup.cfg", "[domain]\nkind = constant\nT = 1\n"
                                                     "[noise]\nkind = moving_diagonal\nbeta = 1e300\nm = 2\n"
                                                     "[sim]\nn = 2\ndt = 0.01\nt_end = 0.1\n"
                                                     "[initial]\ncoeffs = 1e300, 1e300\n");
  EXPECT_EQ(run({"simulate", "--config", blowup.string(), "--out", dir.string()}, &err), 2);
  EXPECT_NE(err.find("step"), std::string::npos);
}

} // namespace
} // namespace movingheat
