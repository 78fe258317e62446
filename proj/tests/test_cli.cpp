#include <gtest/gtest.h>
#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "isospectra/analytic_spectra.hpp"
#include "isospectra/quadrature.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / ("isospectra_cli_" + std::to_string(::getpid()));
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " " + std::string(ISOSPECTRA_BIN) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST(Cli, CurveMarksBoundaries) {
  const fs::path out = scratch() / "curve.csv";
  ASSERT_EQ(run("curve --n-dim 50 --points 7 --out " + out.string()), 0);
  const auto rows = read_csv(out);
  ASSERT_GT(rows.size(), 1u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"u", "beta", "s", "N2s", "phase", "at_boundary"}));
  int boundaries = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i][5] == "1") ++boundaries;
    if (std::stod(rows[i][0]) == 0.5) {
      EXPECT_EQ(std::stod(rows[i][1]), 0.0);
      EXPECT_EQ(std::stod(rows[i][2]), -0.5);
    }
  }
  EXPECT_EQ(boundaries, 2);
  EXPECT_TRUE(fs::exists(scratch() / "curve.manifest.json"));
}

TEST(Cli, InvalidInputExitsTwo) {
  EXPECT_EQ(run("curve --points 0 --out " + (scratch() / "x.csv").string()), 2);
  EXPECT_EQ(run("curve --u 9 --n-dim 50 --out " + (scratch() / "x.csv").string()), 2);
  EXPECT_EQ(run("spectrum --beta -1 --out " + (scratch() / "x.csv").string()), 2);
  EXPECT_EQ(run("spectrum --beta 1 --u 0.3 --out " + (scratch() / "x.csv").string()), 2);
  EXPECT_EQ(run("haar --n-dim 0 --out " + (scratch() / "h").string()), 2);
  EXPECT_EQ(run("transitions --n-dim 2 --out " + (scratch() / "t.json").string()), 2);
  EXPECT_EQ(run("nonsense"), 2);
  EXPECT_EQ(run("haar --out " + (scratch() / "h").string(), "ISOSPECTRA_SEED=abc"), 2);
}

TEST(Cli, SpectrumBetaZeroIsMarchenkoPastur) {
  const fs::path out = scratch() / "mp.csv";
  ASSERT_EQ(run("spectrum --beta 0 --points 50 --out " + out.string()), 0);
  const auto rows = read_csv(out);
  ASSERT_EQ(rows.size(), 51u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double l = std::stod(rows[i][0]);
    EXPECT_NEAR(std::stod(rows[i][1]), isospectra::mp_value(l), 1e-10);
  }
}

TEST(Cli, SpectrumEvaporatedAtom) {
  const fs::path out = scratch() / "evap.csv";
  ASSERT_EQ(run("spectrum --u 1.0 --n-dim 50 --points 10 --out " + out.string()), 0);
  const auto atom = read_csv(scratch() / "evap_atom.csv");
  ASSERT_EQ(atom.size(), 2u);
  EXPECT_NEAR(std::stod(atom[1][0]), 0.2556, 1e-4);
  EXPECT_NEAR(std::stod(atom[1][1]), 0.02, 1e-15);
}

TEST(Cli, DeformationTable) {
  const fs::path out = scratch() / "g.csv";
  ASSERT_EQ(run("spectrum --deformation --eta 3 --points 20 --out " + out.string()), 0);
  const auto rows = read_csv(out);
  ASSERT_EQ(rows.size(), 21u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double x = std::stod(rows[i][0]);
    // independent coarse-vs-fine resolution check
    const double fine =
        isospectra::quadrature::pv_chebyshev(isospectra::quadrature::log_shift_integrand(3.0), x, 4096) *
        (3.0 + std::sqrt(8.0)) / (2.0 * M_PI);
    EXPECT_NEAR(std::stod(rows[i][1]), fine, 1e-10);
  }
}

TEST(Cli, GasDeterministicAndStrict) {
  const fs::path a = scratch() / "gas_a", b = scratch() / "gas_b";
  const std::string args = "gas --n-dim 12 --beta 1 --steps 400 --burn-in 100 --thin 10 --seed 3 --out ";
  ASSERT_EQ(run(args + a.string()), 0);
  ASSERT_EQ(run(args + b.string()), 0);
  EXPECT_EQ(slurp(a / "samples.csv"), slurp(b / "samples.csv"));
  const json summary = json::parse(slurp(a / "summary.json"));
  EXPECT_TRUE(summary.contains("l1_to_analytic"));
  EXPECT_TRUE(summary.contains("acceptance_rate"));
  const json manifest = json::parse(slurp(a / "manifest.json"));
  EXPECT_EQ(manifest["command"], "gas");
  EXPECT_EQ(manifest["seeds"][0], 3);
  EXPECT_EQ(manifest["artifacts"].size(), 4u);

  const fs::path cfg = scratch() / "bad.cfg";
  std::ofstream(cfg) << "autotune = false\nmove_scale = 0.5\n";
  const std::string bad = "gas --config " + cfg.string() + " --n-dim 16 --steps 200 --burn-in 50 --out ";
  EXPECT_EQ(run(bad + (scratch() / "gas_c").string()), 0);
  EXPECT_EQ(run(bad + (scratch() / "gas_c").string() + " --strict"), 3);
}

TEST(Cli, HaarSeedFallbackAndRerun) {
  const fs::path a = scratch() / "haar_a", b = scratch() / "haar_b";
  ASSERT_EQ(run("haar --n-dim 6 --draws 4 --out " + a.string(), "ISOSPECTRA_SEED=12"), 0);
  ASSERT_EQ(run("haar --n-dim 6 --draws 4 --seed 12 --out " + b.string()), 0);
  EXPECT_EQ(slurp(a / "samples.csv"), slurp(b / "samples.csv"));
  const std::string before = slurp(a / "samples.csv");
  fs::remove(a / "samples.csv");
  ASSERT_EQ(run("rerun " + (a / "manifest.json").string()), 0);
  EXPECT_EQ(slurp(a / "samples.csv"), before);
}

TEST(Cli, HaarSingleDimension) {
  const fs::path a = scratch() / "haar_one";
  ASSERT_EQ(run("haar --n-dim 1 --draws 2 --out " + a.string()), 0);
  EXPECT_EQ(slurp(a / "samples.csv"), "l0\n1\n1\n");
}

TEST(Cli, TransitionsReport) {
  const fs::path out = scratch() / "t.json";
  ASSERT_EQ(run("transitions --n-dim 50 --out " + out.string()), 0);
  const json j = json::parse(slurp(out));
  ASSERT_EQ(j["detected"].size(), 2u);
  EXPECT_EQ(j["detected"][0]["lowest_order"], 4);
  EXPECT_EQ(j["detected"][1]["lowest_order"], 1);
  EXPECT_EQ(j["detected"][1]["u"], 0.5);
}
