#include <gtest/gtest.h>

#include <sstream>

#include "isospectra/io.hpp"

using namespace isospectra;

TEST(Config, ParsesKeyValue) {
  std::istringstream in(
      "# comment\n"
      "n_dim = 32\n"
      "beta=2.5   # trailing\n"
      "\n"
      "steps = 500\nburn_in = 50\nthinning = 5\nseed = 77\n"
      "move_scale = 1e-3\nautotune = false\nmin_gap = 1e-14\n"
      "init = custom\ncustom_init = 1, 2, 3\nchains = 2\n");
  const io::GasJob job = io::parse_gas_config(in);
  EXPECT_EQ(job.chain.n_dim, 32);
  EXPECT_EQ(job.chain.beta, 2.5);
  EXPECT_EQ(job.chain.steps, 500);
  EXPECT_EQ(job.chain.burn_in, 50);
  EXPECT_EQ(job.chain.thinning, 5);
  EXPECT_EQ(job.chain.seed, 77u);
  EXPECT_TRUE(job.seed_set);
  EXPECT_EQ(job.chain.move_scale, 1e-3);
  EXPECT_FALSE(job.chain.autotune);
  EXPECT_EQ(job.chain.min_gap, 1e-14);
  EXPECT_EQ(job.chain.init, InitKind::custom);
  EXPECT_EQ(job.chain.custom_init, (std::vector<double>{1, 2, 3}));
  EXPECT_EQ(job.chains, 2);
}

TEST(Config, RejectsMalformed) {
  std::istringstream unknown("colour = blue\n");
  EXPECT_THROW(io::parse_gas_config(unknown), std::invalid_argument);
  std::istringstream no_eq("n_dim 32\n");
  EXPECT_THROW(io::parse_gas_config(no_eq), std::invalid_argument);
  std::istringstream bad_num("beta = fast\n");
  EXPECT_THROW(io::parse_gas_config(bad_num), std::invalid_argument);
  std::istringstream bad_init("init = random\n");
  EXPECT_THROW(io::parse_gas_config(bad_init), std::invalid_argument);
  EXPECT_THROW(io::load_gas_config("/nonexistent/file.cfg"), std::invalid_argument);
}

TEST(Csv, SeventeenDigitsAndHeader) {
  std::ostringstream out;
  io::CsvWriter w(out, {"a", "b"});
  w.row({0.1, 1.0 / 3.0});
  EXPECT_EQ(out.str(), "a,b\n0.10000000000000001,0.33333333333333331\n");
  EXPECT_THROW(w.row({1.0}), std::logic_error);
  EXPECT_EQ(std::stod(io::format_number(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Csv, SamplesAndHistogram) {
  std::ostringstream s;
  io::write_samples(s, {{0.5, 0.5}, {0.25, 0.75}});
  EXPECT_EQ(s.str(), "l0,l1\n0.5,0.5\n0.25,0.75\n");
  std::ostringstream h;
  Histogram hist = Histogram::uniform(0.0, 4.0, 2);
  hist.add(1.0);
  const SpectralDensity mp = mp_density();
  io::write_histogram(h, hist.normalized(), &mp);
  EXPECT_EQ(h.str().substr(0, h.str().find('\n')), "bin_left,bin_right,mass,analytic_density_at_center");
}
