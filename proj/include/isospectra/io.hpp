#pragma once

// Plain-text chain configs (key = value, '#' comments) and CSV output with
// 17 significant digits.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "isospectra/coulomb_gas.hpp"
#include "isospectra/empirics.hpp"
#include "isospectra/spectral_density.hpp"

namespace isospectra::io {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline double to_double(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw std::invalid_argument("config: '" + key + "' expects a number, got '" + v + "'");
  return x;
}

inline long to_long(const std::string& key, const std::string& v) {
  std::size_t used = 0;
  long x = 0;
  try {
    x = std::stol(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size()) throw std::invalid_argument("config: '" + key + "' expects an integer, got '" + v + "'");
  return x;
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("config: '" + key + "' expects true/false, got '" + v + "'");
}

}  // namespace detail

// Keys: n_dim beta steps burn_in thinning seed move_scale autotune min_gap
// init custom_init (comma separated) chains. Unknown keys are errors.
struct GasJob {
  ChainConfig chain;
  int chains = 1;
  bool seed_set = false;  // seed given explicitly in the file
};

inline void apply_config_entry(GasJob& job, const std::string& key, const std::string& value) {
  ChainConfig& c = job.chain;
  if (key == "n_dim") {
    c.n_dim = static_cast<int>(detail::to_long(key, value));
  } else if (key == "beta") {
    c.beta = detail::to_double(key, value);
  } else if (key == "steps") {
    c.steps = detail::to_long(key, value);
  } else if (key == "burn_in") {
    c.burn_in = detail::to_long(key, value);
  } else if (key == "thinning") {
    c.thinning = detail::to_long(key, value);
  } else if (key == "seed") {
    const long seed = detail::to_long(key, value);
    if (seed < 0) throw std::invalid_argument("config: seed must be >= 0");
    c.seed = static_cast<std::uint64_t>(seed);
    job.seed_set = true;
  } else if (key == "move_scale") {
    c.move_scale = detail::to_double(key, value);
  } else if (key == "autotune") {
    c.autotune = detail::to_bool(key, value);
  } else if (key == "min_gap") {
    c.min_gap = detail::to_double(key, value);
  } else if (key == "init") {
    c.init = init_kind_from_string(value);
  } else if (key == "custom_init") {
    c.custom_init.clear();
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) c.custom_init.push_back(detail::to_double(key, trim(item)));
  } else if (key == "chains") {
    job.chains = static_cast<int>(detail::to_long(key, value));
  } else {
    throw std::invalid_argument("config: unknown key '" + key + "'");
  }
}

inline GasJob parse_gas_config(std::istream& in, GasJob job = {}) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(number) + ": expected key = value");
    }
    apply_config_entry(job, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return job;
}

inline GasJob load_gas_config(const std::string& path, GasJob job = {}) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  return parse_gas_config(in, job);
}

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, const std::vector<std::string>& header) : out_(out), columns_(header.size()) {
    write_row(header);
  }

  void row(const std::vector<double>& values) {
    std::vector<std::string> cells;
    cells.reserve(values.size());
    for (double v : values) cells.push_back(format_number(v));
    write_row(cells);
  }

  void write_row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw std::logic_error("CsvWriter: row width does not match header");
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

 private:
  std::ostream& out_;
  std::size_t columns_;
};

// One row per sample, columns l0..l{N-1}.
inline void write_samples(std::ostream& out, const std::vector<std::vector<double>>& samples) {
  if (samples.empty()) {
    out << "l0\n";
    return;
  }
  std::vector<std::string> header;
  for (std::size_t k = 0; k < samples.front().size(); ++k) header.push_back("l" + std::to_string(k));
  CsvWriter w(out, header);
  for (const auto& s : samples) w.row(s);
}

// bin_left, bin_right, mass, analytic_density_at_center
inline void write_histogram(std::ostream& out, const Histogram& h, const SpectralDensity* density) {
  CsvWriter w(out, {"bin_left", "bin_right", "mass", "analytic_density_at_center"});
  for (int i = 0; i < h.bins(); ++i) {
    double analytic = std::numeric_limits<double>::quiet_NaN();
    if (density) {
      try {
        analytic = (*density)(h.center(i));
      } catch (const std::domain_error&) {
      }
    }
    w.row({h.edges[i], h.edges[i + 1], h.masses[i], analytic});
  }
}

}  // namespace isospectra::io
