// isospectra: figure data and validation reports for typical entanglement
// spectra at fixed von Neumann entropy.
//
// Exit codes: 0 success, 2 invalid input, 3 quality gate failed (--strict).

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "isospectra/isospectra.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace isospectra;

namespace {

constexpr const char* kToolVersion = "0.1.0";
constexpr int kExitInvalid = 2;
constexpr int kExitQuality = 3;

// Anything the user got wrong; mapped to exit code 2.
struct InvalidInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Manifest {
  std::string command;
  json parameters = json::object();
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> artifacts;
  std::vector<std::string> argv;
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

  void write(const fs::path& path) const {
    json j;
    j["command"] = command;
    j["parameters"] = parameters;
    j["seeds"] = seeds;
    j["artifacts"] = artifacts;
    j["tool_version"] = kToolVersion;
    j["argv"] = argv;
    j["wall_clock_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::ofstream out(path);
    out << j.dump(2) << '\n';
  }
};

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write '" + path.string() + "'");
  return out;
}

fs::path manifest_beside(const fs::path& file) {
  fs::path m = file;
  m.replace_extension(".manifest.json");
  return m;
}

// --seed, then the config file, then ISOSPECTRA_SEED, then 1.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, std::optional<std::uint64_t> config = {}) {
  if (flag) return *flag;
  if (config) return *config;
  if (const char* env = std::getenv("ISOSPECTRA_SEED")) {
    try {
      std::size_t used = 0;
      const unsigned long long v = std::stoull(env, &used);
      if (used == std::string(env).size()) return v;
    } catch (const std::exception&) {
    }
    throw InvalidInput(std::string("ISOSPECTRA_SEED is not a non-negative integer: '") + env + "'");
  }
  return 1;
}

json to_json(const SampleSummary& s) {
  return {{"count", s.count},     {"mean_u", s.mean_u}, {"std_u", s.std_u},
          {"se_u", s.se_u},       {"mean_s", s.mean_s}, {"std_s", s.std_s},
          {"se_s", s.se_s},       {"mean_entropy", s.mean_entropy}};
}

double s_on_beta(double beta) { return beta > kBetaCritical ? branch::s_gapped(beta) : branch::s_gapless(beta); }

// ---------------------------------------------------------------- curve

struct CurveArgs {
  int n_dim = 50;
  int points = 100;
  std::vector<double> u_values;
  std::optional<double> u_min, u_max, beta_min, beta_max;
  std::string out = "curve.csv";
};

int cmd_curve(const CurveArgs& a, Manifest& m) {
  if (a.n_dim < 2) throw InvalidInput("--n-dim must be >= 2");
  const double log_n = std::log(static_cast<double>(a.n_dim));
  const bool beta_mode = a.beta_min || a.beta_max;
  if (beta_mode && (a.u_min || a.u_max || !a.u_values.empty())) {
    throw InvalidInput("give either a u range or a beta range, not both");
  }

  struct Row {
    double u, beta;
    bool boundary;
  };
  std::vector<Row> rows;
  if (beta_mode) {
    const double lo = a.beta_min.value_or(0.0), hi = a.beta_max.value_or(10.0);
    if (a.points < 1 || !(lo >= 0.0) || !(hi >= lo)) throw InvalidInput("invalid beta range");
    for (int i = 0; i < a.points; ++i) {
      const double b = a.points == 1 ? lo : lo + (hi - lo) * i / (a.points - 1);
      rows.push_back({u_of_beta(InverseTemperature(b)).value, b, b == 0.0 || b == kBetaCritical});
    }
  } else {
    std::vector<double> grid = a.u_values;
    if (grid.empty()) {
      const double lo = a.u_min.value_or(0.02), hi = a.u_max.value_or(log_n - 0.02);
      if (a.points < 1 || !(lo > 0.0) || !(hi >= lo)) throw InvalidInput("invalid u range");
      for (int i = 0; i < a.points; ++i) grid.push_back(a.points == 1 ? lo : lo + (hi - lo) * i / (a.points - 1));
      for (double special : {kUCritical, 0.5}) {
        if (special >= lo && special <= hi) grid.push_back(special);
      }
    }
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (double u : grid) {
      if (!(u > 0.0 && u <= log_n)) throw InvalidInput("u = " + io::format_number(u) + " outside (0, ln N]");
      const double beta = u > 0.5 ? std::nan("") : beta_of_u(EntropyDeficit(u)).value;
      rows.push_back({u, beta, u == kUCritical || u == 0.5});
    }
  }
  if (rows.empty()) throw InvalidInput("empty grid");

  const double n2 = static_cast<double>(a.n_dim) * a.n_dim;
  std::ofstream out = open_output(a.out);
  io::CsvWriter w(out, {"u", "beta", "s", "N2s", "phase", "at_boundary"});
  for (const Row& r : rows) {
    const EntropyDeficit u(r.u, a.n_dim);
    const double s = beta_mode ? s_on_beta(r.beta) : entropy_density_s(u);
    const Phase phase = beta_mode ? phase_of(InverseTemperature(r.beta)) : phase_of(u);
    w.write_row({io::format_number(r.u), io::format_number(r.beta), io::format_number(s), io::format_number(n2 * s),
                 to_string(phase), r.boundary ? "1" : "0"});
  }
  m.parameters = {{"n_dim", a.n_dim}, {"points", a.points}, {"rows", rows.size()}};
  m.artifacts.push_back(a.out);
  m.write(manifest_beside(a.out));
  return 0;
}

// ------------------------------------------------------------- spectrum

struct SpectrumArgs {
  std::optional<double> beta, u, eta;
  int n_dim = 50;
  int points = 200;
  bool deformation = false;
  std::string out = "spectrum.csv";
};

int cmd_spectrum(const SpectrumArgs& a, Manifest& m) {
  if (a.points < 1) throw InvalidInput("--points must be >= 1");
  std::ofstream out = open_output(a.out);
  m.artifacts.push_back(a.out);
  m.parameters = {{"points", a.points}};

  if (a.deformation) {
    if (a.beta || a.u) throw InvalidInput("--deformation takes --eta, not --beta/--u");
    io::CsvWriter w(out, {"x", a.eta ? "g" : "g_tilde"});
    for (int i = 0; i < a.points; ++i) {
      const double x = -1.0 + 2.0 * (i + 0.5) / a.points;
      w.row({x, a.eta ? quadrature::deformation_g(x, *a.eta) : quadrature::deformation_g_tilde(x)});
    }
    m.parameters["deformation"] = true;
    if (a.eta) m.parameters["eta"] = *a.eta;
    m.write(manifest_beside(a.out));
    return 0;
  }

  if (a.beta.has_value() == a.u.has_value()) throw InvalidInput("give exactly one of --beta or --u");
  std::optional<SpectralDensity> density;
  if (a.beta) {
    density = sigma(InverseTemperature(*a.beta));
    m.parameters["beta"] = *a.beta;
  } else {
    m.parameters["u"] = *a.u;
    if (*a.u > 0.5) {
      m.parameters["n_dim"] = a.n_dim;
      density = evaporated_spectrum(EntropyDeficit(*a.u, a.n_dim));
    } else {
      density = sigma(beta_of_u(EntropyDeficit(*a.u)));
    }
  }

  const SupportInterval s = density->support();
  io::CsvWriter w(out, {"lambda", "sigma"});
  for (int i = 0; i < a.points; ++i) {
    const double lambda = s.a + s.width() * (i + 0.5) / a.points;
    w.row({lambda, (*density)(lambda)});
  }
  if (const auto& atom = density->atom()) {
    fs::path atom_path = a.out;
    atom_path.replace_filename(atom_path.stem().string() + "_atom.csv");
    std::ofstream atom_out = open_output(atom_path);
    io::CsvWriter aw(atom_out, {"mu", "mass"});
    aw.row({atom->position, atom->weight});
    m.artifacts.push_back(atom_path.string());
  }
  m.write(manifest_beside(a.out));
  return 0;
}

// ------------------------------------------------------------------ gas

struct GasArgs {
  std::string config;
  std::string out = "gas_out";
  std::optional<int> n_dim, chains, bins;
  std::optional<double> beta;
  std::optional<long> steps, burn_in, thin;
  std::optional<std::uint64_t> seed;
  bool strict = false;
};

int cmd_gas(const GasArgs& a, Manifest& m) {
  io::GasJob job;
  if (!a.config.empty()) job = io::load_gas_config(a.config);
  ChainConfig& c = job.chain;
  if (a.n_dim) c.n_dim = *a.n_dim;
  if (a.beta) c.beta = *a.beta;
  if (a.steps) c.steps = *a.steps;
  if (a.burn_in) c.burn_in = *a.burn_in;
  if (a.thin) c.thinning = *a.thin;
  if (a.chains) job.chains = *a.chains;
  c.seed = resolve_seed(a.seed, job.seed_set ? std::optional<std::uint64_t>(c.seed) : std::nullopt);
  if (!a.seed) {
    m.argv.push_back("--seed");
    m.argv.push_back(std::to_string(c.seed));
  }
  c.validate();
  if (job.chains < 1) throw InvalidInput("chains must be >= 1");
  const int bins = a.bins.value_or(kDefaultBins);
  if (bins < 1) throw InvalidInput("--bins must be >= 1");

  const ChainResult r = run_chains(c, job.chains);
  const SampleSummary summary = summarize(r);
  const InverseTemperature beta(c.beta);
  const SpectralDensity density = sigma(beta);
  const Histogram hist = spectrum_histogram(r.samples, density.support(), bins);

  const fs::path dir = a.out;
  fs::create_directories(dir);
  {
    std::ofstream f = open_output(dir / "samples.csv");
    io::write_samples(f, r.samples);
  }
  {
    std::ofstream f = open_output(dir / "u_trace.csv");
    io::CsvWriter w(f, {"sweep", "u"});
    for (std::size_t i = 0; i < r.empirical_u_trace.size(); ++i) {
      w.row({static_cast<double>(i), r.empirical_u_trace[i]});
    }
  }
  {
    std::ofstream f = open_output(dir / "histogram.csv");
    io::write_histogram(f, hist, &density);
  }
  json summary_json = to_json(summary);
  summary_json["n_dim"] = c.n_dim;
  summary_json["beta"] = c.beta;
  summary_json["chains"] = job.chains;
  summary_json["acceptance_rate"] = r.acceptance_rate;
  summary_json["move_scale"] = r.move_scale;
  summary_json["u_theory"] = u_of_beta(beta).value;
  summary_json["s_theory"] = s_on_beta(c.beta);
  summary_json["l1_to_analytic"] = l1_distance(hist, density);
  summary_json["ks_to_analytic"] = ks_distance(hist, density);
  summary_json["histogram_noise"] = r.samples.size() >= 2 ? split_half_noise(r.samples, hist, c.n_dim) : 0.0;
  summary_json["max_log_weight_drift"] = r.max_log_weight_drift;
  summary_json["max_renormalization"] = r.max_renormalization;
  summary_json["warnings"] = r.warnings;
  {
    std::ofstream f = open_output(dir / "summary.json");
    f << summary_json.dump(2) << '\n';
  }
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';

  m.parameters = {{"n_dim", c.n_dim},       {"beta", c.beta},           {"steps", c.steps},
                  {"burn_in", c.burn_in},   {"thinning", c.thinning},   {"move_scale", c.effective_move_scale()},
                  {"autotune", c.autotune}, {"min_gap", c.effective_min_gap()},
                  {"init", to_string(c.init)}, {"chains", job.chains}, {"bins", bins}};
  for (int i = 0; i < job.chains; ++i) m.seeds.push_back(c.seed + static_cast<std::uint64_t>(i));
  for (const char* f : {"samples.csv", "u_trace.csv", "histogram.csv", "summary.json"}) {
    m.artifacts.push_back((dir / f).string());
  }
  m.write(dir / "manifest.json");
  return a.strict && !r.warnings.empty() ? kExitQuality : 0;
}

// ----------------------------------------------------------------- haar

struct HaarArgs {
  int n_dim = 32;
  int draws = 1000;
  std::optional<double> u;
  std::optional<std::uint64_t> seed;
  std::optional<int> bins;
  std::string out = "haar_out";
};

int cmd_haar(const HaarArgs& a, Manifest& m) {
  if (a.n_dim < 1) throw InvalidInput("--n-dim must be >= 1");
  if (a.draws < 1) throw InvalidInput("--draws must be >= 1");
  const int bins = a.bins.value_or(kDefaultBins);
  if (bins < 1) throw InvalidInput("--bins must be >= 1");
  const std::uint64_t seed = resolve_seed(a.seed);
  if (!a.seed) {
    m.argv.push_back("--seed");
    m.argv.push_back(std::to_string(seed));
  }
  std::mt19937_64 rng(seed);

  std::vector<std::vector<double>> samples;
  samples.reserve(a.draws);
  for (int d = 0; d < a.draws; ++d) {
    samples.push_back(a.u ? sample_evaporated(*a.u, a.n_dim, rng) : sample_haar_spectrum(a.n_dim, rng));
  }
  const SampleSummary summary = summarize(samples);
  const double log_n = std::log(static_cast<double>(a.n_dim));

  const fs::path dir = a.out;
  fs::create_directories(dir);
  {
    std::ofstream f = open_output(dir / "samples.csv");
    io::write_samples(f, samples);
  }
  json summary_json = to_json(summary);
  summary_json["n_dim"] = a.n_dim;
  summary_json["draws"] = a.draws;
  m.artifacts.push_back((dir / "samples.csv").string());

  const SpectralDensity mp = mp_density();
  if (a.n_dim >= 2) {
    Histogram hist = a.u ? sea_histogram(samples, *a.u / log_n, mp.support(), bins)
                         : spectrum_histogram(samples, mp.support(), bins);
    std::ofstream f = open_output(dir / "histogram.csv");
    io::write_histogram(f, hist, &mp);
    summary_json["l1_to_mp"] = l1_distance(hist, mp);
    summary_json["ks_to_mp"] = ks_distance(hist, mp);
    m.artifacts.push_back((dir / "histogram.csv").string());
  }
  if (a.u) {
    summary_json["u"] = *a.u;
    summary_json["mu"] = *a.u / log_n;
    summary_json["entropy_prediction"] = log_n - *a.u;
  } else {
    summary_json["page_value"] = log_n - 0.5;
  }
  {
    std::ofstream f = open_output(dir / "summary.json");
    f << summary_json.dump(2) << '\n';
  }
  m.artifacts.push_back((dir / "summary.json").string());
  m.parameters = {{"n_dim", a.n_dim}, {"draws", a.draws}, {"bins", bins}};
  if (a.u) m.parameters["u"] = *a.u;
  m.seeds.push_back(seed);
  m.write(dir / "manifest.json");
  return 0;
}

// ---------------------------------------------------------- transitions

struct TransitionArgs {
  int n_dim = 50;
  TransitionGrid grid;
  std::string out = "transitions.json";
};

int cmd_transitions(const TransitionArgs& a, Manifest& m) {
  if (a.n_dim < 3) throw InvalidInput("--n-dim must be >= 3");
  const TransitionReport r = detect_transitions(a.n_dim, a.grid);
  json j;
  j["n_dim"] = r.n_dim;
  j["u_c"] = r.u_c;
  j["half_first_jump"] = r.half_first_jump;
  j["half_first_jump_times_log_n"] = r.half_first_jump_times_log_n;
  j["detected"] = json::array();
  for (const auto& d : r.detected) {
    j["detected"].push_back({{"u", d.u}, {"lowest_order", d.lowest_order}, {"value_gap", d.value_gap}});
  }
  j["one_sided_derivatives"] = json::array();
  for (const auto& row : r.one_sided_derivatives) {
    j["one_sided_derivatives"].push_back({{"u", row.u},
                                          {"order", row.order},
                                          {"left", row.left},
                                          {"right", row.right},
                                          {"jump", row.jump},
                                          {"noise", row.noise},
                                          {"flagged", row.flagged}});
  }
  std::ofstream out = open_output(a.out);
  out << j.dump(2) << '\n';
  m.parameters = {{"n_dim", a.n_dim},
                  {"points", a.grid.points},
                  {"step", a.grid.step},
                  {"threshold", a.grid.threshold},
                  {"u_min", a.grid.u_min},
                  {"top_margin", a.grid.top_margin}};
  m.artifacts.push_back(a.out);
  m.write(manifest_beside(a.out));
  return 0;
}

int run(const std::vector<std::string>& args);

int cmd_rerun(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw InvalidInput("cannot open manifest '" + manifest_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed manifest: ") + e.what());
  }
  if (!j.contains("argv") || !j["argv"].is_array()) throw InvalidInput("manifest has no argv");
  return run(j["argv"].get<std::vector<std::string>>());
}

int run(const std::vector<std::string>& args) {
  CLI::App app{"Typical entanglement spectra at fixed von Neumann entropy"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  CurveArgs curve;
  auto* c = app.add_subcommand("curve", "beta(u), s(u) and N^2 s(u) over a grid");
  c->add_option("--n-dim", curve.n_dim, "dimension N");
  c->add_option("--points", curve.points, "grid size");
  c->add_option("--u", curve.u_values, "explicit u values (repeatable)");
  c->add_option("--u-min", curve.u_min);
  c->add_option("--u-max", curve.u_max);
  c->add_option("--beta-min", curve.beta_min);
  c->add_option("--beta-max", curve.beta_max);
  c->add_option("--out", curve.out, "CSV path");

  SpectrumArgs spec;
  auto* s = app.add_subcommand("spectrum", "sigma(lambda), or the deformation function with --deformation");
  s->add_option("--beta", spec.beta);
  s->add_option("--u", spec.u);
  s->add_option("--n-dim", spec.n_dim, "N, needed for u > 1/2");
  s->add_option("--points", spec.points);
  s->add_flag("--deformation", spec.deformation, "emit g(x, eta), or g~(x) without --eta");
  s->add_option("--eta", spec.eta);
  s->add_option("--out", spec.out, "CSV path");

  GasArgs gas;
  auto* g = app.add_subcommand("gas", "Coulomb gas Metropolis chain");
  g->add_option("--config", gas.config, "key = value file");
  g->add_option("--n-dim", gas.n_dim);
  g->add_option("--beta", gas.beta);
  g->add_option("--steps", gas.steps, "sweeps including burn-in");
  g->add_option("--burn-in", gas.burn_in);
  g->add_option("--thin", gas.thin);
  g->add_option("--seed", gas.seed);
  g->add_option("--chains", gas.chains, "independent chains, seeds seed..seed+k-1");
  g->add_option("--bins", gas.bins);
  g->add_option("--out", gas.out, "output directory");
  g->add_flag("--strict", gas.strict, "exit 3 when the acceptance rate is out of band");

  HaarArgs haar;
  auto* h = app.add_subcommand("haar", "Haar-random Schmidt spectra (evaporated phase with --u)");
  h->add_option("--n-dim", haar.n_dim);
  h->add_option("--draws", haar.draws);
  h->add_option("--u", haar.u, "1/2 < u <= ln N samples the evaporated phase");
  h->add_option("--seed", haar.seed);
  h->add_option("--bins", haar.bins);
  h->add_option("--out", haar.out, "output directory");

  TransitionArgs tr;
  auto* t = app.add_subcommand("transitions", "derivative jumps of s(u)");
  t->add_option("--n-dim", tr.n_dim);
  t->add_option("--points", tr.grid.points);
  t->add_option("--step", tr.grid.step);
  t->add_option("--threshold", tr.grid.threshold);
  t->add_option("--out", tr.out, "JSON path");

  std::string manifest_path;
  auto* rr = app.add_subcommand("rerun", "repeat the command recorded in a manifest");
  rr->add_option("manifest", manifest_path)->required();

  std::vector<std::string> argv_store{"isospectra"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kExitInvalid;
  }

  Manifest m;
  m.argv = args;
  try {
    if (*rr) return cmd_rerun(manifest_path);
    for (auto* sub : app.get_subcommands()) m.command = sub->get_name();
    if (*c) return cmd_curve(curve, m);
    if (*s) return cmd_spectrum(spec, m);
    if (*g) return cmd_gas(gas, m);
    if (*h) return cmd_haar(haar, m);
    if (*t) return cmd_transitions(tr, m);
  } catch (const InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) { return run(std::vector<std::string>(argv + 1, argv + argc)); }
