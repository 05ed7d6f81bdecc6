#include "gindex/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <regex>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "gindex/coulomb_gas.hpp"
#include "gindex/errors.hpp"
#include "gindex/finite_n_oracle.hpp"
#include "gindex/measure_kernel.hpp"

namespace gindex::cli {
namespace {

using nlohmann::ordered_json;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

constexpr const char* kOutputDirEnv = "GINDEX_OUTPUT_DIR";
constexpr const char* kDefaultNList = "100,200,400,800,1600,3200,6400";

std::string exact(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int> parse_int_list(const std::string& flag, const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(flag, flag + ": '" + item + "' is not an integer");
    }
  }
  if (out.empty()) throw UsageError(flag, flag + ": empty list");
  return out;
}

std::string join(const std::vector<int>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += ',';
    out += std::to_string(values[i]);
  }
  return out;
}

std::string offending_flag(const std::string& message) {
  static const std::regex flag_re("--[A-Za-z][A-Za-z0-9-]*");
  std::smatch m;
  if (std::regex_search(message, m, flag_re)) return m.str();
  return "";
}

void require_radius_below_one(const RunConfig& c) {
  if (!(c.radius > 0.0 && c.radius < 1.0)) {
    throw UsageError("--radius", "--radius must lie in (0, 1), got " + exact(c.radius), true);
  }
}

void require_positive_radius(const RunConfig& c) {
  if (!(c.radius > 0.0) || !std::isfinite(c.radius)) {
    throw UsageError("--radius", "--radius must be positive", true);
  }
}

void require_beta(const RunConfig& c) {
  if (!(c.beta > 0.0)) throw UsageError("--beta", "--beta must be positive", true);
}

void require_n(const RunConfig& c) {
  if (c.n < 1) throw UsageError("--n", "--n must be at least 1", true);
}

void validate_chain_flags(const RunConfig& c) {
  require_n(c);
  require_positive_radius(c);
  require_beta(c);
  if (c.sweeps < 0) throw UsageError("--sweeps", "--sweeps must be nonnegative", true);
  if (c.burn_in < 0) throw UsageError("--burn-in", "--burn-in must be nonnegative", true);
  if (c.thin < 1) throw UsageError("--thin", "--thin must be at least 1", true);
  if (c.sigma < 0.0) throw UsageError("--sigma", "--sigma must be positive (0 = 1/sqrt(n))", true);
  if (c.threads < 1) throw UsageError("--threads", "--threads must be at least 1", true);
  if (!(c.jump_prob >= 0.0 && c.jump_prob <= 1.0)) {
    throw UsageError("--jump-prob", "--jump-prob must lie in [0, 1]", true);
  }
  if (!(c.jump_sigma > 0.0)) throw UsageError("--jump-sigma", "--jump-sigma must be positive", true);
}

ChainConfig chain_config(const RunConfig& c) {
  ChainConfig chain;
  chain.n = c.n;
  chain.radius = c.radius;
  chain.beta = c.beta;
  chain.step_sigma = c.sigma;
  chain.sweeps = c.sweeps;
  chain.burn_in_sweeps = c.burn_in;
  chain.thin = c.thin;
  chain.seed = c.seed;
  chain.sector = c.sector;
  chain.tune_step = c.tune;
  chain.jump_probability = c.jump_prob;
  chain.jump_sigma = c.jump_sigma;
  return chain;
}

std::ofstream open_output(const RunConfig& c, const std::string& name, ExecResult& result) {
  const std::filesystem::path path = std::filesystem::path(c.out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  result.files.push_back(path.string());
  return out;
}

void finish(std::ofstream& out, const std::string& name) {
  out.flush();
  if (!out) throw IoError("write failed for " + name);
}

std::ofstream open_csv(const RunConfig& c, const std::string& name, const std::string& header,
                       ExecResult& result) {
  auto out = open_output(c, name, result);
  out << "# config_echo: " << config_echo(c) << '\n' << header << '\n';
  return out;
}

ordered_json measure_json(const RadialMeasure& mu) {
  ordered_json list = ordered_json::array();
  for (const auto& comp : mu.components) {
    ordered_json j;
    if (const auto* d = std::get_if<Disk>(&comp)) {
      j = {{"kind", "disk"}, {"radius", d->radius}, {"density", d->density}};
    } else if (const auto* a = std::get_if<Annulus>(&comp)) {
      j = {{"kind", "annulus"}, {"inner", a->inner}, {"outer", a->outer}, {"density", a->density}};
    } else if (const auto* c = std::get_if<CircleAtom>(&comp)) {
      j = {{"kind", "circle_atom"}, {"radius", c->radius}, {"mass", c->mass}};
    }
    list.push_back(j);
  }
  return list;
}

void run_psi(const RunConfig& c, ExecResult& result) {
  auto out = open_csv(c, "psi.csv", "p,psi,ld_log_prob", result);
  for (double p : c.grid_points) {
    const ConstraintSpec spec{c.radius, p, c.beta};
    out << format_number(p) << ',' << format_number(psi(spec).psi) << ','
        << format_number(ld_log_prob(spec, c.n)) << '\n';
  }
  finish(out, "psi.csv");
}

void run_measure(const RunConfig& c, ExecResult& result) {
  const ConstraintSpec spec{c.radius, c.fraction, c.beta};
  const RadialMeasure mu = equilibrium_measure(spec);
  ordered_json doc;
  doc["config_echo"] = ordered_json::parse(config_echo(c));
  doc["components"] = measure_json(mu);
  doc["total_mass"] = mu.total_mass();
  doc["index_fraction"] = constrained_index_fraction(mu, spec);
  doc["energy"] = energy_functional(mu, c.beta);
  doc["psi"] = psi(spec).psi;
  auto json_out = open_output(c, "measure.json", result);
  json_out << doc.dump(2) << '\n';
  finish(json_out, "measure.json");

  auto csv = open_csv(c, "measure_cdf.csv", "r,cdf", result);
  constexpr double kMaxRadius = 1.2;
  for (int i = 0; i <= c.bins; ++i) {
    const double r = kMaxRadius * i / c.bins;
    csv << format_number(r) << ',' << format_number(radial_cdf(mu, r)) << '\n';
  }
  finish(csv, "measure_cdf.csv");
}

void run_mc(const RunConfig& c, ExecResult& result) {
  ChainConfig chain = chain_config(c);
  chain.record_samples = true;
  const ChainStats stats = run_chain(chain);

  auto snaps = open_csv(c, "mc_snapshots.csv", "sweep,particle,re,im", result);
  for (const auto& s : stats.samples) {
    for (std::size_t i = 0; i < s.positions.size(); ++i) {
      snaps << s.sweep << ',' << i << ',' << format_number(s.positions[i].real()) << ','
            << format_number(s.positions[i].imag()) << '\n';
    }
  }
  finish(snaps, "mc_snapshots.csv");

  if (!stats.samples.empty()) {
    const RadialHistogram hist = radial_histogram(stats.samples, c.bins);
    auto radial = open_csv(c, "mc_radial.csv", "r_lo,r_hi,density,cdf_hi", result);
    for (std::size_t b = 0; b + 1 < hist.edges.size(); ++b) {
      radial << format_number(hist.edges[b]) << ',' << format_number(hist.edges[b + 1]) << ','
             << format_number(hist.density[b]) << ',' << format_number(hist.cdf[b + 1]) << '\n';
    }
    finish(radial, "mc_radial.csv");
  }

  ordered_json doc;
  doc["acceptance_rate"] = stats.acceptance_rate;
  doc["mean_energy"] = stats.mean_energy;
  ordered_json occupancy = ordered_json::object();
  for (const auto& [k, frac] : stats.sector_occupancy) occupancy[std::to_string(k)] = frac;
  doc["occupancy"] = occupancy;
  doc["step_sigma"] = stats.step_sigma;
  doc["config_echo"] = ordered_json::parse(config_echo(c));
  auto json_out = open_output(c, "mc_stats.json", result);
  json_out << doc.dump(2) << '\n';
  finish(json_out, "mc_stats.json");
}

void run_mc_rate(const RunConfig& c, ExecResult& result) {
  const std::vector<double> ratios = sector_ratios(chain_config(c), c.threads);
  const IndexPMF pmf = reconstruct_log_pmf(ratios);
  const RateCurve curve = empirical_rate(pmf, c.beta);
  auto out = open_csv(c, "mc_rate.csv", "p,psi_hat,psi_theory", result);
  for (const auto& e : curve.entries) {
    const double theory = psi(ConstraintSpec{c.radius, e.fraction, c.beta}).psi;
    out << format_number(e.fraction) << ',' << format_number(e.psi_hat) << ','
        << format_number(theory) << '\n';
  }
  finish(out, "mc_rate.csv");
}

void run_oracle_pmf(const RunConfig& c, ExecResult& result) {
  const IndexPMF pmf = index_pmf_exact(c.n, c.radius);
  auto out = open_csv(c, "oracle_pmf.csv", "k,prob", result);
  for (int k = 0; k <= pmf.n; ++k) out << k << ',' << format_number(pmf.prob(k)) << '\n';
  finish(out, "oracle_pmf.csv");

  const IndexMoments m = index_moments(c.n, c.radius);
  ordered_json doc = {{"n", c.n}, {"radius", c.radius}, {"mean", m.mean}, {"variance", m.variance}};
  doc["config_echo"] = ordered_json::parse(config_echo(c));
  auto json_out = open_output(c, "oracle_moments.json", result);
  json_out << doc.dump(2) << '\n';
  finish(json_out, "oracle_moments.json");
}

void run_oracle_fluct(const RunConfig& c, ExecResult& result) {
  auto out = open_csv(c, "oracle_fluct.csv", "n,mean,variance", result);
  for (int n : c.n_list) {
    const IndexMoments m = index_moments(n, c.radius);
    out << n << ',' << format_number(m.mean) << ',' << format_number(m.variance) << '\n';
  }
  finish(out, "oracle_fluct.csv");
}

void report(std::ostream& err, const std::string& kind, const std::string& message,
            const std::string& flag = "") {
  ordered_json j = {{"error", kind}, {"message", message}};
  if (!flag.empty()) j["flag"] = flag;
  err << j.dump() << '\n';
}

}  // namespace

std::string to_string(Command command) {
  switch (command) {
    case Command::Psi: return "psi";
    case Command::Measure: return "measure";
    case Command::McRun: return "mc-run";
    case Command::McRate: return "mc-rate";
    case Command::OraclePmf: return "oracle-pmf";
    case Command::OracleFluct: return "oracle-fluct";
  }
  return "";
}

std::string format_number(double value) {
  if (value == 0.0) return "0";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

std::vector<double> expand_grid(const std::string& spec) {
  double a = 0.0, b = 0.0, h = 0.0;
  char c1 = 0, c2 = 0;
  std::istringstream in(spec);
  if (!(in >> a >> c1 >> b >> c2 >> h) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof()) {
    throw UsageError("--grid", "--grid expects a:b:h, got '" + spec + "'");
  }
  if (!(h > 0.0)) throw UsageError("--grid", "--grid step must be positive", true);
  if (b < a) throw UsageError("--grid", "--grid end must not precede its start", true);

  const auto count = static_cast<long>(std::floor((b - a) / h + 0.5));
  std::vector<double> points;
  points.reserve(static_cast<std::size_t>(count) + 1);
  for (long i = 0; i <= count; ++i) points.push_back(a + static_cast<double>(i) * h);
  if (std::abs(points.back() - b) <= 1e-9 * h) points.back() = b;
  return points;
}

RunConfig parse_config(const std::vector<std::string>& args) {
  RunConfig c;
  if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0') c.out_dir = dir;

  CLI::App app{"Index statistics of Ginibre matrices: rate function, equilibrium measures, "
               "Coulomb-gas Monte Carlo and exact finite-N oracle"};
  app.name("gindex");
  app.require_subcommand(1);

  std::string sector_text;
  std::string n_list_text = kDefaultNList;
  bool no_tune = false;

  auto add_out = [&](CLI::App* sub) {
    sub->add_option("--out", c.out_dir, "output directory (default $GINDEX_OUTPUT_DIR or .)");
  };

  auto* psi_cmd = app.add_subcommand("psi", "rate function psi_R(p) over a grid of p");
  psi_cmd->add_option("--radius", c.radius)->required();
  psi_cmd->add_option("--grid", c.grid, "a:b:h");
  psi_cmd->add_option("--beta", c.beta);
  psi_cmd->add_option("--n", c.n, "N used for ld_log_prob");
  add_out(psi_cmd);

  auto* measure_cmd = app.add_subcommand("measure", "constrained equilibrium measure");
  measure_cmd->add_option("--radius", c.radius)->required();
  measure_cmd->add_option("--p", c.fraction)->required();
  measure_cmd->add_option("--beta", c.beta);
  measure_cmd->add_option("--bins", c.bins, "CDF samples on [0, 1.2]");
  add_out(measure_cmd);

  auto add_chain_flags = [&](CLI::App* sub) {
    sub->add_option("--n", c.n)->required();
    sub->add_option("--radius", c.radius)->required();
    sub->add_option("--beta", c.beta);
    sub->add_option("--sweeps", c.sweeps);
    sub->add_option("--burn-in", c.burn_in);
    sub->add_option("--seed", c.seed);
    sub->add_option("--sigma", c.sigma, "proposal std per coordinate (0 = 1/sqrt(n))");
    sub->add_flag("--no-tune", no_tune, "keep sigma fixed during burn-in");
    sub->add_option("--jump-prob", c.jump_prob, "probability of a wide move (default 0.2)");
    sub->add_option("--jump-sigma", c.jump_sigma, "std of the wide move (default 0.5)");
    sub->add_option("--threads", c.threads);
    add_out(sub);
  };

  auto* mc_cmd = app.add_subcommand("mc-run", "single (optionally conditioned) chain");
  add_chain_flags(mc_cmd);
  mc_cmd->add_option("--sector", sector_text, "allowed index values, comma separated");
  mc_cmd->add_option("--thin", c.thin);
  mc_cmd->add_option("--bins", c.bins, "radial histogram bins");

  auto* rate_cmd = app.add_subcommand("mc-rate", "rate curve from sector-pair chains");
  add_chain_flags(rate_cmd);

  auto* pmf_cmd = app.add_subcommand("oracle-pmf", "exact finite-N index distribution");
  pmf_cmd->add_option("--n", c.n)->required();
  pmf_cmd->add_option("--radius", c.radius)->required();
  add_out(pmf_cmd);

  auto* fluct_cmd = app.add_subcommand("oracle-fluct", "exact index mean and variance over n");
  fluct_cmd->add_option("--radius", c.radius)->required();
  fluct_cmd->add_option("--n-list", n_list_text, "comma separated particle counts");
  add_out(fluct_cmd);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    std::ostringstream text;
    std::ostringstream ignored;
    app.exit(e, text, ignored);
    throw HelpRequested(text.str());
  } catch (const CLI::ParseError& e) {
    throw UsageError(offending_flag(e.what()), e.what());
  }

  if (psi_cmd->parsed()) c.command = Command::Psi;
  if (measure_cmd->parsed()) c.command = Command::Measure;
  if (mc_cmd->parsed()) c.command = Command::McRun;
  if (rate_cmd->parsed()) c.command = Command::McRate;
  if (pmf_cmd->parsed()) c.command = Command::OraclePmf;
  if (fluct_cmd->parsed()) c.command = Command::OracleFluct;
  c.tune = !no_tune;

  switch (c.command) {
    case Command::Psi:
      require_radius_below_one(c);
      require_beta(c);
      require_n(c);
      c.grid_points = expand_grid(c.grid);
      for (double p : c.grid_points) {
        if (p < 0.0 || p > 1.0) throw UsageError("--grid", "--grid values must lie in [0, 1]", true);
      }
      break;
    case Command::Measure:
      require_radius_below_one(c);
      require_beta(c);
      if (!(c.fraction >= 0.0 && c.fraction <= 1.0)) {
        throw UsageError("--p", "--p must lie in [0, 1]", true);
      }
      if (c.bins < 1) throw UsageError("--bins", "--bins must be positive", true);
      break;
    case Command::McRun:
      validate_chain_flags(c);
      if (!sector_text.empty()) c.sector = parse_int_list("--sector", sector_text);
      if (c.bins < 1) throw UsageError("--bins", "--bins must be positive", true);
      break;
    case Command::McRate:
      validate_chain_flags(c);
      require_radius_below_one(c);
      break;
    case Command::OraclePmf:
      require_n(c);
      require_positive_radius(c);
      break;
    case Command::OracleFluct:
      require_positive_radius(c);
      c.n_list = parse_int_list("--n-list", n_list_text);
      for (int n : c.n_list) {
        if (n < 1) throw UsageError("--n-list", "--n-list entries must be at least 1", true);
      }
      break;
  }
  return c;
}

std::vector<std::string> to_args(const RunConfig& c) {
  std::vector<std::string> a{to_string(c.command)};
  auto add = [&a](const std::string& flag, const std::string& value) {
    a.push_back(flag);
    a.push_back(value);
  };
  switch (c.command) {
    case Command::Psi:
      add("--radius", exact(c.radius));
      add("--grid", c.grid);
      add("--beta", exact(c.beta));
      add("--n", std::to_string(c.n));
      break;
    case Command::Measure:
      add("--radius", exact(c.radius));
      add("--p", exact(c.fraction));
      add("--beta", exact(c.beta));
      add("--bins", std::to_string(c.bins));
      break;
    case Command::McRun:
    case Command::McRate:
      add("--n", std::to_string(c.n));
      add("--radius", exact(c.radius));
      add("--beta", exact(c.beta));
      add("--sweeps", std::to_string(c.sweeps));
      add("--burn-in", std::to_string(c.burn_in));
      add("--seed", std::to_string(c.seed));
      add("--sigma", exact(c.sigma));
      add("--threads", std::to_string(c.threads));
      if (!c.tune) a.push_back("--no-tune");
      add("--jump-prob", exact(c.jump_prob));
      add("--jump-sigma", exact(c.jump_sigma));
      if (c.command == Command::McRun) {
        if (!c.sector.empty()) add("--sector", join(c.sector));
        add("--thin", std::to_string(c.thin));
        add("--bins", std::to_string(c.bins));
      }
      break;
    case Command::OraclePmf:
      add("--n", std::to_string(c.n));
      add("--radius", exact(c.radius));
      break;
    case Command::OracleFluct:
      add("--radius", exact(c.radius));
      add("--n-list", join(c.n_list));
      break;
  }
  return a;
}

std::string config_echo(const RunConfig& c) {
  // The output directory is deliberately left out: it does not affect any
  // computed value, and leaving it out keeps files byte-identical across
  // destinations.
  ordered_json j;
  j["command"] = to_string(c.command);
  j["args"] = to_args(c);
  return j.dump();
}

RunConfig config_from_echo(const std::string& echo_json) {
  const auto j = ordered_json::parse(echo_json);
  return parse_config(j.at("args").get<std::vector<std::string>>());
}

ExecResult execute(const RunConfig& config, std::ostream& err) {
  ExecResult result;
  try {
    std::error_code ec;
    std::filesystem::create_directories(config.out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + config.out_dir + ": " + ec.message());
    switch (config.command) {
      case Command::Psi: run_psi(config, result); break;
      case Command::Measure: run_measure(config, result); break;
      case Command::McRun: run_mc(config, result); break;
      case Command::McRate: run_mc_rate(config, result); break;
      case Command::OraclePmf: run_oracle_pmf(config, result); break;
      case Command::OracleFluct: run_oracle_fluct(config, result); break;
    }
  } catch (const IoError& e) {
    report(err, "io", e.what());
    result.status = kIo;
  } catch (const DomainError& e) {
    report(err, "domain", e.what());
    result.status = kDomain;
  } catch (const ConfigurationError& e) {
    report(err, "configuration", e.what());
    result.status = kRuntime;
  } catch (const InsufficientSamplingError& e) {
    report(err, "insufficient_sampling", e.what());
    result.status = kRuntime;
  } catch (const std::exception& e) {
    report(err, "runtime", e.what());
    result.status = kRuntime;
  }
  return result;
}

int run(const std::vector<std::string>& args, std::ostream& err) {
  RunConfig config;
  try {
    config = parse_config(args);
  } catch (const HelpRequested& help) {
    std::cout << help.what();
    return kOk;
  } catch (const UsageError& e) {
    report(err, e.is_domain_error() ? "domain" : "usage", e.what(), e.flag());
    return e.is_domain_error() ? kDomain : kUsage;
  }
  return execute(config, err).status;
}

}  // namespace gindex::cli
