#include "gindex/coulomb_gas.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <thread>

#include "gindex/errors.hpp"

namespace gindex {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Energy change of moving particle k to z_new, or NaN if z_new coincides
// with another particle. The pair part is sum_j ln(|z_new - z_j|^2 / |z_k - z_j|^2),
// accumulated as a product with a binary exponent so only one log is taken.
double delta_or_nan(std::span<const Point> pos, int k, Point z_new) {
  const auto kk = static_cast<std::size_t>(k);
  const Point z_old = pos[kk];
  double mantissa = 1.0;
  long exponent = 0;
  for (std::size_t j = 0; j < pos.size(); ++j) {
    if (j == kk) continue;
    const double new_sq = std::norm(z_new - pos[j]);
    if (new_sq == 0.0) return kNaN;
    mantissa *= new_sq / std::norm(z_old - pos[j]);
    if (mantissa < 1e-150 || mantissa > 1e150) {
      int e = 0;
      mantissa = std::frexp(mantissa, &e);
      exponent += e;
    }
  }
  const double pair_change = std::log(mantissa) + static_cast<double>(exponent) * std::numbers::ln2;
  const double n = static_cast<double>(pos.size());
  return n * (std::norm(z_new) - std::norm(z_old)) - pair_change;
}

Point uniform_in_annulus(double inner, double outer, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double r = std::sqrt(inner * inner + unit(rng) * (outer * outer - inner * inner));
  const double theta = 2.0 * std::numbers::pi * unit(rng);
  return std::polar(r, theta);
}

}  // namespace

double total_energy(std::span<const Point> positions) {
  const std::size_t n = positions.size();
  double confinement = 0.0;
  double pair = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    confinement += std::norm(positions[i]);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d2 = std::norm(positions[i] - positions[j]);
      if (d2 == 0.0) {
        throw SingularConfigurationError("particles " + std::to_string(i) + " and " +
                                         std::to_string(j) + " coincide");
      }
      pair += std::log(d2);  // 2 ln|d| = ln d^2
    }
  }
  return static_cast<double>(n) * confinement - pair;
}

int count_outside(std::span<const Point> positions, double radius) {
  return static_cast<int>(std::count_if(positions.begin(), positions.end(),
                                        [radius](Point z) { return std::abs(z) > radius; }));
}

GasState::GasState(std::vector<Point> positions, double radius)
    : positions_(std::move(positions)),
      radius_(radius),
      energy_(total_energy(positions_)),
      index_(count_outside(positions_, radius_)) {}

double GasState::move_delta(int k, Point z_new) const {
  if (k < 0 || k >= n()) throw std::out_of_range("particle index out of range");
  const double delta = delta_or_nan(positions_, k, z_new);
  if (std::isnan(delta)) {
    throw SingularConfigurationError("proposed position coincides with another particle");
  }
  return delta;
}

int GasState::index_after(int k, Point z_new) const {
  const auto kk = static_cast<std::size_t>(k);
  const int was_out = std::abs(positions_[kk]) > radius_;
  const int is_out = std::abs(z_new) > radius_;
  return index_ - was_out + is_out;
}

void GasState::apply_move(int k, Point z_new, double delta) {
  const int new_index = index_after(k, z_new);
  positions_[static_cast<std::size_t>(k)] = z_new;
  energy_ += delta;
  index_ = new_index;
}

void GasState::resync() {
  energy_ = total_energy(positions_);
  index_ = count_outside(positions_, radius_);
}

double ChainConfig::effective_sigma() const {
  return step_sigma > 0.0 ? step_sigma : 1.0 / std::sqrt(static_cast<double>(n));
}

bool ChainConfig::allows(int index) const {
  return sector.empty() || std::find(sector.begin(), sector.end(), index) != sector.end();
}

double ChainConfig::log_weight(int index) const {
  if (sector_log_weight.empty()) return 0.0;
  const auto it = std::find(sector.begin(), sector.end(), index);
  return it == sector.end() ? 0.0 : sector_log_weight[static_cast<std::size_t>(it - sector.begin())];
}

void validate(const ChainConfig& config) {
  if (config.n < 1) throw ConfigurationError("chain needs at least one particle");
  if (!(config.radius > 0.0)) throw ConfigurationError("radius must be positive");
  if (!(config.beta > 0.0)) throw ConfigurationError("beta must be positive");
  if (config.step_sigma < 0.0) throw ConfigurationError("step_sigma must be positive");
  if (config.sweeps < 0 || config.burn_in_sweeps < 0) {
    throw ConfigurationError("sweep counts must be nonnegative");
  }
  if (config.thin < 1) throw ConfigurationError("thin must be at least 1");
  if (!(config.jump_probability >= 0.0 && config.jump_probability <= 1.0)) {
    throw ConfigurationError("jump_probability must lie in [0, 1]");
  }
  if (config.jump_probability > 0.0 && !(config.jump_sigma > 0.0)) {
    throw ConfigurationError("jump_sigma must be positive");
  }
  for (int k : config.sector) {
    if (k < 0 || k > config.n) {
      throw ConfigurationError("sector value " + std::to_string(k) + " is outside [0, " +
                               std::to_string(config.n) + "]");
    }
  }
  if (!config.sector_log_weight.empty() && config.sector_log_weight.size() != config.sector.size()) {
    throw ConfigurationError("sector_log_weight must have one entry per sector value");
  }
  for (double w : config.sector_log_weight) {
    if (!std::isfinite(w)) throw ConfigurationError("sector_log_weight entries must be finite");
  }
}

double acceptance_probability(double delta, double beta, double log_weight_change) {
  const double log_a = -0.5 * beta * delta + log_weight_change;
  if (log_a >= 0.0) return 1.0;
  return std::exp(log_a);
}

bool metropolis_step(GasState& state, const ChainConfig& config, Rng& rng) {
  return metropolis_step(state, config, config.effective_sigma(), rng);
}

bool metropolis_step(GasState& state, const ChainConfig& config, double sigma, Rng& rng) {
  std::uniform_int_distribution<int> pick(0, state.n() - 1);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (config.jump_probability > 0.0 && unit(rng) < config.jump_probability) sigma = config.jump_sigma;
  std::normal_distribution<double> gauss(0.0, sigma);

  const int k = pick(rng);
  const double dx = gauss(rng);
  const double dy = gauss(rng);
  const Point z_new = state.positions()[static_cast<std::size_t>(k)] + Point(dx, dy);

  const int new_index = state.index_after(k, z_new);
  if (!config.allows(new_index)) return false;
  const double delta = delta_or_nan(state.positions(), k, z_new);
  if (std::isnan(delta)) return false;
  const double dw =
      new_index == state.index() ? 0.0 : config.log_weight(new_index) - config.log_weight(state.index());
  const double a = acceptance_probability(delta, config.beta, dw);
  if (a < 1.0 && unit(rng) >= a) return false;
  state.apply_move(k, z_new, delta);
  return true;
}

GasState initial_state(int n, double radius, int k, Rng& rng) {
  if (k < 0 || k > n) throw ConfigurationError("initial index outside [0, n]");
  const double nn = static_cast<double>(n);
  const double out_inner = std::max(radius, std::sqrt(1.0 - k / nn));
  const double out_outer = out_inner < 1.0 ? 1.0 : out_inner + 1.0 / std::sqrt(nn);
  const double in_outer = std::min(radius, std::sqrt((n - k) / nn));

  std::vector<Point> positions;
  positions.reserve(static_cast<std::size_t>(n));
  auto distinct = [&](Point z) {
    return std::none_of(positions.begin(), positions.end(), [z](Point w) { return w == z; });
  };
  while (static_cast<int>(positions.size()) < k) {
    const Point z = uniform_in_annulus(out_inner, out_outer, rng);
    if (std::abs(z) > radius && distinct(z)) positions.push_back(z);
  }
  while (static_cast<int>(positions.size()) < n) {
    const Point z = uniform_in_annulus(0.0, in_outer, rng);
    if (std::abs(z) <= radius && distinct(z)) positions.push_back(z);
  }
  return GasState(std::move(positions), radius);
}

int initial_index(const ChainConfig& config) {
  const int typical = static_cast<int>(
      std::lround(config.n * std::max(0.0, 1.0 - config.radius * config.radius)));
  if (config.sector.empty()) return typical;
  int best = config.sector.front();
  for (int k : config.sector) {
    if (std::abs(k - typical) < std::abs(best - typical) ||
        (std::abs(k - typical) == std::abs(best - typical) && k < best)) {
      best = k;
    }
  }
  return best;
}

ChainStats run_chain(const ChainConfig& config) {
  validate(config);
  Rng rng(config.seed);
  const int start = initial_index(config);
  GasState state = initial_state(config.n, config.radius, start, rng);
  double sigma = config.effective_sigma();

  // Relaxation at the starting index keeps the state feasible for any sector.
  ChainConfig pinned = config;
  pinned.sector = {start};
  const long moves_per_sweep = config.n;
  for (int s = 0; s < config.relaxation_sweeps; ++s) {
    for (long m = 0; m < moves_per_sweep; ++m) metropolis_step(state, pinned, sigma, rng);
  }

  // Weights live in a working copy so the caller's config stays untouched.
  ChainConfig active = config;
  const std::size_t states = config.sector.size();
  const bool adapt = config.adapt_weights && states >= 2;
  if (active.sector_log_weight.empty() && states > 0) active.sector_log_weight.assign(states, 0.0);
  std::vector<long> window_visits(states, 0);
  std::vector<double> gain(states, 2.0);
  std::vector<int> last_sign(states, 0);
  auto slot = [&](int index) {
    return static_cast<std::size_t>(std::find(config.sector.begin(), config.sector.end(), index) -
                                    config.sector.begin());
  };

  constexpr long kTuneWindow = 10;
  long window_accepted = 0;
  for (long s = 0; s < config.burn_in_sweeps; ++s) {
    for (long m = 0; m < moves_per_sweep; ++m) {
      window_accepted += metropolis_step(state, active, sigma, rng);
      if (adapt) ++window_visits[slot(state.index())];
    }
    if ((s + 1) % kTuneWindow != 0) continue;
    if (config.tune_step) {
      const double rate =
          static_cast<double>(window_accepted) / static_cast<double>(kTuneWindow * moves_per_sweep);
      if (rate > 0.5) sigma *= 1.15;
      if (rate < 0.3) sigma /= 1.15;
    }
    window_accepted = 0;
    if (adapt) {
      // Sign-adaptive steps: grow while a state stays over- or under-visited,
      // halve on reversal. Bounded steps keep the weights sane when a window
      // sees no crossing at all.
      double mean_log = 0.0;
      for (long v : window_visits) mean_log += std::log(static_cast<double>(v) + 1.0);
      mean_log /= static_cast<double>(states);
      for (std::size_t i = 0; i < states; ++i) {
        const double excess = std::log(static_cast<double>(window_visits[i]) + 1.0) - mean_log;
        const int sign = (excess > 0.0) - (excess < 0.0);
        gain[i] = sign == last_sign[i] ? std::min(gain[i] * 1.5, 8.0) : gain[i] * 0.5;
        last_sign[i] = sign;
        active.sector_log_weight[i] -= std::clamp(excess, -gain[i], gain[i]);
      }
      std::fill(window_visits.begin(), window_visits.end(), 0L);
    }
  }
  state.resync();

  ChainStats stats;
  stats.step_sigma = sigma;
  for (std::size_t i = 0; i < states; ++i) {
    stats.sector_visits[config.sector[i]] = 0;
    stats.sector_log_weight[config.sector[i]] = active.sector_log_weight[i];
  }

  long accepted = 0;
  long proposed = 0;
  double energy_sum = 0.0;
  for (long s = 1; s <= config.sweeps; ++s) {
    for (long m = 0; m < moves_per_sweep; ++m) {
      accepted += metropolis_step(state, active, sigma, rng);
      ++proposed;
      ++stats.sector_visits[state.index()];
    }
    if (!config.allows(state.index())) {
      throw std::logic_error("conditioned chain left its sector at sweep " + std::to_string(s));
    }
    if (s % 100 == 0) state.resync();
    energy_sum += state.energy();
    if (config.record_samples && s % config.thin == 0) {
      stats.samples.push_back({s, std::vector<Point>(state.positions().begin(), state.positions().end())});
    }
  }

  if (proposed == 0) {
    stats.sector_visits[state.index()] += 1;
    stats.mean_energy = state.energy();
  } else {
    stats.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(proposed);
    stats.mean_energy = energy_sum / static_cast<double>(config.sweeps);
  }
  long total = 0;
  for (const auto& [k, v] : stats.sector_visits) total += v;
  for (const auto& [k, v] : stats.sector_visits) {
    stats.sector_occupancy[k] = static_cast<double>(v) / static_cast<double>(total);
  }
  return stats;
}

double sector_ratio(const ChainConfig& config, int k) {
  ChainConfig pair = config;
  pair.sector = {k, k + 1};
  pair.sector_log_weight.clear();
  pair.adapt_weights = true;
  pair.record_samples = false;
  const ChainStats stats = run_chain(pair);
  const long lower = stats.sector_visits.at(k);
  const long upper = stats.sector_visits.at(k + 1);
  if (lower == 0 || upper == 0) {
    throw InsufficientSamplingError("sector pair {" + std::to_string(k) + ", " +
                                    std::to_string(k + 1) + "}: visits " + std::to_string(lower) +
                                    " / " + std::to_string(upper));
  }
  const double unweight = std::exp(stats.sector_log_weight.at(k) - stats.sector_log_weight.at(k + 1));
  return static_cast<double>(upper) / static_cast<double>(lower) * unweight;
}

std::vector<double> sector_ratios(const ChainConfig& config, int threads) {
  validate(config);
  const int links = config.n;
  std::vector<double> ratios(static_cast<std::size_t>(links), 0.0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(links));
  std::atomic<int> next{0};

  auto worker = [&] {
    for (int k = next++; k < links; k = next++) {
      ChainConfig link = config;
      link.seed = derive_seed(config.seed, static_cast<std::uint64_t>(k));
      try {
        ratios[static_cast<std::size_t>(k)] = sector_ratio(link, k);
      } catch (...) {
        errors[static_cast<std::size_t>(k)] = std::current_exception();
      }
    }
  };

  const int workers = std::clamp(threads, 1, links);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return ratios;
}

std::vector<double> pooled_radii(std::span<const Snapshot> snapshots) {
  std::vector<double> radii;
  for (const auto& snap : snapshots) {
    for (const Point z : snap.positions) radii.push_back(std::abs(z));
  }
  std::sort(radii.begin(), radii.end());
  return radii;
}

RadialHistogram radial_histogram(std::span<const Snapshot> snapshots, int bins, double r_max) {
  if (bins < 1) throw DomainError("bins must be positive");
  const std::vector<double> radii = pooled_radii(snapshots);
  if (radii.empty()) throw DomainError("radial histogram needs at least one particle");
  if (r_max <= 0.0) r_max = radii.back();

  RadialHistogram h;
  const double width = r_max / bins;
  const double total = static_cast<double>(radii.size());
  for (int b = 0; b <= bins; ++b) {
    const double edge = b == bins ? r_max : b * width;
    h.edges.push_back(edge);
    const auto below = std::upper_bound(radii.begin(), radii.end(), edge) - radii.begin();
    h.cdf.push_back(static_cast<double>(below) / total);
  }
  for (int b = 0; b < bins; ++b) {
    const auto lo = std::upper_bound(radii.begin(), radii.end(), h.edges[b]) - radii.begin();
    const auto hi = std::upper_bound(radii.begin(), radii.end(), h.edges[b + 1]) - radii.begin();
    // Bin 0 also owns particles sitting exactly at the origin.
    const auto count = static_cast<double>(hi - (b == 0 ? 0 : lo));
    const double r_mid = 0.5 * (h.edges[b] + h.edges[b + 1]);
    h.density.push_back(count / (total * 2.0 * std::numbers::pi * r_mid * width));
  }
  return h;
}

}  // namespace gindex
