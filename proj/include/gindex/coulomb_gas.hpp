#pragma once
// Metropolis sampling of the 2D Coulomb gas
//   P(z_1..z_N) ~ exp(-(beta/2) E_N),  E_N = N sum |z_k|^2 - 2 sum_{i<j} ln|z_i - z_j|,
// optionally conditioned on the index N_R = #{k : |z_k| > R} staying inside
// a prescribed sector of values.

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "gindex/index_pmf.hpp"
#include "gindex/rng.hpp"

namespace gindex {

using Point = std::complex<double>;

double total_energy(std::span<const Point> positions);
int count_outside(std::span<const Point> positions, double radius);

class GasState {
 public:
  // Throws SingularConfigurationError when two positions coincide.
  GasState(std::vector<Point> positions, double radius);

  int n() const { return static_cast<int>(positions_.size()); }
  double radius() const { return radius_; }
  std::span<const Point> positions() const { return positions_; }
  double energy() const { return energy_; }
  int index() const { return index_; }

  // E(after) - E(before) for moving particle k to z_new, in O(n).
  // Throws SingularConfigurationError if z_new hits another particle.
  double move_delta(int k, Point z_new) const;

  // Index after moving particle k to z_new.
  int index_after(int k, Point z_new) const;

  // Commits a move whose energy change is already known.
  void apply_move(int k, Point z_new, double delta);

  // Recomputes energy and index from scratch (drift check).
  double recomputed_energy() const { return total_energy(positions_); }
  int recomputed_index() const { return count_outside(positions_, radius_); }
  void resync();

 private:
  std::vector<Point> positions_;
  double radius_;
  double energy_;
  int index_;
};

struct ChainConfig {
  int n = 100;
  double radius = 0.5;
  double beta = 2.0;
  double step_sigma = 0.0;  // <= 0 selects 1/sqrt(n)
  long sweeps = 1000;
  long burn_in_sweeps = 1000;
  long thin = 1;
  std::uint64_t seed = 0;
  std::vector<int> sector;  // allowed index values; empty = unconstrained
  bool tune_step = true;    // adapt step_sigma during burn-in only
  // With this probability a move uses the fixed wide jump_sigma instead of the
  // (tuned) local step. The mixture is state independent, so still symmetric.
  double jump_probability = 0.0;
  double jump_sigma = 0.3;
  bool record_samples = false;
  int relaxation_sweeps = 100;
  // Umbrella log-weights aligned with `sector`; the target becomes
  // exp(-(beta/2) E + w(N_R)). Empty means all zero.
  std::vector<double> sector_log_weight;
  // Adapt the weights during burn-in towards equal occupancy, then freeze.
  bool adapt_weights = false;

  double effective_sigma() const;
  bool allows(int index) const;
  double log_weight(int index) const;
};

// Throws ConfigurationError for n < 1, non-positive radius/sigma/thin, a
// sector value outside [0, n], or weights not matching the sector.
void validate(const ChainConfig& config);

struct Snapshot {
  long sweep = 0;
  std::vector<Point> positions;
};

struct ChainStats {
  double acceptance_rate = 0.0;
  double mean_energy = 0.0;
  double step_sigma = 0.0;  // value used during measurement
  std::map<int, double> sector_occupancy;
  std::map<int, long> sector_visits;
  std::map<int, double> sector_log_weight;  // frozen weights used while measuring
  std::vector<Snapshot> samples;
};

// min(1, exp(-(beta/2) delta + log_weight_change)).
double acceptance_probability(double delta, double beta, double log_weight_change = 0.0);

// One single-particle proposal z_k -> z_k + N(0, s^2) per coordinate on a
// uniformly chosen particle, s = sigma or, with config.jump_probability,
// config.jump_sigma. Moves that leave the sector or land on another
// particle are rejected outright. Moves that change the index also pick up
// the umbrella weight difference.
bool metropolis_step(GasState& state, const ChainConfig& config, Rng& rng);
bool metropolis_step(GasState& state, const ChainConfig& config, double sigma, Rng& rng);

// Starting configuration near the constrained minimizer for index k:
// k points in the annulus (max(R, sqrt(1 - k/n)), 1), the rest in the disk of
// radius min(R, sqrt((n - k)/n)).
GasState initial_state(int n, double radius, int k, Rng& rng);

// Sector value the chain starts from: the allowed value closest to n(1 - R^2).
int initial_index(const ChainConfig& config);

ChainStats run_chain(const ChainConfig& config);

// Estimate of P(N_R = k+1) / P(N_R = k) from a chain confined to {k, k+1}:
// the occupancy ratio with the umbrella weights divided back out. The pair
// weights are always adapted during burn-in.
// Throws InsufficientSamplingError if either state was never visited.
double sector_ratio(const ChainConfig& config, int k);

// Ratios for every k in 0..n-1, chain k seeded by derive_seed(config.seed, k)
// and run on up to `threads` workers; output order is by k regardless.
std::vector<double> sector_ratios(const ChainConfig& config, int threads);

struct RadialHistogram {
  std::vector<double> edges;    // bins + 1 edges from 0 to r_max
  std::vector<double> cdf;      // empirical CDF at each edge
  std::vector<double> density;  // per bin, count / (total * 2 pi r_mid dr)
};

std::vector<double> pooled_radii(std::span<const Snapshot> snapshots);

// r_max <= 0 uses the largest pooled radius.
RadialHistogram radial_histogram(std::span<const Snapshot> snapshots, int bins, double r_max = 0.0);

}  // namespace gindex
