#include "gindex/finite_n_oracle.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include "gindex/errors.hpp"

namespace gindex {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_inputs(int n, double radius) {
  if (n < 1) throw DomainError("particle count must be at least 1");
  if (!(radius > 0.0) || !std::isfinite(radius)) throw DomainError("radius must be positive");
}

// ln(x^j e^{-x} / j!)
double log_poisson_term(int j, double x, double log_x) {
  return j * log_x - x - std::lgamma(j + 1.0);
}

}  // namespace

BernoulliProfile bernoulli_probs(int n, double radius) {
  check_inputs(n, radius);
  BernoulliProfile out;
  out.n = n;
  out.radius = radius;
  const auto count = static_cast<std::size_t>(n);
  out.probs.resize(count);
  out.log_probs.resize(count);
  out.log_complements.resize(count);

  const double x = n * radius * radius;
  if (x == 0.0) {
    std::fill(out.probs.begin(), out.probs.end(), 1.0);
    std::fill(out.log_probs.begin(), out.log_probs.end(), 0.0);
    std::fill(out.log_complements.begin(), out.log_complements.end(), kNegInf);
    return out;
  }
  const double log_x = std::log(x);

  // Upper tail: Q(1, x) = e^{-x}, Q(k+1, x) = Q(k, x) + x^k e^{-x} / k!.
  double log_q = -x;
  for (int k = 1; k <= n; ++k) {
    out.log_probs[static_cast<std::size_t>(k - 1)] = log_q;
    log_q = log_add_exp(log_q, log_poisson_term(k, x, log_x));
  }

  // Lower tail: P(k, x) = sum_{j >= k} x^j e^{-x} / j!, seeded by the series
  // for P(n+1, x) and then accumulated downwards so every sum is of
  // positive terms only.
  double log_p = kNegInf;
  for (int j = n + 1;; ++j) {
    const double term = log_poisson_term(j, x, log_x);
    log_p = log_add_exp(log_p, term);
    if (j > x && term < log_p - 40.0) break;
  }
  for (int k = n; k >= 1; --k) {
    log_p = log_add_exp(log_p, log_poisson_term(k, x, log_x));
    out.log_complements[static_cast<std::size_t>(k - 1)] = log_p;
  }

  for (std::size_t i = 0; i < count; ++i) out.probs[i] = std::exp(out.log_probs[i]);
  return out;
}

IndexPMF index_pmf_exact(int n, double radius) {
  const BernoulliProfile profile = bernoulli_probs(n, radius);
  IndexPMF pmf;
  pmf.n = n;
  pmf.log_probs.assign(static_cast<std::size_t>(n) + 1, kNegInf);
  pmf.log_probs[0] = 0.0;
  for (int k = 0; k < n; ++k) {
    const double lp = profile.log_probs[static_cast<std::size_t>(k)];
    const double lc = profile.log_complements[static_cast<std::size_t>(k)];
    // After k trials only entries 0..k are populated; update in place from the top.
    for (int j = k + 1; j >= 0; --j) {
      const auto i = static_cast<std::size_t>(j);
      const double stay = pmf.log_probs[i] + lc;
      const double step = j > 0 ? pmf.log_probs[i - 1] + lp : kNegInf;
      pmf.log_probs[i] = log_add_exp(stay, step);
    }
  }
  normalize(pmf);
  return pmf;
}

IndexMoments index_moments(int n, double radius) {
  const BernoulliProfile profile = bernoulli_probs(n, radius);
  IndexMoments m;
  for (std::size_t i = 0; i < profile.probs.size(); ++i) {
    m.mean += profile.probs[i];
    m.variance += std::exp(profile.log_probs[i] + profile.log_complements[i]);
  }
  return m;
}

int sample_index(int n, double radius, Rng& rng) {
  check_inputs(n, radius);
  const double threshold = n * radius * radius;
  int outside = 0;
  for (int k = 1; k <= n; ++k) {
    // The shapes must be drawn independently; partial sums of one exponential
    // stream would correlate them.
    std::gamma_distribution<double> gamma_k(static_cast<double>(k), 1.0);
    outside += gamma_k(rng) > threshold;
  }
  return outside;
}

IndexPMF ginibre2_mc(double radius, long trials, Rng& rng) {
  if (trials < 1) throw DomainError("trials must be at least 1");
  if (!(radius > 0.0)) throw DomainError("radius must be positive");
  // Complex entries with E|a|^2 = 1/2: each real part has standard deviation 1/2.
  std::normal_distribution<double> gauss(0.0, 0.5);
  auto entry = [&] {
    const double re = gauss(rng);
    const double im = gauss(rng);
    return std::complex<double>(re, im);
  };

  std::array<long, 3> counts{};
  for (long t = 0; t < trials; ++t) {
    const auto a = entry();
    const auto b = entry();
    const auto c = entry();
    const auto d = entry();
    const auto half_trace = 0.5 * (a + d);
    const auto disc = std::sqrt(0.25 * (a - d) * (a - d) + b * c);
    const int outside = (std::abs(half_trace + disc) > radius) + (std::abs(half_trace - disc) > radius);
    ++counts[static_cast<std::size_t>(outside)];
  }

  IndexPMF pmf;
  pmf.n = 2;
  for (long c : counts) {
    pmf.log_probs.push_back(c > 0 ? std::log(static_cast<double>(c) / trials) : kNegInf);
  }
  return pmf;
}

}  // namespace gindex
