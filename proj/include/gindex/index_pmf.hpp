#pragma once

#include <span>
#include <vector>

namespace gindex {

// Distribution of the index N_R over {0, ..., n}, stored as natural logs so
// that large-deviation tails (P ~ exp(-n^2)) stay representable.
struct IndexPMF {
  int n = 0;
  std::vector<double> log_probs;

  double prob(int k) const;
  std::vector<double> probs() const;
  double mean() const;
  double variance() const;
};

struct RatePoint {
  double fraction = 0.0;
  double psi_hat = 0.0;
};

// -(2/(beta n^2)) ln P(k) against p = k/n, shifted so its minimum is zero.
struct RateCurve {
  std::vector<RatePoint> entries;
};

double log_sum_exp(std::span<const double> values);
double log_add_exp(double a, double b);

// Shifts log_probs so that the exponentiated mass is one.
void normalize(IndexPMF& pmf);

// ratios[k] estimates P(k+1)/P(k); telescopes them into a normalized PMF over
// {0, ..., ratios.size()}. Throws DomainError on a non-positive or non-finite ratio.
IndexPMF reconstruct_log_pmf(std::span<const double> ratios);

RateCurve empirical_rate(const IndexPMF& pmf, double beta);

}  // namespace gindex
