#pragma once
// Exact finite-N index statistics for the complex Ginibre ensemble.
//
// The squared moduli of the eigenvalues of an N x N complex Ginibre matrix
// (entry variance 1/N) are distributed as the set {G_1/N, ..., G_N/N} with
// independent G_k ~ Gamma(k, 1). Hence N_R is a sum of independent
// Bernoulli(Q(k, N R^2)) variables, Q being the regularized upper incomplete
// gamma function.

#include <vector>

#include "gindex/index_pmf.hpp"
#include "gindex/rng.hpp"

namespace gindex {

struct BernoulliProfile {
  int n = 0;
  double radius = 0.0;
  std::vector<double> probs;              // p_k = Q(k, n R^2), k = 1..n
  std::vector<double> log_probs;          // ln p_k
  std::vector<double> log_complements;    // ln(1 - p_k), accurate when p_k ~ 1
};

BernoulliProfile bernoulli_probs(int n, double radius);

// Poisson-binomial law of N_R by O(n^2) convolution in log space.
IndexPMF index_pmf_exact(int n, double radius);

struct IndexMoments {
  double mean = 0.0;
  double variance = 0.0;
};

IndexMoments index_moments(int n, double radius);

// One draw of N_R from n independent Gamma(k, 1) variables.
int sample_index(int n, double radius, Rng& rng);

// Empirical N_R law at n = 2 from direct 2x2 complex Gaussian matrices.
IndexPMF ginibre2_mc(double radius, long trials, Rng& rng);

}  // namespace gindex
