#include "gindex/index_pmf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gindex/errors.hpp"

namespace gindex {

double IndexPMF::prob(int k) const {
  if (k < 0 || k > n) return 0.0;
  return std::exp(log_probs[static_cast<std::size_t>(k)]);
}

std::vector<double> IndexPMF::probs() const {
  std::vector<double> out(log_probs.size());
  std::transform(log_probs.begin(), log_probs.end(), out.begin(),
                 [](double lp) { return std::exp(lp); });
  return out;
}

double IndexPMF::mean() const {
  double m = 0.0;
  for (int k = 0; k <= n; ++k) m += k * prob(k);
  return m;
}

double IndexPMF::variance() const {
  const double m = mean();
  double v = 0.0;
  for (int k = 0; k <= n; ++k) v += (k - m) * (k - m) * prob(k);
  return v;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  const double top = *std::max_element(values.begin(), values.end());
  if (!std::isfinite(top)) return top;
  double acc = 0.0;
  for (double v : values) acc += std::exp(v - top);
  return top + std::log(acc);
}

double log_add_exp(double a, double b) {
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<double>::infinity()) return a;
  return a + std::log1p(std::exp(b - a));
}

void normalize(IndexPMF& pmf) {
  const double total = log_sum_exp(pmf.log_probs);
  for (double& lp : pmf.log_probs) lp -= total;
}

IndexPMF reconstruct_log_pmf(std::span<const double> ratios) {
  IndexPMF pmf;
  pmf.n = static_cast<int>(ratios.size());
  pmf.log_probs.assign(ratios.size() + 1, 0.0);
  for (std::size_t k = 0; k < ratios.size(); ++k) {
    if (!(ratios[k] > 0.0) || !std::isfinite(ratios[k])) {
      throw DomainError("ratio " + std::to_string(k) + " must be finite and positive");
    }
    pmf.log_probs[k + 1] = pmf.log_probs[k] + std::log(ratios[k]);
  }
  normalize(pmf);
  return pmf;
}

RateCurve empirical_rate(const IndexPMF& pmf, double beta) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  const double nn = static_cast<double>(pmf.n);
  const double scale = 2.0 / (beta * nn * nn);
  RateCurve curve;
  curve.entries.reserve(pmf.log_probs.size());
  double lowest = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= pmf.n; ++k) {
    const double value = -scale * pmf.log_probs[static_cast<std::size_t>(k)];
    curve.entries.push_back({k / nn, value});
    lowest = std::min(lowest, value);
  }
  for (auto& e : curve.entries) e.psi_hat -= lowest;
  return curve;
}

}  // namespace gindex
