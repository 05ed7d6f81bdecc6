#include "gindex/measure_kernel.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gindex/errors.hpp"

namespace gindex {
namespace {

// Points closer than this to p*_R are treated as sitting on it.
constexpr double kCriticalTolerance = 1e-15;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

// t^2 ln t - t^2/2, antiderivative of 2 t ln t (zero at t = 0).
double h2(double t) { return t > 0.0 ? t * t * std::log(t) - 0.5 * t * t : 0.0; }

// t^4 ln t - t^4/4, antiderivative of 4 t^3 ln t (zero at t = 0).
double h4(double t) {
  if (t <= 0.0) return 0.0;
  const double t4 = t * t * t * t;
  return t4 * std::log(t) - 0.25 * t4;
}

// Areal density of c on the open shell just above radius t.
double density_above(const RadialComponent& c, double t) {
  return std::visit(Overloaded{
                        [t](const Disk& d) { return t < d.radius ? d.density : 0.0; },
                        [t](const Annulus& a) {
                          return (t >= a.inner && t < a.outer) ? a.density : 0.0;
                        },
                        [](const CircleAtom&) { return 0.0; },
                    },
                    c);
}

void append_edges(const RadialComponent& c, std::vector<double>& edges) {
  std::visit(Overloaded{
                 [&](const Disk& d) { edges.push_back(d.radius); },
                 [&](const Annulus& a) {
                   edges.push_back(a.inner);
                   edges.push_back(a.outer);
                 },
                 [&](const CircleAtom& a) { edges.push_back(a.radius); },
             },
             c);
}

void check_log_finite(const RadialComponent& c) {
  if (const auto* atom = std::get_if<CircleAtom>(&c)) {
    if (atom->radius <= 0.0 && atom->mass > 0.0) {
      throw DomainError("circle atom with zero radius and positive mass has infinite log-energy");
    }
  }
}

double sq(double x) { return x * x; }

}  // namespace

void validate(const ConstraintSpec& spec) {
  if (!(spec.radius > 0.0 && spec.radius < 1.0)) {
    throw DomainError("radius must lie in (0, 1), got " + std::to_string(spec.radius));
  }
  if (!(spec.fraction >= 0.0 && spec.fraction <= 1.0)) {
    throw DomainError("fraction must lie in [0, 1], got " + std::to_string(spec.fraction));
  }
  if (!(spec.beta > 0.0)) {
    throw DomainError("beta must be positive, got " + std::to_string(spec.beta));
  }
}

double mass(const RadialComponent& c) {
  return std::visit(Overloaded{
                        [](const Disk& d) { return d.density * std::numbers::pi * sq(d.radius); },
                        [](const Annulus& a) {
                          return a.density * std::numbers::pi * (sq(a.outer) - sq(a.inner));
                        },
                        [](const CircleAtom& a) { return a.mass; },
                    },
                    c);
}

double second_moment(const RadialComponent& c) {
  // int |z|^2 over a uniform disk of radius r: lambda * pi * r^4 / 2.
  return std::visit(
      Overloaded{
          [](const Disk& d) { return 0.5 * d.density * std::numbers::pi * sq(sq(d.radius)); },
          [](const Annulus& a) {
            return 0.5 * a.density * std::numbers::pi * (sq(sq(a.outer)) - sq(sq(a.inner)));
          },
          [](const CircleAtom& a) { return a.mass * sq(a.radius); },
      },
      c);
}

double closed_ball_mass(const RadialComponent& c, double r) {
  return std::visit(Overloaded{
                        [r](const Disk& d) {
                          return d.density * std::numbers::pi * sq(std::clamp(r, 0.0, d.radius));
                        },
                        [r](const Annulus& a) {
                          const double t = std::clamp(r, a.inner, a.outer);
                          return a.density * std::numbers::pi * (sq(t) - sq(a.inner));
                        },
                        [r](const CircleAtom& a) { return r >= a.radius ? a.mass : 0.0; },
                    },
                    c);
}

double open_ball_mass(const RadialComponent& c, double r) {
  if (const auto* atom = std::get_if<CircleAtom>(&c)) {
    return r > atom->radius ? atom->mass : 0.0;
  }
  return closed_ball_mass(c, r);
}

double RadialMeasure::total_mass() const {
  double total = 0.0;
  for (const auto& c : components) total += mass(c);
  return total;
}

RadialMeasure circular_law() { return RadialMeasure{{Disk{1.0, kUniformDensity}}}; }

RateValue psi(const ConstraintSpec& spec) {
  validate(spec);
  const double r = spec.radius;
  const double p = spec.fraction;
  const double p_crit = spec.critical_fraction();
  if (std::abs(p - p_crit) <= kCriticalTolerance) return {0.0, Branch::At};

  const double q = 1.0 - p;
  const double q2_term = q > 0.0 ? sq(q) * (0.75 - 0.5 * std::log(q) + std::log(r)) : 0.0;
  const double above = 0.25 * sq(sq(r)) - q * sq(r) + q2_term;
  if (p > p_crit) return {std::max(above, 0.0), Branch::Above};
  return {std::max(-above, 0.0), Branch::Below};
}

double ld_log_prob(const ConstraintSpec& spec, long n) {
  if (n < 1) throw DomainError("particle count must be at least 1");
  const double value = psi(spec).psi;
  if (value == 0.0) return 0.0;
  const double nn = static_cast<double>(n);
  return -0.5 * spec.beta * nn * nn * value;
}

double cubic_approx(double radius, double delta) {
  if (!(radius > 0.0 && radius < 1.0)) throw DomainError("radius must lie in (0, 1)");
  const double a = std::abs(delta);
  return a * a * a / (6.0 * sq(radius));
}

RadialMeasure equilibrium_measure(const ConstraintSpec& spec) {
  validate(spec);
  const double r = spec.radius;
  const double p = spec.fraction;
  const double p_crit = spec.critical_fraction();
  if (std::abs(p - p_crit) <= kCriticalTolerance) return circular_law();

  const double inner = std::sqrt(1.0 - p);
  RadialMeasure mu;
  if (p < p_crit) {
    mu.components.emplace_back(Disk{r, kUniformDensity});
    mu.components.emplace_back(CircleAtom{r, 1.0 - p - sq(r)});
    // At p = 0 the annulus (1, 1) carries no mass and is dropped.
    if (p > 0.0) mu.components.emplace_back(Annulus{inner, 1.0, kUniformDensity});
  } else {
    if (p < 1.0) mu.components.emplace_back(Disk{inner, kUniformDensity});
    mu.components.emplace_back(CircleAtom{r, p + sq(r) - 1.0});
    mu.components.emplace_back(Annulus{r, 1.0, kUniformDensity});
  }
  return mu;
}

double radial_cdf(const RadialMeasure& measure, double r) {
  double total = 0.0;
  for (const auto& c : measure.components) total += closed_ball_mass(c, r);
  return std::clamp(total, 0.0, 1.0);
}

double mass_outside(const RadialMeasure& measure, double r, bool count_atoms_on_circle) {
  double total = 0.0;
  for (const auto& c : measure.components) {
    const double inside = count_atoms_on_circle ? open_ball_mass(c, r) : closed_ball_mass(c, r);
    total += mass(c) - inside;
  }
  return total;
}

double constrained_index_fraction(const RadialMeasure& measure, const ConstraintSpec& spec) {
  return mass_outside(measure, spec.radius, spec.fraction > spec.critical_fraction());
}

double pair_log_energy(const RadialComponent& c1, const RadialComponent& c2) {
  check_log_finite(c1);
  check_log_finite(c2);

  // The max of two independent radii has CDF F1*F2, so the integral equals
  // int ln t d(F1 F2)(t). Between consecutive edges each F is a + b t^2;
  // at each edge the product may jump (atoms).
  std::vector<double> edges{0.0};
  append_edges(c1, edges);
  append_edges(c2, edges);
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

  double total = 0.0;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double t = edges[i];
    const double f1 = closed_ball_mass(c1, t);
    const double f2 = closed_ball_mass(c2, t);
    if (t > 0.0) {
      const double jump = f1 * f2 - open_ball_mass(c1, t) * open_ball_mass(c2, t);
      if (jump != 0.0) total += std::log(t) * jump;
    }
    if (i + 1 == edges.size()) break;

    const double t_next = edges[i + 1];
    const double g1 = std::numbers::pi * density_above(c1, t);
    const double g2 = std::numbers::pi * density_above(c2, t);
    const double a1 = f1 - g1 * t * t;
    const double a2 = f2 - g2 * t * t;
    // (a1 + g1 u)(a2 + g2 u) with u = t^2: linear coefficient b, quadratic c.
    const double b = a1 * g2 + a2 * g1;
    const double c = g1 * g2;
    if (b != 0.0) total += b * (h2(t_next) - h2(t));
    if (c != 0.0) total += c * (h4(t_next) - h4(t));
  }
  return total;
}

double log_energy(const RadialMeasure& measure) {
  double total = 0.0;
  for (const auto& a : measure.components) {
    for (const auto& b : measure.components) total += pair_log_energy(a, b);
  }
  return total;
}

double energy_functional(const RadialMeasure& measure, double beta) {
  if (!(beta > 0.0)) throw DomainError("beta must be positive");
  double moment = 0.0;
  for (const auto& c : measure.components) moment += second_moment(c);
  return 0.5 * beta * (moment - log_energy(measure) - 0.75);
}

double effective_potential(const RadialMeasure& measure, double r) {
  if (!(r > 0.0)) throw DomainError("effective potential probe radius must be positive");
  const RadialComponent probe = CircleAtom{r, 1.0};
  double interaction = 0.0;
  for (const auto& c : measure.components) interaction += pair_log_energy(probe, c);
  return r * r - 2.0 * interaction;
}

namespace {

void check_j_domain(double r1, const ConstraintSpec& spec) {
  validate(spec);
  if (spec.fraction > spec.critical_fraction() + kCriticalTolerance) {
    throw DomainError("j_cost parameterizes the p <= 1 - R^2 phase only");
  }
  if (!(r1 >= spec.radius)) throw DomainError("annulus inner radius must be >= R");
}

}  // namespace

double j_cost(double r1, const ConstraintSpec& spec) {
  check_j_domain(r1, spec);
  const double r = spec.radius;
  const double p = spec.fraction;
  const double q = 1.0 - p;
  const double r1sq = r1 * r1;
  const double bracket = -0.25 * sq(sq(r)) + q * sq(r) - sq(q) * std::log(r) + 0.75 * sq(p) +
                         0.5 * p * r1sq + p * q - r1sq * (r1sq - 2.0 * q) * std::log(r1) +
                         0.5 * (sq(r1sq - q) - 1.0) * std::log(p + r1sq);
  return 0.5 * spec.beta * bracket;
}

double j_cost_derivative(double r1, const ConstraintSpec& spec) {
  check_j_domain(r1, spec);
  const double p = spec.fraction;
  const double r1sq = r1 * r1;
  return spec.beta * r1 * (r1sq - (1.0 - p)) * std::log1p(p / r1sq);
}

double minimize_j(const ConstraintSpec& spec) {
  check_j_domain(spec.radius, spec);
  // With p = 0 the annulus is empty and j_cost is flat in r1; its mass-free
  // limit sits at the unit circle.
  if (spec.fraction == 0.0) return 1.0;

  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double lo = spec.radius;
  double hi = std::sqrt(1.0 - spec.fraction) + 1.0;
  double x1 = hi - inv_phi * (hi - lo);
  double x2 = lo + inv_phi * (hi - lo);
  double f1 = j_cost(x1, spec);
  double f2 = j_cost(x2, spec);
  while (hi - lo > 1e-10) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - inv_phi * (hi - lo);
      f1 = j_cost(x1, spec);
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + inv_phi * (hi - lo);
      f2 = j_cost(x2, spec);
    }
  }

  // Near the minimum j_cost is flat to rounding over ~1e-8, so finish on the
  // sign of the closed-form derivative inside a slightly widened bracket.
  lo = std::max(spec.radius, lo - 1e-7);
  hi = hi + 1e-7;
  if (j_cost_derivative(lo, spec) >= 0.0) return lo;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (j_cost_derivative(mid, spec) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace gindex
