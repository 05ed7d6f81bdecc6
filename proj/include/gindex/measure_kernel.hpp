#pragma once
// Closed-form analytics for the index large deviations of the Ginibre
// ensemble: the rate function psi_R(p), the constrained equilibrium
// measures, and the log-energy functional restricted to radial measures.
//
// Conventions: eigenvalues live on the unit disk (entry variance 1/N), the
// index counts eigenvalues with |z| > R, and p*_R = 1 - R^2 is its typical
// fraction.

#include <numbers>
#include <variant>
#include <vector>

namespace gindex {

struct ConstraintSpec {
  double radius = 0.5;
  double fraction = 0.5;
  double beta = 2.0;

  double critical_fraction() const { return 1.0 - radius * radius; }
};

// Throws DomainError unless 0 < R < 1, 0 <= p <= 1 and beta > 0.
void validate(const ConstraintSpec& spec);

inline constexpr double kUniformDensity = std::numbers::inv_pi;

// Uniform areal density on the closed disk |z| <= radius.
struct Disk {
  double radius = 1.0;
  double density = kUniformDensity;
  bool operator==(const Disk&) const = default;
};

// Uniform areal density on inner < |z| < outer.
struct Annulus {
  double inner = 0.0;
  double outer = 1.0;
  double density = kUniformDensity;
  bool operator==(const Annulus&) const = default;
};

// Mass spread uniformly along the circle |z| = radius.
struct CircleAtom {
  double radius = 1.0;
  double mass = 0.0;
  bool operator==(const CircleAtom&) const = default;
};

using RadialComponent = std::variant<Disk, Annulus, CircleAtom>;

double mass(const RadialComponent& c);
double second_moment(const RadialComponent& c);
// Mass of c inside the closed ball of radius r.
double closed_ball_mass(const RadialComponent& c, double r);
// Mass of c inside the open ball of radius r.
double open_ball_mass(const RadialComponent& c, double r);

struct RadialMeasure {
  std::vector<RadialComponent> components;

  double total_mass() const;
  bool operator==(const RadialMeasure&) const = default;
};

RadialMeasure circular_law();

enum class Branch { Below, At, Above };

struct RateValue {
  double psi = 0.0;
  Branch branch = Branch::At;
};

// Two-branch closed form of psi_R(p); q^2 ln q is taken as 0 at q = 0.
RateValue psi(const ConstraintSpec& spec);

// Leading-order log P(p, N) = -(beta/2) N^2 psi_R(p).
double ld_log_prob(const ConstraintSpec& spec, long n);

// Local behaviour |delta|^3 / (6 R^2) of psi around p*_R.
double cubic_approx(double radius, double delta);

// Minimizer of the energy functional under the index constraint:
//   p < p*: Disk(R) + CircleAtom(R, 1-p-R^2) + Annulus(sqrt(1-p), 1)
//   p > p*: Disk(sqrt(1-p)) + CircleAtom(R, p+R^2-1) + Annulus(R, 1)
//   p = p*: the circular law.
RadialMeasure equilibrium_measure(const ConstraintSpec& spec);

// Mass of the closed ball of radius r (right-continuous in r).
double radial_cdf(const RadialMeasure& measure, double r);

// Mass with |z| > r, optionally also counting atoms sitting exactly on |z| = r.
double mass_outside(const RadialMeasure& measure, double r, bool count_atoms_on_circle);

// Index fraction of a constrained minimizer. The condensed circle at R is
// counted on the side the constraint pushed it to: inside for p < p*
// (closed ball), outside for p > p*.
double constrained_index_fraction(const RadialMeasure& measure, const ConstraintSpec& spec);

// Double integral of ln|z - z'| against c1 x c2, reduced through the angular
// identity to the integral of ln max(r, r') and evaluated with exact
// antiderivatives. Throws DomainError for a zero-radius circle atom.
double pair_log_energy(const RadialComponent& c1, const RadialComponent& c2);

// Sum of pair_log_energy over all ordered pairs of components.
double log_energy(const RadialMeasure& measure);

// (beta/2) * (int |z|^2 dmu - log_energy(mu) - 3/4). Zero for the circular law.
double energy_functional(const RadialMeasure& measure, double beta);

// r^2 - 2 int ln|z - z'| dmu(z') at |z| = r > 0.
double effective_potential(const RadialMeasure& measure, double r);

// Energy of the p < p* family as a function of the inner annulus radius r1.
// As written this omits the -3/4 constant:
//   (2/beta) j_cost(sqrt(1-p)) - 3/4 == psi(spec).
double j_cost(double r1, const ConstraintSpec& spec);
double j_cost_derivative(double r1, const ConstraintSpec& spec);

// Golden-section minimization of j_cost over [R, sqrt(1-p) + 1].
double minimize_j(const ConstraintSpec& spec);

}  // namespace gindex
