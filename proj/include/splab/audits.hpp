#pragma once

#include "splab/solvers.hpp"

#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace splab {

struct AuditInapplicable : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// One machine-checkable claim. A `near` outcome passes when
// |measured - expected| <= tolerance; an `interval` outcome passes when
// measured lies in [lo, hi], or in (lo, hi) when `strict` is set.
struct AuditOutcome {
  enum class Kind { near, interval };

  std::string name;
  bool passed = false;
  Kind kind = Kind::near;
  double measured = 0;
  double expected = 0;
  double tolerance = 0;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  bool strict = false;
  std::vector<std::pair<std::string, double>> extras;
  std::string notes;

  bool check() const;

  static AuditOutcome near(std::string name, double measured, double expected, double tolerance);
  static AuditOutcome interval(std::string name, double measured, double lo, double hi, bool strict);
};

AuditOutcome audit_ratio_a0(const SolveReport& rep, const Params& prm);
// Symmetry u1 == u2, then the reduced scalar equation for u1.
std::vector<AuditOutcome> audit_rigidity(const SolveReport& rep, const Params& prm, const SolverConfig& cfg);
// Second variation at the semitrivial state (u1, 0) along (t1 u1, t2 u1).
std::vector<AuditOutcome> audit_morse_semitrivial(const GridPtr<double>& g, const Params& prm,
                                                  const SolverConfig& cfg);
// I(V,0) against I(W,W) for mu11 == mu22.
std::vector<AuditOutcome> audit_energy_comparison(const GridPtr<double>& g, const Params& prm,
                                                  const SolverConfig& cfg);
// Ground energies of -Delta u + u + gamma phi_u u = |u|^{p-1} u are decreasing in gamma.
AuditOutcome audit_coupling_monotonicity(const GridPtr<double>& g, double gamma, double mu, double p,
                                         const SolverConfig& cfg);
// Rescaling of -Delta v + a v + b phi_v v = c |v|^{p-1} v to a = c = 1.
std::vector<AuditOutcome> audit_scaling_lemma(const GridPtr<double>& g, double a, double b, double c, double p,
                                              const SolverConfig& cfg);

// min over t >= 0 of lambda + 4t - 2^p t^{p-1}, at the closed-form critical point.
double h_inequality(double lambda, double p, double t);
double h_critical_point(double p);
AuditOutcome audit_h_inequality(double lambda, double p);

// Random pairs: sums of three Gaussians per component.
Pair random_pair(const GridPtr<double>& g, std::mt19937_64& rng);

// Weighted Nehari/Pohozaev combinations that are positive for p >= 5 or p <= 1
// when det(mu) >= 0. Couplings are drawn at random with det(mu) >= 0.
AuditOutcome audit_identity_combination(const GridPtr<double>& g, double p, int samples, std::uint64_t seed);
// det(mu) >= 0 forces a nonnegative Hartree term.
AuditOutcome audit_hartree_sign(const GridPtr<double>& g, int samples, std::uint64_t seed);

AuditOutcome audit_cubic_reduction(const Pair& u, int angular_nodes = 256);

AuditOutcome audit_pohozaev(const std::string& name, const SolveReport& rep, const Params& prm);

}  // namespace splab
