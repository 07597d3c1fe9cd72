#pragma once

#include "splab/functional.hpp"

#include <string>
#include <vector>

namespace splab {

enum class SeedProfile { gaussian, sech, file };

struct SolverConfig {
  double tol = 1e-8;
  int max_iter = 500;
  double damping = 1.0;
  int continuation_steps = 16;
  double min_step = 1.0 / 1024;
  // Inner linear solve stops at this fraction of the current residual.
  double inner_tol = 1e-2;
  // Descent phases hand over to Newton once the sup-norm residual drops
  // below this fraction of the field amplitude.
  double descent_tol = 1e-4;
  // Extra near-exact Newton steps taken after tol is met; used where
  // identities are compared across grids.
  int polish_steps = 0;
  SeedProfile seed_profile = SeedProfile::gaussian;
  double seed_width = 2.0;
  double seed_amplitude = 1.0;
  std::string seed_file;

  void validate() const;
};

enum class Classification {
  trivial,
  semitrivial_first,
  semitrivial_second,
  vectorial_positive,
  vectorial_signchanging,
  diverged
};

std::string to_string(Classification c);

// Which components Newton and descent are allowed to move.
enum class Active { both, first, second };

struct Candidate {
  std::string label;
  double energy = 0;
  Classification classification = Classification::diverged;
};

struct SolveReport {
  Pair solution;
  double energy = 0;
  Ledger ledger;
  double residual_sup = 0;
  double pohozaev_residual = 0;
  double nehari_residual = 0;
  int iterations = 0;
  Classification classification = Classification::diverged;
  double ratio_mean = 0;
  double ratio_max_deviation = 0;
  bool degenerate_hessian = false;
  std::vector<double> trace;
  std::vector<Candidate> candidates;
  std::string status = "ok";

  bool converged() const { return classification != Classification::diverged; }
};

// Fills energy, ledger, residuals, classification and ratio statistics.
void finalize(SolveReport& rep, const Params& prm, const SolverConfig& cfg, bool converged);

SolveReport newton_solve(const Pair& init, const Params& prm, const SolverConfig& cfg, Active active = Active::both);

// Seed pair of the configured profile; amplitudes scale the two components.
Field seed_field(const GridPtr<double>& g, const SolverConfig& cfg, double amplitude = 1.0);

// Positive radial solution of -Delta u + lambda u + mu phi_u u = 0, mu < 0.
SolveReport hartree_ground(const GridPtr<double>& g, double lambda, double mu, const SolverConfig& cfg);

// Ground state of -Delta u + lambda u + mu phi_u u = c |u|^{p-1} u, returned as (u, 0).
SolveReport sp_single_ground(const GridPtr<double>& g, double lambda, double mu, double p, double c,
                             const SolverConfig& cfg);

// Positive t with G(t^2 u(t.)) = 0.
double fiber_root(const Ledger& L, double p);

// t^2 u(t r) for both components.
Pair fiber_scaled(const Pair& u, double t);

// Returns u rescaled onto {G = 0}.
Pair project_to_manifold(const Pair& u, const Params& prm);

SolveReport minimize_on_manifold(const GridPtr<double>& g, const Params& prm, const SolverConfig& cfg);
SolveReport global_minimize(const GridPtr<double>& g, const Params& prm, const SolverConfig& cfg);
SolveReport mountain_pass_continuation(const GridPtr<double>& g, const Params& prm, const SolverConfig& cfg);
std::vector<SolveReport> mu12_continuation(const GridPtr<double>& g, const Params& prm,
                                           const std::vector<double>& schedule, const SolverConfig& cfg);
SolveReport classify_zero_potential(const GridPtr<double>& g, const Params& prm, const SolverConfig& cfg);

// Building blocks shared by the drivers above.
struct DescentResult {
  Pair u;
  int iterations = 0;
  double residual_sup = 0;
  bool collapsed = false;
};
DescentResult preconditioned_descent(const Pair& seed, const Params& prm, const SolverConfig& cfg, bool on_manifold,
                                     Active active = Active::both);

// Newton along a homotopy from params(0) to params(1); `params` maps s in
// [0,1] to the model. Returns the endpoint report, or a diverged report with
// status naming the last good s.
template <typename F>
SolveReport continuation(const Pair& start, F&& params, const SolverConfig& cfg, Active active = Active::both);

}  // namespace splab

#include "splab/continuation_impl.hpp"
