#include "splab/solvers.hpp"

#include <cmath>
#include <stdexcept>
#include <fstream>
#include <functional>

namespace splab {

namespace {

using Factor = Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>;

std::unique_ptr<Factor> sobolev_factor(const Grid& g, double lambda) {
  Eigen::SparseMatrix<double> P = g.stiffness();
  for (int k = 0; k < g.n() - 2; ++k) P.coeffRef(k, k) += lambda * g.mass()[k + 1];
  return std::make_unique<Factor>(P);
}

void fix_ends(Field& f) {
  f.values[f.size() - 1] = 0;
  f.values[0] = Grid::extrapolate_origin(f.values);
}

Pair scalar_pair(const Field& u) { return Pair(u, Field::zero(u.grid)); }

// Petviashvili iteration for -Delta u + lambda u = N(u), N homogeneous of
// degree q; gamma = q/(q-1) removes the scaling instability.
Field petviashvili(const Field& seed, double lambda, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& N,
                   double q, int max_iter, int& iters) {
  const Grid& g = *seed.grid;
  const int n = g.n(), m = n - 2;
  auto L = sobolev_factor(g, lambda);
  Eigen::SparseMatrix<double> P = g.stiffness();
  for (int k = 0; k < m; ++k) P.coeffRef(k, k) += lambda * g.mass()[k + 1];
  const Eigen::VectorXd Mi = g.mass().segment(1, m);
  const double gamma = q / (q - 1);
  Eigen::VectorXd u = seed.values;
  iters = 0;
  for (; iters < max_iter; ++iters) {
    Eigen::VectorXd Nu = N(u);
    Eigen::VectorXd ui = u.segment(1, m);
    Eigen::VectorXd rhs = Mi.cwiseProduct(Nu.segment(1, m));
    double num = ui.dot(P * ui), den = ui.dot(rhs);
    if (!(den > 0)) break;
    Eigen::VectorXd next = std::pow(num / den, gamma) * L->solve(rhs);
    double change = (next - ui).cwiseAbs().maxCoeff() / next.cwiseAbs().maxCoeff();
    u.segment(1, m) = next;
    u[n - 1] = 0;
    u[0] = Grid::extrapolate_origin(u);
    if (change < 1e-12) break;
  }
  return Field(seed.grid, u);
}

Field nls_soliton(const GridPtr<double>& g, double lambda, double p, double c, const SolverConfig& cfg, int& iters) {
  Field seed = Field::from(g, [&](double r) { return std::exp(-lambda * r * r / 4); });
  fix_ends(seed);
  auto N = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return u.unaryExpr([&](double x) { return c * std::pow(std::abs(x), p - 1) * x; });
  };
  return petviashvili(seed, lambda, N, p, std::max(cfg.max_iter, 2000), iters);
}

}  // namespace

Field seed_field(const GridPtr<double>& g, const SolverConfig& cfg, double amplitude) {
  const double A = amplitude * cfg.seed_amplitude, w = cfg.seed_width;
  Field f;
  switch (cfg.seed_profile) {
    case SeedProfile::gaussian: f = Field::from(g, [&](double r) { return A * std::exp(-r * r / (2 * w * w)); }); break;
    case SeedProfile::sech: f = Field::from(g, [&](double r) { return A / std::cosh(r / w); }); break;
    case SeedProfile::file: {
      std::ifstream in(cfg.seed_file);
      if (!in) throw ConfigError("seed file not readable: " + cfg.seed_file);
      std::string header;
      std::getline(in, header);
      std::vector<double> rs, vs;
      std::string line;
      while (std::getline(in, line)) {
        auto c = line.find(',');
        if (c == std::string::npos) continue;
        rs.push_back(std::stod(line.substr(0, c)));
        vs.push_back(std::stod(line.substr(c + 1)));
      }
      if (rs.size() < 16) throw ConfigError("seed file has too few rows: " + cfg.seed_file);
      auto src = make_grid(int(rs.size()), rs.back());
      Field s(src, Eigen::Map<Eigen::VectorXd>(vs.data(), vs.size()));
      f = resampled(s, g);
      f.values *= A;
      break;
    }
  }
  fix_ends(f);
  return f;
}

SolveReport hartree_ground(const GridPtr<double>& g, double lambda, double mu, const SolverConfig& cfg) {
  if (!(mu < 0)) throw ConfigError("hartree_ground: mu must be negative");
  const Grid& G = *g;
  const double beta = -mu;
  Field seed = Field::from(g, [&](double r) { return std::exp(-lambda * r * r / 4) * lambda / beta; });
  fix_ends(seed);
  auto N = [&](const Eigen::VectorXd& u) -> Eigen::VectorXd {
    return beta * G.poisson(u.cwiseAbs2()).cwiseProduct(u);
  };
  int iters = 0;
  Field u = petviashvili(seed, lambda, N, 3.0, std::max(cfg.max_iter, 2000), iters);
  Params prm;
  prm.lambda = lambda;
  prm.mu11 = mu;
  prm.kappa = 0;
  SolveReport rep = newton_solve(scalar_pair(u), prm, cfg, Active::first);
  rep.iterations += iters;
  return rep;
}

SolveReport sp_single_ground(const GridPtr<double>& g, double lambda, double mu, double p, double c,
                             const SolverConfig& cfg) {
  if (!(p > 1 && p < 5)) throw ConfigError("sp_single_ground: p must lie in (1,5)");
  if (!(c > 0)) throw ConfigError("sp_single_ground: c must be positive");
  Params prm;
  prm.lambda = lambda;
  prm.mu11 = mu;
  prm.p = p;
  prm.kappa = c;
  if (p <= 2 || mu == 0) {
    int iters = 0;
    Field U = nls_soliton(g, lambda, p, c, cfg, iters);
    if (mu == 0) {
      SolveReport rep = newton_solve(scalar_pair(U), prm, cfg, Active::first);
      rep.iterations += iters;
      return rep;
    }
    auto path = [&](double s) {
      Params q = prm;
      q.mu11 = s * mu;
      return q;
    };
    SolveReport rep = continuation(scalar_pair(U), path, cfg, Active::first);
    if (!rep.converged()) rep.status = "nonexistence_suspected: " + rep.status;
    return rep;
  }
  Field seed = seed_field(g, cfg);
  DescentResult d;
  try {
    d = preconditioned_descent(scalar_pair(seed), prm, cfg, true, Active::first);
  } catch (const std::domain_error& e) {
    // The state concentrated below the grid scale and the fiber map lost it.
    SolveReport rep;
    rep.solution = scalar_pair(seed);
    finalize(rep, prm, cfg, false);
    rep.status = std::string("unresolved: ") + e.what();
    return rep;
  }
  SolveReport rep = newton_solve(d.u, prm, cfg, Active::first);
  rep.iterations += d.iterations;
  return rep;
}

double fiber_root(const Ledger& L, double p) {
  if (!(L.d > 0)) throw std::domain_error("fiber_root: no root when d = 0");
  // f(t) = G(u_t)/t = alpha + beta t^2 - gamma t^{2p-2}, alpha > 0.
  const double alpha = L.b / 2, beta = 1.5 * L.a + 0.75 * L.c, gamma = (2 * p - 1) / (p + 1) * L.d;
  auto f = [&](double t) { return alpha + beta * t * t - gamma * std::pow(t, 2 * p - 2); };
  auto df = [&](double t) { return 2 * beta * t - gamma * (2 * p - 2) * std::pow(t, 2 * p - 3); };
  double lo = 0, hi = 1;
  while (f(hi) > 0) {
    lo = hi;
    hi *= 2;
    if (hi > 1e12) throw std::domain_error("fiber_root: no sign change");
  }
  while (f(lo) <= 0 && lo > 0) lo /= 2;
  double t = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double ft = f(t);
    if (ft > 0) lo = t; else hi = t;
    const double d = df(t);
    double next = d != 0 ? t - ft / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - t) <= 1e-15 * t) return next;
    t = next;
  }
  return t;
}

Pair fiber_scaled(const Pair& u, double t) {
  return Pair(rescaled(u.first, t * t, t), rescaled(u.second, t * t, t));
}

Pair project_to_manifold(const Pair& u, const Params& prm) {
  Pair v = u;
  for (int k = 0; k < 8; ++k) {
    double t = fiber_root(ledger(v, prm), prm.p);
    if (std::abs(t - 1) < 1e-13) break;
    v = fiber_scaled(v, t);
  }
  return v;
}

DescentResult preconditioned_descent(const Pair& seed, const Params& prm, const SolverConfig& cfg, bool on_manifold,
                                     Active active) {
  const Grid& g = seed.grid();
  const int n = g.n(), m = n - 2;
  auto P = sobolev_factor(g, prm.lambda);
  const Eigen::VectorXd Mi = g.mass().segment(1, m);

  auto mask = [&](Pair& x) {
    if (active == Active::first) x.second.values.setZero();
    if (active == Active::second) x.first.values.setZero();
  };
  auto tidy = [&](Pair& x) {
    mask(x);
    fix_ends(x.first);
    fix_ends(x.second);
  };

  DescentResult out;
  Pair u = seed;
  tidy(u);
  if (on_manifold) u = project_to_manifold(u, prm);
  double E = energy(u, prm);
  double alpha = 1;
  int it = 0;
  for (; it < cfg.max_iter; ++it) {
    Pair gr = gradient(u, prm);
    mask(gr);
    out.residual_sup = sup_norm(gr);
    if (out.residual_sup < cfg.descent_tol * sup_norm(u)) break;
    Eigen::VectorXd d1 = Eigen::VectorXd::Zero(n), d2 = Eigen::VectorXd::Zero(n);
    d1.segment(1, m) = -P->solve(Mi.cwiseProduct(gr.first.values.segment(1, m)));
    d2.segment(1, m) = -P->solve(Mi.cwiseProduct(gr.second.values.segment(1, m)));
    const double slope = g.mass().dot(gr.first.values.cwiseProduct(d1)) + g.mass().dot(gr.second.values.cwiseProduct(d2));
    bool accepted = false;
    while (alpha > 1e-10) {
      Pair trial = u;
      trial.first.values += alpha * d1;
      trial.second.values += alpha * d2;
      tidy(trial);
      double Et;
      try {
        if (on_manifold) trial = project_to_manifold(trial, prm);
        Et = energy(trial, prm);
      } catch (const std::domain_error&) {
        Et = HUGE_VAL;
      }
      if (std::isfinite(Et) && Et <= E + 1e-4 * alpha * slope) {
        u = std::move(trial);
        E = Et;
        accepted = true;
        alpha = std::min(2 * alpha, 4.0);
        break;
      }
      alpha /= 2;
    }
    if (!accepted) break;
    if (!on_manifold && sup_norm(u) < 1e-9) {
      u.first.values.setZero();
      u.second.values.setZero();
      out.collapsed = true;
      ++it;
      break;
    }
  }
  out.u = u;
  out.iterations = it;
  if (!on_manifold && sup_norm(u) < 1e-6) out.collapsed = true;
  return out;
}

namespace {

struct Seed {
  std::string label;
  double a1, a2;
};

const std::vector<Seed>& standard_seeds() {
  static const std::vector<Seed> s = {{"(g,0)", 1, 0}, {"(0,g)", 0, 1}, {"(g,g)", 1, 1}, {"(g,2g)", 1, 2}};
  return s;
}

// Lowest energy wins; ties within 1e-9 go to the earlier candidate.
int pick_best(const std::vector<SolveReport>& reps) {
  int best = -1;
  for (int k = 0; k < int(reps.size()); ++k) {
    if (!reps[k].converged()) continue;
    if (best < 0 || reps[k].energy < reps[best].energy - 1e-9) best = k;
  }
  return best;
}

Active active_for(double a1, double a2) {
  if (a2 == 0) return Active::first;
  if (a1 == 0) return Active::second;
  return Active::both;
}

}  // namespace

SolveReport minimize_on_manifold(const GridPtr<double>& g, const Params& prm, const SolverConfig& cfg) {
  if (!(prm.p > 2 && prm.p < 5)) throw ConfigError("minimize_on_manifold: p must lie in (2,5)");
  std::vector<SolveReport> reps;
  std::vector<Candidate> cands;
  for (const auto& s : standard_seeds()) {
    Field base = seed_field(g, cfg);
    Pair seed(Field(g, (s.a1 * base.values).cwiseAbs()), Field(g, (s.a2 * base.values).cwiseAbs()));
    const Active act = active_for(s.a1, s.a2);
    SolveReport r;
    try {
      DescentResult d = preconditioned_descent(seed, prm, cfg, true, act);
      r = newton_solve(d.u, prm, cfg, act);
      r.iterations += d.iterations;
    } catch (const std::domain_error& e) {
      r.solution = seed;
      r.classification = Classification::diverged;
      r.status = e.what();
    }
    cands.push_back({s.label, r.energy, r.classification});
    reps.push_back(std::move(r));
  }
  int best = pick_best(reps);
  SolveReport out = best >= 0 ? reps[best] : reps.front();
  if (best < 0) {
    out.classification = Classification::diverged;
    out.status = "all seeds failed";
  }
  out.candidates = cands;
  return out;
}

SolveReport global_minimize(const GridPtr<double>& g, const Params& prm, const SolverConfig& cfg) {
  static const std::vector<Seed> seeds = {
      {"(g,g)", 1, 1}, {"(g,2g)", 1, 2}, {"(2g,g)", 2, 1}, {"(4g,4g)", 4, 4}, {"(8g,8g)", 8, 8}, {"(16g,16g)", 16, 16}};
  std::vector<SolveReport> reps;
  std::vector<Candidate> cands;
  for (const auto& s : seeds) {
    Field base = seed_field(g, cfg);
    Pair seed(Field(g, s.a1 * base.values), Field(g, s.a2 * base.values));
    DescentResult d = preconditioned_descent(seed, prm, cfg, false);
    SolveReport r;
    if (d.collapsed) {
      r.solution = Pair::zero(g);
      finalize(r, prm, cfg, true);
      r.status = "collapsed to zero";
    } else {
      r = newton_solve(d.u, prm, cfg);
    }
    r.iterations += d.iterations;
    cands.push_back({s.label, r.energy, r.classification});
    reps.push_back(std::move(r));
  }
  int best = pick_best(reps);
  SolveReport out = best >= 0 ? reps[best] : reps.front();
  if (best < 0) {
    out.classification = Classification::diverged;
    out.status = "all seeds failed";
  }
  out.candidates = cands;
  return out;
}

SolveReport mountain_pass_continuation(const GridPtr<double>& g, const Params& prm, const SolverConfig& cfg) {
  AngularRule<double> rule(prm.angular_nodes);
  const double half_cp = cp_constant(prm.p, rule) / 2;
  SolveReport U = sp_single_ground(g, prm.lambda, 0.0, prm.p, prm.kappa * half_cp, cfg);
  if (!U.converged()) return U;
  Pair seed(U.solution.first, U.solution.first);
  auto path = [&](double s) {
    Params q = prm;
    q.mu11 *= s;
    q.mu22 *= s;
    q.mu12 *= s;
    return q;
  };
  return continuation(seed, path, cfg);
}

std::vector<SolveReport> mu12_continuation(const GridPtr<double>& g, const Params& prm,
                                           const std::vector<double>& schedule, const SolverConfig& cfg) {
  if (schedule.empty()) return {};
  for (size_t k = 0; k < schedule.size(); ++k)
    if (!(schedule[k] > 0) || (k && !(schedule[k] > schedule[k - 1])))
      throw ConfigError("mu12_continuation: schedule must be positive and increasing");
  SolveReport V = hartree_ground(g, prm.lambda, -1.0, cfg);
  std::vector<SolveReport> out;
  if (!V.converged()) {
    V.status = "hartree ground state failed";
    out.push_back(V);
    return out;
  }
  // Model in v = sqrt(mu12) u at coupling mu12.
  auto rescaled_model = [&](double mu12) {
    Params q = prm;
    q.mu11 = prm.mu11 / mu12;
    q.mu22 = prm.mu22 / mu12;
    q.mu12 = 1;
    q.kappa = prm.kappa * std::pow(mu12, -(prm.p - 1) / 2);
    return q;
  };
  Pair v(V.solution.first, V.solution.first);
  double prev = 0;
  for (double mu12 : schedule) {
    SolveReport r;
    if (prev == 0) {
      const Params target = rescaled_model(mu12);
      auto path = [&](double s) {
        Params q = target;
        q.mu11 *= s;
        q.mu22 *= s;
        q.kappa *= s;
        return q;
      };
      r = continuation(v, path, cfg);
    } else {
      const double from = prev;
      auto path = [&](double s) { return rescaled_model(from * std::pow(mu12 / from, s)); };
      r = continuation(v, path, cfg);
    }
    if (!r.converged()) {
      out.push_back(r);
      break;
    }
    v = r.solution;
    SolveReport orig;
    const double k = 1 / std::sqrt(mu12);
    Params q = prm;
    q.mu12 = mu12;
    orig.solution = Pair(Field(g, k * v.first.values), Field(g, k * v.second.values));
    orig.iterations = r.iterations;
    orig.trace = r.trace;
    finalize(orig, q, cfg, true);
    out.push_back(std::move(orig));
    prev = mu12;
  }
  return out;
}

SolveReport classify_zero_potential(const GridPtr<double>& g, const Params& prm_in, const SolverConfig& cfg) {
  Params prm = prm_in;
  prm.kappa = 0;
  if (!(prm.mu11 > 0 && prm.mu22 > 0 && prm.mu12 > 0))
    throw ConfigError("classify_zero_potential: mu entries must be positive");
  if (prm.det_mu() >= 0) {
    std::vector<Candidate> cands;
    bool all = true;
    for (const auto& s : standard_seeds()) {
      Field base = seed_field(g, cfg);
      Pair seed(Field(g, s.a1 * base.values), Field(g, s.a2 * base.values));
      DescentResult d = preconditioned_descent(seed, prm, cfg, false);
      cands.push_back({s.label, energy(d.u, prm), d.collapsed ? Classification::trivial : Classification::diverged});
      all = all && d.collapsed;
    }
    SolveReport rep;
    rep.solution = Pair::zero(g);
    finalize(rep, prm, cfg, all);
    rep.candidates = cands;
    rep.status = all ? "all seeds collapse to zero" : "a seed did not collapse";
    return rep;
  }
  const double coef = prm.det_mu() / (prm.mu22 + prm.mu12);
  SolveReport V = hartree_ground(g, prm.lambda, coef, cfg);
  if (!V.converged()) return V;
  Pair init(V.solution.first, Field(g, prm.a0() * V.solution.first.values));
  SolveReport rep = newton_solve(init, prm, cfg);
  rep.iterations += V.iterations;
  return rep;
}

}  // namespace splab
