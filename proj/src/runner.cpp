#include "splab/runner.hpp"

#include "toml.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <ostream>
#include <set>
#include <sstream>

namespace splab {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

const std::vector<std::pair<Scenario, const char*>> scenario_names = {
    {Scenario::zero_potential, "zero_potential"},       {Scenario::ground_state, "ground_state"},
    {Scenario::two_solutions, "two_solutions"},         {Scenario::mu12_continuation, "mu12_continuation"},
    {Scenario::morse_report, "morse_report"},           {Scenario::pohozaev_check, "pohozaev_check"},
    {Scenario::audit_suite, "audit_suite"},             {Scenario::sweep, "sweep"}};

const std::set<std::string> sweep_parameters = {"lambda", "mu11", "mu22", "mu12", "p", "kappa"};

std::string fmt(double x) { return format_label(x); }

// ---------------------------------------------------------------- config

void check_keys(const toml::table& t, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [k, v] : t) {
    const std::string key(k.str());
    if (!allowed.count(key)) {
      std::ostringstream os;
      os << where << ": unknown key '" << key << "' at line " << k.source().begin.line;
      throw ConfigError(os.str());
    }
  }
}

const toml::table* subtable(const toml::table& t, const char* name) {
  const toml::node* n = t.get(name);
  if (!n) return nullptr;
  if (!n->is_table()) throw ConfigError(std::string("[") + name + "] must be a table");
  return n->as_table();
}

template <typename T>
void read(const toml::table& t, const char* key, T& out, const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return;
  std::optional<T> v;
  if constexpr (std::is_same_v<T, double>) {
    if (n->is_number()) v = n->value<double>();
  } else if constexpr (std::is_same_v<T, int>) {
    if (n->is_integer()) v = n->value<int>();
  } else {
    v = n->value<T>();
  }
  if (!v) {
    std::ostringstream os;
    os << where << "." << key << ": wrong type at line " << n->source().begin.line;
    throw ConfigError(os.str());
  }
  out = *v;
}

std::vector<double> read_reals(const toml::table& t, const char* key, const std::string& where) {
  const toml::node* n = t.get(key);
  const toml::array* arr = n ? n->as_array() : nullptr;
  if (!arr) throw ConfigError(where + "." + key + ": expected an array of numbers");
  std::vector<double> v;
  for (const auto& el : *arr) {
    if (!el.is_number()) throw ConfigError(where + "." + key + ": expected an array of numbers");
    v.push_back(*el.value<double>());
  }
  return v;
}

void set_parameter(Params& prm, const std::string& name, double v) {
  if (name == "lambda") prm.lambda = v;
  else if (name == "mu11") prm.mu11 = v;
  else if (name == "mu22") prm.mu22 = v;
  else if (name == "mu12") prm.mu12 = v;
  else if (name == "p") prm.p = v;
  else if (name == "kappa") prm.kappa = v;
  else throw ConfigError("sweep: unknown parameter '" + name + "'");
}

// ---------------------------------------------------------------- helpers

GridPtr<double> grid_of(const ScenarioConfig& cfg) {
  return make_grid(cfg.grid.n, cfg.grid.resolved_r_max(cfg.model.lambda));
}

double sup(const Vec<double>& v) { return v.cwiseAbs().maxCoeff(); }

bool nontrivial(const SolveReport& r) {
  return r.converged() && r.classification != Classification::trivial;
}

AuditOutcome failed_audit(const std::string& name, const std::string& why) {
  AuditOutcome o = AuditOutcome::near(name, std::numeric_limits<double>::quiet_NaN(), 0.0, 0.0);
  o.passed = false;
  o.notes = why;
  return o;
}

template <typename F>
void guarded(std::vector<AuditOutcome>& out, const std::string& name, F&& fn) {
  try {
    fn(out);
  } catch (const std::exception& e) {
    out.push_back(failed_audit(name, e.what()));
  }
}

void add(std::vector<AuditOutcome>& out, std::vector<AuditOutcome> more) {
  for (auto& o : more) out.push_back(std::move(o));
}

// Requires a specific classification on top of the numeric check.
AuditOutcome require_positive(AuditOutcome o, const SolveReport& r) {
  o.extras.push_back({"positive", r.classification == Classification::vectorial_positive ? 1.0 : 0.0});
  if (r.classification != Classification::vectorial_positive) {
    o.passed = false;
    o.notes = "classification " + to_string(r.classification);
  }
  return o;
}

void pohozaev_audit(std::vector<AuditOutcome>& out, const std::string& label, const SolveReport& r,
                    const Params& prm) {
  if (nontrivial(r)) out.push_back(audit_pohozaev("pohozaev." + label, r, prm));
}

SolveReport ground_pipeline(const GridPtr<double>& g, const Params& prm, const SolverConfig& solver) {
  if (prm.kappa == 0) return classify_zero_potential(g, prm, solver);
  if (prm.p > 2) return minimize_on_manifold(g, prm, solver);
  return global_minimize(g, prm, solver);
}

// ---------------------------------------------------------------- scenarios

void run_zero_potential(const ScenarioConfig& cfg, RunResult& res) {
  Params prm = cfg.model;
  prm.kappa = 0;
  const auto g = grid_of(cfg);
  SolveReport rep = classify_zero_potential(g, prm, cfg.solver);
  res.solutions.push_back({"zero_potential", rep});
  auto& out = res.audits;
  if (prm.det_mu() >= 0) {
    int survivors = 0;
    for (const auto& c : rep.candidates) survivors += c.classification != Classification::trivial;
    out.push_back(AuditOutcome::near("zero_potential.collapse", survivors, 0.0, 0.0));
    out.back().notes = "evidence only: seeds that did not collapse to zero";
    return;
  }
  out.push_back(require_positive(AuditOutcome::interval("zero_potential.residual", rep.residual_sup, 0.0, 1e-6, false), rep));
  guarded(out, "ratio_a0", [&](auto& o) { o.push_back(audit_ratio_a0(rep, prm)); });
  guarded(out, "pohozaev.zero_potential", [&](auto& o) { pohozaev_audit(o, "zero_potential", rep, prm); });
}

void run_ground_state(const ScenarioConfig& cfg, RunResult& res) {
  const Params& prm = cfg.model;
  const auto g = grid_of(cfg);
  SolveReport rep = ground_pipeline(g, prm, cfg.solver);
  res.solutions.push_back({"ground_state", rep});
  auto& out = res.audits;
  if (!nontrivial(rep)) {
    out.push_back(failed_audit("ground_state.nontrivial", "ground state solve returned " + to_string(rep.classification)));
    return;
  }
  pohozaev_audit(out, "ground_state", rep, prm);
  if (prm.p > 2) {
    out.push_back(AuditOutcome::near("ground_state.constraint",
                                     std::abs(constraint_G(rep.ledger, prm.p)) / rep.ledger.scale(), 0.0, 1e-6));
    out.push_back(AuditOutcome::interval("ground_state.energy_positive", rep.energy, 0.0, inf, true));
  }
  if (prm.mu11 == prm.mu22 && rep.classification == Classification::vectorial_positive)
    guarded(out, "rigidity", [&](auto& o) { add(o, audit_rigidity(rep, prm, cfg.solver)); });
  if (prm.mu11 == prm.mu22 && prm.p > 2) {
    guarded(out, "ground_state.below_semitrivial", [&](auto& o) {
      SolveReport V = sp_single_ground(g, prm.lambda, prm.mu11, prm.p, prm.kappa, cfg.solver);
      if (!V.converged()) throw std::runtime_error("semitrivial solve failed: " + V.status);
      const double ev = energy(V.solution, prm);
      o.push_back(AuditOutcome::interval("ground_state.below_semitrivial", ev - rep.energy, 0.0, inf, true));
      o.back().extras = {{"I(V,0)", ev}, {"I_ground", rep.energy}};
    });
  }
}

void run_two_solutions(const ScenarioConfig& cfg, RunResult& res) {
  const Params& prm = cfg.model;
  const auto g = grid_of(cfg);
  SolveReport a = global_minimize(g, prm, cfg.solver);
  SolveReport b = mountain_pass_continuation(g, prm, cfg.solver);
  res.solutions.push_back({"minimizer", a});
  res.solutions.push_back({"mountain_pass", b});
  auto& out = res.audits;
  out.push_back(require_positive(AuditOutcome::interval("two_solutions.minimizer_energy", a.energy, -inf, 0.0, true), a));
  out.push_back(
      require_positive(AuditOutcome::interval("two_solutions.mountain_pass_energy", b.energy, 0.0, inf, true), b));
  const double gap = std::max(sup(a.solution.first.values - b.solution.first.values),
                              sup(a.solution.second.values - b.solution.second.values));
  out.push_back(AuditOutcome::interval("two_solutions.distinct", gap, 1e-3, inf, true));
  pohozaev_audit(out, "minimizer", a, prm);
  pohozaev_audit(out, "mountain_pass", b, prm);
}

void run_mu12(const ScenarioConfig& cfg, RunResult& res) {
  const Params& prm = cfg.model;
  const auto g = grid_of(cfg);
  std::vector<SolveReport> reps = mu12_continuation(g, prm, cfg.mu12_schedule, cfg.solver);
  SolveReport V = hartree_ground(g, prm.lambda, -1.0, cfg.solver);
  auto& out = res.audits;
  if (!V.converged()) {
    out.push_back(failed_audit("mu12.limit_state", "limit state solve failed: " + V.status));
    return;
  }
  std::vector<double> dist;
  int not_positive = 0;
  for (std::size_t k = 0; k < reps.size(); ++k) {
    const double mu = cfg.mu12_schedule[std::min(k, cfg.mu12_schedule.size() - 1)];
    const auto& u = reps[k].solution;
    const double s = std::sqrt(mu);
    dist.push_back(std::max(sup(s * u.first.values - V.solution.first.values),
                            sup(s * u.second.values - V.solution.first.values)));
    not_positive += reps[k].classification != Classification::vectorial_positive;
    res.solutions.push_back({"mu12=" + fmt(mu), reps[k]});
  }
  not_positive += int(cfg.mu12_schedule.size() - reps.size());
  double worst = -inf;
  for (std::size_t k = 1; k < dist.size(); ++k) worst = std::max(worst, dist[k] - dist[k - 1]);
  out.push_back(AuditOutcome::interval("mu12.distance_decreasing", worst, -inf, 0.0, true));
  for (std::size_t k = 0; k < dist.size(); ++k) out.back().extras.push_back({"distance[" + fmt(cfg.mu12_schedule[k]) + "]", dist[k]});
  out.push_back(AuditOutcome::near("mu12.positive", not_positive, 0.0, 0.0));
  for (std::size_t k = 0; k < reps.size(); ++k) {
    Params at = prm;
    at.mu12 = cfg.mu12_schedule[k];
    pohozaev_audit(out, "mu12=" + fmt(at.mu12), reps[k], at);
  }
}

void run_morse(const ScenarioConfig& cfg, RunResult& res) {
  const Params& prm = cfg.model;
  const auto g = grid_of(cfg);
  SolveReport s = sp_single_ground(g, prm.lambda, prm.mu11, prm.p, 1.0, cfg.solver);
  res.solutions.push_back({"semitrivial", s});
  guarded(res.audits, "morse", [&](auto& o) { add(o, audit_morse_semitrivial(g, prm, cfg.solver)); });
  Params scalar = prm;
  scalar.mu12 = 0;
  scalar.kappa = 1;
  guarded(res.audits, "pohozaev.semitrivial", [&](auto& o) { pohozaev_audit(o, "semitrivial", s, scalar); });
}

void run_pohozaev_check(const ScenarioConfig& cfg, RunResult& res) {
  const Params& prm = cfg.model;
  SolverConfig solver = cfg.solver;
  solver.polish_steps = std::max(solver.polish_steps, 3);
  const double r_max = cfg.grid.resolved_r_max(prm.lambda);
  const auto coarse = make_grid(cfg.grid.n, r_max);
  const auto fine = make_grid(2 * coarse->n() - 1, r_max);
  SolveReport a = ground_pipeline(coarse, prm, solver);
  SolveReport b = ground_pipeline(fine, prm, solver);
  res.solutions.push_back({"n=" + std::to_string(coarse->n()), a});
  res.solutions.push_back({"n=" + std::to_string(fine->n()), b});
  auto& out = res.audits;
  if (!nontrivial(a) || !nontrivial(b)) {
    out.push_back(failed_audit("pohozaev.refinement", "no nontrivial state to check"));
    return;
  }
  out.push_back(audit_pohozaev("pohozaev.coarse", a, prm));
  const double ra = std::abs(a.pohozaev_residual) / a.ledger.scale();
  const double rb = std::abs(b.pohozaev_residual) / b.ledger.scale();
  out.push_back(AuditOutcome::interval("pohozaev.refinement", ra / rb, 3.0, inf, false));
  out.back().extras = {{"coarse", ra}, {"fine", rb}};
}

void run_audit_suite(const ScenarioConfig& cfg, RunResult& res) {
  const SolverConfig solver = cfg.solver;
  const int n = cfg.grid.n;
  const double r_max = cfg.grid.resolved_r_max(1.0);
  const std::uint64_t seed = cfg.rng_seed;
  const int samples = cfg.audit_samples;
  using Task = std::function<std::vector<AuditOutcome>()>;
  std::vector<Task> tasks;

  tasks.push_back([] {
    std::vector<AuditOutcome> o;
    AngularRule<double> rule(256);
    o.push_back(AuditOutcome::near("cp[1]", cp_constant(1.0, rule), 2.0, 1e-10));
    o.push_back(AuditOutcome::near("cp[3]", cp_constant(3.0, rule), 6.0, 1e-10));
    for (double p : {1.5, 2.0, 2.5, 3.0, 4.0, 4.9})
      o.push_back(AuditOutcome::interval("cp_jensen[p=" + format_label(p) + "]",
                                         cp_constant(p, rule) - std::pow(2.0, (p + 1) / 2), 0.0, inf, true));
    return o;
  });
  tasks.push_back([=] {
    std::mt19937_64 rng(seed);
    return std::vector<AuditOutcome>{audit_cubic_reduction(random_pair(make_grid(n, r_max), rng))};
  });
  tasks.push_back([] {
    std::vector<AuditOutcome> o;
    for (double lambda : {2.0, 3.0, 5.0})
      for (double p : {1.1, 1.5, 2.0}) o.push_back(audit_h_inequality(lambda, p));
    return o;
  });
  for (double p : {5.0, 1.0, 0.5})
    tasks.push_back([=] {
      return std::vector<AuditOutcome>{audit_identity_combination(make_grid(513, r_max), p, samples, seed)};
    });
  tasks.push_back([=] { return std::vector<AuditOutcome>{audit_hartree_sign(make_grid(513, r_max), samples, seed)}; });
  tasks.push_back([=] {
    std::vector<AuditOutcome> o;
    const auto g = make_grid(n, r_max);
    Params prm;
    prm.mu11 = 3;
    prm.mu22 = 1;
    prm.mu12 = 2;
    prm.kappa = 0;
    SolveReport r = classify_zero_potential(g, prm, solver);
    guarded(o, "ratio_a0", [&](auto& x) { x.push_back(audit_ratio_a0(r, prm)); });
    guarded(o, "pohozaev.zero_potential", [&](auto& x) { x.push_back(audit_pohozaev("pohozaev.zero_potential", r, prm)); });
    prm.mu11 = prm.mu22 = prm.mu12 = 1;
    SolveReport z = classify_zero_potential(g, prm, solver);
    int survivors = 0;
    for (const auto& c : z.candidates) survivors += c.classification != Classification::trivial;
    o.push_back(AuditOutcome::near("zero_potential.collapse", survivors, 0.0, 0.0));
    return o;
  });
  tasks.push_back([=] {
    std::vector<AuditOutcome> o;
    const auto g = make_grid(n, r_max);
    Params prm;
    prm.mu11 = prm.mu22 = prm.mu12 = 1;
    prm.p = 3;
    SolveReport r = minimize_on_manifold(g, prm, solver);
    guarded(o, "rigidity", [&](auto& x) { add(x, audit_rigidity(r, prm, solver)); });
    guarded(o, "pohozaev.ground_state", [&](auto& x) { x.push_back(audit_pohozaev("pohozaev.ground_state", r, prm)); });
    o.push_back(AuditOutcome::near("ground_state.constraint", std::abs(constraint_G(r.ledger, prm.p)) / r.ledger.scale(),
                                   0.0, 1e-6));
    return o;
  });
  tasks.push_back([=] {
    std::vector<AuditOutcome> o;
    const auto g = make_grid(n, r_max);
    Params prm;
    prm.mu11 = prm.mu22 = 1;
    prm.mu12 = 0.5;
    prm.p = 2.5;
    SolveReport r = minimize_on_manifold(g, prm, solver);
    guarded(o, "rigidity[p=2.5]", [&](auto& x) { add(x, audit_rigidity(r, prm, solver)); });
    guarded(o, "morse", [&](auto& x) { add(x, audit_morse_semitrivial(g, prm, solver)); });
    prm.p = 3;
    guarded(o, "morse", [&](auto& x) { add(x, audit_morse_semitrivial(g, prm, solver)); });
    guarded(o, "energy_comparison", [&](auto& x) { add(x, audit_energy_comparison(g, prm, solver)); });
    return o;
  });
  tasks.push_back([=] {
    std::vector<AuditOutcome> o;
    const auto g = make_grid(n, r_max);
    guarded(o, "coupling_monotonicity", [&](auto& x) { x.push_back(audit_coupling_monotonicity(g, 1.0, -1.0, 3.0, solver)); });
    guarded(o, "scaling", [&](auto& x) { add(x, audit_scaling_lemma(g, 4.0, 1.0, 1.0, 3.0, solver)); });
    guarded(o, "scaling", [&](auto& x) { add(x, audit_scaling_lemma(g, 4.0, 1.0, 2.0, 3.0, solver)); });
    return o;
  });

  for (auto& part : run_parallel(tasks, cfg.workers)) add(res.audits, std::move(part));
}

void collect_failures(RunResult& res) {
  for (const auto& s : res.solutions)
    if (s.report.classification == Classification::diverged)
      res.failures.push_back(s.label + ": diverged (" + s.report.status + ")");
  for (const auto& a : res.audits)
    if (!a.passed) res.failures.push_back("audit " + a.name + " failed (measured " + fmt(a.measured) + ")");
}

json solution_json(const LabeledSolution& s, const std::string& file) {
  json j = {{"label", s.label}, {"field_file", file}};
  const json body = to_json(s.report);
  for (const auto& [k, v] : body.items()) j[k] = v;
  return j;
}

std::string field_file(const std::string& prefix, const std::string& label) {
  return "fields_" + prefix + slug(label) + ".csv";
}

json run_json(const RunResult& res, const std::string& prefix) {
  json sols = json::array(), audits = json::array(), fails = json::array();
  for (const auto& s : res.solutions) sols.push_back(solution_json(s, field_file(prefix, s.label)));
  for (const auto& a : res.audits) audits.push_back(to_json(a));
  for (const auto& f : res.failures) fails.push_back(f);
  return {{"passed", res.ok()}, {"failures", fails}, {"solutions", sols}, {"audits", audits}};
}

}  // namespace

// ---------------------------------------------------------------- public

std::string to_string(Scenario s) {
  for (const auto& [k, name] : scenario_names)
    if (k == s) return name;
  return "ground_state";
}

Scenario scenario_from(const std::string& s) {
  for (const auto& [k, name] : scenario_names)
    if (s == name) return k;
  std::string list;
  for (const auto& [k, name] : scenario_names) list += (list.empty() ? "" : ", ") + std::string(name);
  throw ConfigError("scenario: unknown value '" + s + "' (expected one of " + list + ")");
}

double GridSpec::resolved_r_max(double lambda) const {
  return r_max ? *r_max : 20 / std::sqrt(lambda > 0 ? lambda : 1.0);
}

void ScenarioConfig::validate() const {
  const double p = model.p;
  switch (scenario) {
    case Scenario::ground_state:
    case Scenario::morse_report:
      if (!(p > 1 && p < 5)) throw ConfigError(to_string(scenario) + ": p must lie in (1,5)");
      break;
    case Scenario::two_solutions:
      if (!(p > 1 && p < 2)) throw ConfigError("two_solutions: p must lie in (1,2)");
      break;
    case Scenario::mu12_continuation:
      if (!(p > 1 && p <= 2)) throw ConfigError("mu12_continuation: p must lie in (1,2]");
      if (mu12_schedule.empty()) throw ConfigError("mu12_continuation: mu12_schedule must not be empty");
      for (std::size_t k = 0; k < mu12_schedule.size(); ++k)
        if (!(mu12_schedule[k] > 0) || (k && !(mu12_schedule[k] > mu12_schedule[k - 1])))
          throw ConfigError("mu12_continuation: mu12_schedule must be positive and increasing");
      break;
    case Scenario::pohozaev_check:
      if (model.kappa != 0 && !(p > 1 && p < 5)) throw ConfigError("pohozaev_check: p must lie in (1,5)");
      break;
    case Scenario::sweep:
      if (!sweep) throw ConfigError("sweep: missing [sweep] table");
      if (!sweep_parameters.count(sweep->parameter))
        throw ConfigError("sweep: parameter must be one of lambda, mu11, mu22, mu12, p, kappa");
      if (sweep->values.empty()) throw ConfigError("sweep: values must not be empty");
      if (sweep->scenario == Scenario::sweep || sweep->scenario == Scenario::audit_suite)
        throw ConfigError("sweep: inner scenario must be a single solve");
      for (const auto& c : expand_sweep(*this)) c.validate();
      return;
    case Scenario::zero_potential:
      if (!(model.mu11 > 0 && model.mu22 > 0 && model.mu12 > 0))
        throw ConfigError("zero_potential: mu11, mu22 and mu12 must be positive");
      break;
    case Scenario::audit_suite:
      break;
  }
  if (scenario != Scenario::zero_potential && scenario != Scenario::audit_suite) model.validate();
  if (!(model.lambda > 0)) throw ConfigError("model: lambda must be positive");
  if (model.angular_nodes < 64 || model.angular_nodes % 2) throw ConfigError("model: angular_nodes must be even and >= 64");
  solver.validate();
  if (grid.n < 16) throw ConfigError("grid: n must be >= 16");
  if (grid.r_max && !(*grid.r_max > 0)) throw ConfigError("grid: r_max must be positive");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (audit_samples < 1) throw ConfigError("audit: samples must be >= 1");
}

ScenarioConfig parse_config(std::string_view text, const std::string& source) {
  toml::table tbl;
  try {
    tbl = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw ConfigError(os.str());
  }
  check_keys(tbl,
             {"scenario", "output_dir", "rng_seed", "workers", "model", "grid", "solver", "continuation", "audit",
              "sweep"},
             "config");
  ScenarioConfig cfg;
  std::string scenario;
  read(tbl, "scenario", scenario, "config");
  if (scenario.empty()) throw ConfigError("config: missing key 'scenario'");
  cfg.scenario = scenario_from(scenario);
  read(tbl, "output_dir", cfg.output_dir, "config");
  std::int64_t seed = static_cast<std::int64_t>(cfg.rng_seed);
  read(tbl, "rng_seed", seed, "config");
  if (seed < 0) throw ConfigError("config: rng_seed must be nonnegative");
  cfg.rng_seed = static_cast<std::uint64_t>(seed);
  read(tbl, "workers", cfg.workers, "config");

  if (const auto* m = subtable(tbl, "model")) {
    check_keys(*m, {"lambda", "mu11", "mu22", "mu12", "p", "kappa", "positive_part", "angular_nodes"}, "model");
    read(*m, "lambda", cfg.model.lambda, "model");
    read(*m, "mu11", cfg.model.mu11, "model");
    read(*m, "mu22", cfg.model.mu22, "model");
    read(*m, "mu12", cfg.model.mu12, "model");
    read(*m, "p", cfg.model.p, "model");
    read(*m, "kappa", cfg.model.kappa, "model");
    read(*m, "positive_part", cfg.model.positive_part, "model");
    read(*m, "angular_nodes", cfg.model.angular_nodes, "model");
  }
  if (const auto* gtab = subtable(tbl, "grid")) {
    check_keys(*gtab, {"n", "r_max"}, "grid");
    read(*gtab, "n", cfg.grid.n, "grid");
    double r = 0;
    if (gtab->get("r_max")) {
      read(*gtab, "r_max", r, "grid");
      cfg.grid.r_max = r;
    }
  }
  if (const auto* s = subtable(tbl, "solver")) {
    check_keys(*s,
               {"tol", "max_iter", "damping", "continuation_steps", "min_step", "inner_tol", "descent_tol",
                "polish_steps", "seed_profile", "seed_width", "seed_amplitude", "seed_file"},
               "solver");
    SolverConfig& c = cfg.solver;
    read(*s, "tol", c.tol, "solver");
    read(*s, "max_iter", c.max_iter, "solver");
    read(*s, "damping", c.damping, "solver");
    read(*s, "continuation_steps", c.continuation_steps, "solver");
    read(*s, "min_step", c.min_step, "solver");
    read(*s, "inner_tol", c.inner_tol, "solver");
    read(*s, "descent_tol", c.descent_tol, "solver");
    read(*s, "polish_steps", c.polish_steps, "solver");
    std::string profile = to_string(c.seed_profile);
    read(*s, "seed_profile", profile, "solver");
    c.seed_profile = seed_profile_from(profile);
    read(*s, "seed_width", c.seed_width, "solver");
    read(*s, "seed_amplitude", c.seed_amplitude, "solver");
    read(*s, "seed_file", c.seed_file, "solver");
  }
  if (const auto* c = subtable(tbl, "continuation")) {
    check_keys(*c, {"mu12_schedule"}, "continuation");
    if (c->get("mu12_schedule")) cfg.mu12_schedule = read_reals(*c, "mu12_schedule", "continuation");
  }
  if (const auto* a = subtable(tbl, "audit")) {
    check_keys(*a, {"samples"}, "audit");
    read(*a, "samples", cfg.audit_samples, "audit");
  }
  if (const auto* s = subtable(tbl, "sweep")) {
    check_keys(*s, {"parameter", "values", "scenario"}, "sweep");
    SweepAxis ax;
    read(*s, "parameter", ax.parameter, "sweep");
    ax.values = read_reals(*s, "values", "sweep");
    std::string inner = to_string(ax.scenario);
    read(*s, "scenario", inner, "sweep");
    ax.scenario = scenario_from(inner);
    cfg.sweep = ax;
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str(), path);
}

std::vector<ScenarioConfig> expand_sweep(const ScenarioConfig& cfg) {
  if (cfg.scenario != Scenario::sweep || !cfg.sweep) return {cfg};
  std::vector<ScenarioConfig> out;
  for (double v : cfg.sweep->values) {
    ScenarioConfig c = cfg;
    c.scenario = cfg.sweep->scenario;
    c.sweep.reset();
    c.workers = 1;
    set_parameter(c.model, cfg.sweep->parameter, v);
    out.push_back(std::move(c));
  }
  return out;
}

json to_json(const ScenarioConfig& cfg) {
  json j = {{"scenario", to_string(cfg.scenario)},
            {"model", to_json(cfg.model)},
            {"grid", {{"n", cfg.grid.n}, {"r_max", cfg.grid.resolved_r_max(cfg.model.lambda)}}},
            {"solver", to_json(cfg.solver)},
            {"continuation", {{"mu12_schedule", cfg.mu12_schedule}}},
            {"audit", {{"samples", cfg.audit_samples}}},
            {"rng_seed", cfg.rng_seed}};
  if (cfg.sweep)
    j["sweep"] = {{"parameter", cfg.sweep->parameter},
                  {"values", cfg.sweep->values},
                  {"scenario", to_string(cfg.sweep->scenario)}};
  return j;
}

RunResult execute(const ScenarioConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  RunResult res;
  switch (cfg.scenario) {
    case Scenario::zero_potential: run_zero_potential(cfg, res); break;
    case Scenario::ground_state: run_ground_state(cfg, res); break;
    case Scenario::two_solutions: run_two_solutions(cfg, res); break;
    case Scenario::mu12_continuation: run_mu12(cfg, res); break;
    case Scenario::morse_report: run_morse(cfg, res); break;
    case Scenario::pohozaev_check: run_pohozaev_check(cfg, res); break;
    case Scenario::audit_suite: run_audit_suite(cfg, res); break;
    case Scenario::sweep: {
      const auto runs = expand_sweep(cfg);
      std::vector<std::function<RunResult()>> tasks;
      for (const auto& c : runs) tasks.push_back([c] { return execute(c); });
      res.entries = run_parallel(tasks, cfg.workers);
      res.entry_values = cfg.sweep->values;
      for (std::size_t k = 0; k < res.entries.size(); ++k)
        for (const auto& f : res.entries[k].failures)
          res.failures.push_back(cfg.sweep->parameter + "=" + fmt(res.entry_values[k]) + ": " + f);
      break;
    }
  }
  if (cfg.scenario != Scenario::sweep) collect_failures(res);
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

json report_json(const ScenarioConfig& cfg, const RunResult& res) {
  const auto g = grid_of(cfg);
  json j = {{"tool", "splab"},
            {"version", version_string},
            {"scenario", to_string(cfg.scenario)},
            {"config", to_json(cfg)},
            {"grid", {{"n", g->n()}, {"r_max", g->r_max()}, {"h", g->h()}}},
            {"rng_seed", cfg.rng_seed}};
  if (cfg.scenario == Scenario::sweep) {
    json entries = json::array();
    for (std::size_t k = 0; k < res.entries.size(); ++k) {
      json e = {{"parameter", cfg.sweep->parameter}, {"value", res.entry_values[k]}};
      const json body = run_json(res.entries[k], std::to_string(k) + "_");
      for (const auto& [key, v] : body.items()) e[key] = v;
      entries.push_back(e);
    }
    json fails = json::array();
    for (const auto& f : res.failures) fails.push_back(f);
    j["passed"] = res.ok();
    j["failures"] = fails;
    j["entries"] = entries;
  } else {
    const json body = run_json(res, "");
    for (const auto& [key, v] : body.items()) j[key] = v;
  }
  return j;
}

int run_scenario(const ScenarioConfig& cfg, std::ostream& log) {
  namespace fs = std::filesystem;
  const fs::path dir = cfg.output_dir.empty() ? fs::path("splab_out") : fs::path(cfg.output_dir);
  RunResult res = execute(cfg);
  try {
    write_text(dir / "report.json", report_json(cfg, res).dump(2) + "\n");

    json timing = {{"wall_seconds", res.wall_seconds}};
    if (!res.entries.empty()) {
      json per = json::array();
      for (const auto& e : res.entries) per.push_back(e.wall_seconds);
      timing["entries"] = per;
    }
    write_text(dir / "timing.json", timing.dump(2) + "\n");

    auto dump_run = [&](const RunResult& r, const std::string& prefix) {
      for (const auto& s : r.solutions) {
        std::ostringstream os;
        write_pair_csv(s.report.solution, os);
        write_text(dir / field_file(prefix, s.label), os.str());
      }
    };
    std::vector<AuditOutcome> all = res.audits;
    if (res.entries.empty()) {
      dump_run(res, "");
    } else {
      std::ostringstream summary;
      summary << "index," << cfg.sweep->parameter << ",label,classification,energy,residual_sup,pohozaev_relative,status\n";
      for (std::size_t k = 0; k < res.entries.size(); ++k) {
        dump_run(res.entries[k], std::to_string(k) + "_");
        for (const auto& s : res.entries[k].solutions) {
          const double scale = s.report.ledger.scale();
          summary << k << ',' << format_real(res.entry_values[k]) << ',' << s.label << ','
                  << to_string(s.report.classification) << ',' << format_real(s.report.energy) << ','
                  << format_real(s.report.residual_sup) << ','
                  << format_real(scale > 0 ? s.report.pohozaev_residual / scale : 0.0) << ",\"" << s.report.status
                  << "\"\n";
        }
        for (auto a : res.entries[k].audits) {
          a.name = cfg.sweep->parameter + "=" + fmt(res.entry_values[k]) + ":" + a.name;
          all.push_back(std::move(a));
        }
      }
      write_text(dir / "summary.csv", summary.str());
    }
    std::ostringstream audits;
    write_audit_csv(all, audits);
    write_text(dir / "audits.csv", audits.str());
  } catch (const std::exception& e) {
    log << "I/O error: " << e.what() << '\n';
    return 2;
  }

  int passed = 0;
  for (const auto& a : res.audits) passed += a.passed;
  for (const auto& e : res.entries)
    for (const auto& a : e.audits) passed += a.passed;
  log << to_string(cfg.scenario) << ": " << passed << " audits passed, " << res.failures.size() << " failures; report in "
      << (dir / "report.json").string() << '\n';
  for (const auto& f : res.failures) log << "FAIL " << f << '\n';
  return res.ok() ? 0 : 1;
}

}  // namespace splab
