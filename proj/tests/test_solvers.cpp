#include "splab/solvers.hpp"

#include "doctest.h"
#include "oracles.hpp"

#include <filesystem>
#include <fstream>

using namespace splab;

namespace {

double peak(const SolveReport& r) { return r.solution.first.values[0]; }

double sup_diff(const Field& a, const Field& b) { return (a.values - b.values).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("scalar ground state matches the shooting oracle") {
  auto g = make_grid(2049, 20.0);
  SolverConfig cfg;
  const double q3 = oracle::ground_peak(1, 1, 3, 1, 10);
  CHECK(q3 == doctest::Approx(4.33739).epsilon(1e-5));
  auto s = sp_single_ground(g, 1, 0, 3, 1, cfg);
  REQUIRE(s.converged());
  CHECK(s.residual_sup <= cfg.tol);
  CHECK(peak(s) == doctest::Approx(q3).epsilon(1e-6));
  CHECK(s.solution.second.values.cwiseAbs().maxCoeff() == 0.0);

  auto s15 = sp_single_ground(g, 1, 0, 1.5, 1, cfg);
  REQUIRE(s15.converged());
  CHECK(peak(s15) == doctest::Approx(oracle::ground_peak(1, 1, 1.5, 1, 20)).epsilon(1e-6));
}

TEST_CASE("scalar ground state scales with lambda and the power strength") {
  SolverConfig cfg;
  auto g1 = make_grid(2049, 20.0);
  const double q = peak(sp_single_ground(g1, 1, 0, 3, 1, cfg));
  auto g4 = make_grid(2049, 10.0);
  CHECK(peak(sp_single_ground(g4, 4, 0, 3, 1, cfg)) == doctest::Approx(2 * q).epsilon(1e-6));
  CHECK(peak(sp_single_ground(g1, 1, 0, 3, 3, cfg)) == doctest::Approx(q / std::sqrt(3.0)).epsilon(1e-6));
}

TEST_CASE("Hartree ground state satisfies Nehari and Pohozaev") {
  auto g = make_grid(2049, 20.0);
  SolverConfig cfg;
  auto h = hartree_ground(g, 1, -1, cfg);
  REQUIRE(h.converged());
  CHECK(h.solution.first.values.minCoeff() >= 0);
  CHECK(peak(h) > 0);
  const Ledger& L = h.ledger;
  CHECK(std::abs(L.a + L.b + L.c) <= 1e-6 * L.scale());
  CHECK(std::abs(L.a / 2 + 1.5 * L.b + 1.25 * L.c) <= 1e-3 * L.scale());
  CHECK_THROWS(hartree_ground(g, 1, 1, cfg));
}

TEST_CASE("Newton returns to a solution from a perturbed start") {
  auto g = make_grid(1025, 20.0);
  SolverConfig cfg;
  auto s = sp_single_ground(g, 1, 0, 3, 1, cfg);
  Params prm;
  prm.p = 3;
  Pair start(Field(g, 1.05 * s.solution.first.values), Field::zero(g));
  auto r = newton_solve(start, prm, cfg, Active::first);
  REQUIRE(r.converged());
  CHECK(sup_diff(r.solution.first, s.solution.first) <= 1e-6);
  CHECK(r.trace.size() >= 2);
  CHECK(r.trace.back() <= cfg.tol);
}

TEST_CASE("polishing lowers the residual below the tolerance") {
  auto g = make_grid(1025, 20.0);
  SolverConfig cfg;
  cfg.tol = 1e-6;
  Params prm;
  prm.p = 3;
  auto s = sp_single_ground(g, 1, 0, 3, 1, cfg);
  Pair start(Field(g, 1.05 * s.solution.first.values), Field::zero(g));
  auto plain = newton_solve(start, prm, cfg, Active::first);
  cfg.polish_steps = 2;
  auto polished = newton_solve(start, prm, cfg, Active::first);
  REQUIRE(plain.converged());
  REQUIRE(polished.converged());
  CHECK(polished.residual_sup <= plain.residual_sup);
  CHECK(polished.residual_sup <= cfg.tol);
}

TEST_CASE("zero-potential system: vectorial state for negative determinant") {
  auto g = make_grid(1025, 20.0);
  SolverConfig cfg;
  Params prm;
  prm.mu11 = 3;
  prm.mu22 = 1;
  prm.mu12 = 2;
  prm.kappa = 0;
  auto r = classify_zero_potential(g, prm, cfg);
  REQUIRE(r.classification == Classification::vectorial_positive);
  CHECK(std::abs(r.ratio_mean - std::sqrt(5.0 / 3.0)) <= 1e-4);
  CHECK(r.ratio_max_deviation <= 1e-4);
  CHECK(r.residual_sup <= 1e-6);
}

TEST_CASE("zero-potential system: collapse for nonnegative determinant") {
  auto g = make_grid(1025, 20.0);
  SolverConfig cfg;
  Params prm;
  prm.kappa = 0;
  prm.mu12 = -0.5;
  CHECK_THROWS(classify_zero_potential(g, prm, cfg));
  for (auto [m11, m22, m12] : {std::tuple{1.0, 1.0, 1.0}, std::tuple{2.0, 1.0, 0.5}, std::tuple{2.0, 2.0, 1.0}}) {
    prm.mu11 = m11;
    prm.mu22 = m22;
    prm.mu12 = m12;
    auto r = classify_zero_potential(g, prm, cfg);
    CHECK(r.classification == Classification::trivial);
    CHECK(r.solution.first.values.cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(!r.candidates.empty());
    for (const auto& c : r.candidates) CHECK(c.classification == Classification::trivial);
  }
}

TEST_CASE("ground state on the constraint manifold reduces to the scalar problem") {
  auto g = make_grid(2049, 20.0);
  SolverConfig cfg;
  Params prm;
  prm.mu11 = prm.mu22 = prm.mu12 = 1;
  prm.p = 3;
  auto r = minimize_on_manifold(g, prm, cfg);
  REQUIRE(r.classification == Classification::vectorial_positive);
  CHECK(r.energy > 0);
  CHECK(std::abs(constraint_G(r.ledger, prm.p)) <= 1e-6 * r.ledger.scale());
  CHECK(sup_diff(r.solution.first, r.solution.second) <= 1e-5 * peak(r));
  CHECK(peak(r) == doctest::Approx(oracle::ground_peak(1, 3, 3, 1, 10)).epsilon(1e-6));
}

TEST_CASE("fiber projection lands on the constraint") {
  auto g = make_grid(2049, 20.0);
  Params prm;
  prm.mu11 = prm.mu22 = 1;
  prm.mu12 = 0.3;
  prm.p = 3.5;
  auto f = Field::from(g, [](double r) { return std::exp(-r * r / 4); });
  f.values[g->n() - 1] = 0;
  Pair u(f, Field(g, 0.5 * f.values));
  const double t = fiber_root(ledger(u, prm), prm.p);
  CHECK(t > 0);
  auto v = project_to_manifold(u, prm);
  const Ledger L = ledger(v, prm);
  CHECK(std::abs(constraint_G(L, prm.p)) <= 1e-6 * L.scale());
}

TEST_CASE("two positive states of opposite energy sign at weak coupling") {
  auto g = make_grid(1025, 20.0);
  SolverConfig cfg;
  Params prm;
  prm.mu11 = prm.mu22 = 0.03;
  prm.mu12 = 0.015;
  prm.p = 1.5;
  auto a = global_minimize(g, prm, cfg);
  auto b = mountain_pass_continuation(g, prm, cfg);
  REQUIRE(a.classification == Classification::vectorial_positive);
  REQUIRE(b.classification == Classification::vectorial_positive);
  CHECK(a.energy < 0);
  CHECK(b.energy > 0);
  CHECK(sup_diff(a.solution.first, b.solution.first) > 1e-3);
}

TEST_CASE("strong coupling pushes the rescaled state toward the limit profile") {
  auto g = make_grid(1025, 20.0);
  SolverConfig cfg;
  Params prm;
  prm.mu11 = prm.mu22 = 1;
  prm.p = 1.5;
  const std::vector<double> schedule = {50, 100, 200};
  auto reps = mu12_continuation(g, prm, schedule, cfg);
  REQUIRE(reps.size() == schedule.size());
  auto V = hartree_ground(g, 1, -1, cfg);
  double last = 1e300;
  for (std::size_t k = 0; k < reps.size(); ++k) {
    REQUIRE(reps[k].classification == Classification::vectorial_positive);
    const double s = std::sqrt(schedule[k]);
    const double d = std::max((s * reps[k].solution.first.values - V.solution.first.values).cwiseAbs().maxCoeff(),
                              (s * reps[k].solution.second.values - V.solution.first.values).cwiseAbs().maxCoeff());
    CHECK(d < last);
    last = d;
  }
}

TEST_CASE("solver configuration validation") {
  SolverConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  auto bad = [](auto mutate) {
    SolverConfig c;
    mutate(c);
    return c;
  };
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.tol = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.max_iter = 0; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.damping = 1.5; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.polish_steps = -1; }).validate(), ConfigError);
  CHECK_THROWS_AS(bad([](SolverConfig& c) { c.seed_width = 0; }).validate(), ConfigError);
}

TEST_CASE("seed profiles") {
  auto g = make_grid(257, 10.0);
  SolverConfig cfg;
  cfg.seed_profile = SeedProfile::sech;
  CHECK(seed_field(g, cfg, 2.0).values[0] == doctest::Approx(2.0));
  cfg.seed_profile = SeedProfile::file;
  cfg.seed_file = "/nonexistent/seed.csv";
  CHECK_THROWS_AS(seed_field(g, cfg), ConfigError);

  const auto path = std::filesystem::temp_directory_path() / "splab_seed_test.csv";
  {
    std::ofstream f(path);
    write_csv(Field::from(g, [](double r) { return std::exp(-r * r / 4); }), f);
  }
  cfg.seed_file = path.string();
  auto s = seed_field(make_grid(513, 10.0), cfg);
  CHECK(s.values[0] == doctest::Approx(1.0));
  CHECK(s.values[256] == doctest::Approx(std::exp(-25.0 / 4)).epsilon(1e-6));
  std::filesystem::remove(path);
}

TEST_CASE("solves are deterministic") {
  auto g = make_grid(513, 20.0);
  SolverConfig cfg;
  Params prm;
  prm.mu11 = prm.mu22 = 1;
  prm.mu12 = 0.5;
  prm.p = 2.5;
  auto a = minimize_on_manifold(g, prm, cfg);
  auto b = minimize_on_manifold(g, prm, cfg);
  CHECK(a.solution.first.values == b.solution.first.values);
  CHECK(a.solution.second.values == b.solution.second.values);
  CHECK(a.energy == b.energy);
}
