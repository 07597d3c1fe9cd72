#include "splab/audits.hpp"

#include "doctest.h"
#include "oracles.hpp"

using namespace splab;

namespace {

bool all_passed(const std::vector<AuditOutcome>& v) {
  for (const auto& o : v)
    if (!o.passed) return false;
  return !v.empty();
}

const AuditOutcome& find(const std::vector<AuditOutcome>& v, const std::string& suffix) {
  for (const auto& o : v)
    if (o.name.size() >= suffix.size() && o.name.compare(o.name.size() - suffix.size(), suffix.size(), suffix) == 0)
      return o;
  throw std::runtime_error("no audit named *" + suffix);
}

}  // namespace

TEST_CASE("outcome semantics") {
  CHECK(AuditOutcome::near("a", 1.0, 1.1, 0.2).passed);
  CHECK_FALSE(AuditOutcome::near("a", 1.0, 1.5, 0.2).passed);
  CHECK_FALSE(AuditOutcome::near("a", std::nan(""), 0.0, 1.0).passed);
  CHECK(AuditOutcome::interval("b", 0.0, 0.0, 1.0, false).passed);
  CHECK_FALSE(AuditOutcome::interval("b", 0.0, 0.0, 1.0, true).passed);
  CHECK(AuditOutcome::interval("b", -5.0, -std::numeric_limits<double>::infinity(), 0.0, true).passed);
  CHECK_FALSE(AuditOutcome::interval("b", std::nan(""), -1.0, 1.0, false).passed);
}

TEST_CASE("h inequality: closed-form minimum against a scan") {
  const double lambda = 2, p = 1.5;
  const double tstar = h_critical_point(p);
  CHECK(tstar == doctest::Approx(0.125));
  CHECK(h_inequality(lambda, p, tstar) == doctest::Approx(1.5).epsilon(1e-12));
  const double scan = oracle::scan_min([&](double t) { return lambda + 4 * t - std::pow(2.0, p) * std::pow(t, p - 1); }, 0, 10);
  CHECK(std::abs(h_inequality(lambda, p, tstar) - scan) <= 1e-10);
  for (double l : {2.0, 3.0, 5.0})
    for (double q : {1.1, 1.5, 2.0}) {
      auto o = audit_h_inequality(l, q);
      CHECK(o.passed);
      CHECK(o.measured >= 0);
    }
  // At p = 2 the linear terms cancel.
  for (double t : {0.0, 0.3, 7.0}) CHECK(h_inequality(3.0, 2.0, t) == doctest::Approx(3.0));
  CHECK_THROWS_AS(audit_h_inequality(2.0, 2.5), AuditInapplicable);
}

TEST_CASE("cubic reduction on random pairs") {
  auto g = make_grid(513, 15.0);
  std::mt19937_64 rng(31);
  for (int k = 0; k < 5; ++k) {
    auto o = audit_cubic_reduction(random_pair(g, rng));
    CHECK(o.passed);
    CHECK(o.measured <= 1e-10);
  }
}

TEST_CASE("identity combinations are positive outside (1,5)") {
  auto g = make_grid(257, 15.0);
  for (double p : {5.0, 1.0, 0.5}) CHECK(audit_identity_combination(g, p, 200, 42).passed);
  CHECK_THROWS_AS(audit_identity_combination(g, 3.0, 10, 42), AuditInapplicable);
  CHECK(audit_hartree_sign(g, 200, 42).passed);
}

TEST_CASE("randomized audits are reproducible") {
  auto g = make_grid(257, 15.0);
  auto a = audit_identity_combination(g, 5.0, 50, 7);
  auto b = audit_identity_combination(g, 5.0, 50, 7);
  CHECK(a.measured == b.measured);
  auto c = audit_identity_combination(g, 5.0, 50, 8);
  CHECK(c.measured != a.measured);
}

TEST_CASE("Morse audit at the semitrivial state") {
  auto g = make_grid(1025, 20.0);
  SolverConfig cfg;
  Params prm;
  prm.mu11 = prm.mu22 = 1;
  prm.mu12 = 0.5;
  prm.p = 2.5;
  auto v = audit_morse_semitrivial(g, prm, cfg);
  CHECK(all_passed(v));
  CHECK(find(v, ".II_negative").measured < 0);
  CHECK(find(v, ".I_negative").measured < 0);
  CHECK(find(v, ".I_identity").measured <= 1e-4);
  prm.p = 3;
  auto w = audit_morse_semitrivial(g, prm, cfg);
  CHECK(all_passed(w));
  CHECK(find(w, ".nehari").measured <= 1e-6);
  // Below the threshold exponent (I) need not be negative.
  prm.mu11 = prm.mu22 = 0.1;
  prm.mu12 = 0.05;
  prm.p = 2.1;
  auto below = audit_morse_semitrivial(g, prm, cfg);
  CHECK(all_passed(below));
  for (const auto& o : below) CHECK(o.name.find(".I_negative") == std::string::npos);
}

TEST_CASE("energy comparison, monotonicity and rescaling") {
  auto g = make_grid(2049, 20.0);
  SolverConfig cfg;
  Params prm;
  prm.mu11 = prm.mu22 = 1;
  prm.mu12 = 0.5;
  prm.p = 3;
  CHECK(all_passed(audit_energy_comparison(g, prm, cfg)));
  CHECK(audit_coupling_monotonicity(g, 1.0, -1.0, 3.0, cfg).passed);
  CHECK_THROWS_AS(audit_coupling_monotonicity(g, -1.0, 1.0, 3.0, cfg), AuditInapplicable);
  CHECK(all_passed(audit_scaling_lemma(g, 4.0, 1.0, 1.0, 3.0, cfg)));
  CHECK_THROWS_AS(audit_scaling_lemma(g, 0.0, 1.0, 1.0, 3.0, cfg), AuditInapplicable);
}

TEST_CASE("state-based audits reject unsuitable states") {
  auto g = make_grid(513, 20.0);
  SolverConfig cfg;
  Params prm;
  prm.mu11 = prm.mu22 = prm.mu12 = 1;
  prm.kappa = 0;
  auto trivial = classify_zero_potential(g, prm, cfg);
  CHECK_THROWS_AS(audit_ratio_a0(trivial, prm), AuditInapplicable);
  CHECK_THROWS_AS(audit_pohozaev("p", trivial, prm), AuditInapplicable);
  prm.mu22 = 2;
  prm.kappa = 1;
  CHECK_THROWS_AS(audit_rigidity(trivial, prm, cfg), AuditInapplicable);
}

TEST_CASE("ratio and Pohozaev audits on the zero-potential state") {
  auto g = make_grid(1025, 20.0);
  SolverConfig cfg;
  Params prm;
  prm.mu11 = 3;
  prm.mu22 = 1;
  prm.mu12 = 2;
  prm.kappa = 0;
  auto r = classify_zero_potential(g, prm, cfg);
  auto ratio = audit_ratio_a0(r, prm);
  CHECK(ratio.passed);
  CHECK(ratio.measured <= 1e-4);
  REQUIRE(ratio.extras.at(0).first == "a0");
  CHECK(ratio.extras.at(0).second == doctest::Approx(1.290994).epsilon(1e-6));
  CHECK(audit_pohozaev("p", r, prm).passed);
}
