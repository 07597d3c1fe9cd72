#pragma once

#include "splab/angular.hpp"
#include "splab/radial.hpp"

#include <cmath>
#include <stdexcept>

namespace splab {

template <typename Scalar>
struct ModelParams {
  Scalar lambda = 1;
  Scalar mu11 = 0, mu22 = 0, mu12 = 0;
  Scalar p = 3;
  // Strength of the power term; 0 gives the system without it.
  Scalar kappa = 1;
  bool positive_part = false;
  int angular_nodes = 256;

  Scalar det_mu() const { return mu11 * mu22 - mu12 * mu12; }
  Scalar a0() const { return std::sqrt((mu11 + mu12) / (mu22 + mu12)); }

  void validate() const {
    if (!(lambda > 0)) throw ConfigError("model: lambda must be positive");
    if (!(kappa >= 0)) throw ConfigError("model: kappa must be nonnegative");
    if (kappa > 0 && !(p > 0 && p <= 5)) throw ConfigError("model: p must lie in (0,5]");
  }
};

template <typename Scalar>
struct IdentityLedger {
  Scalar a = 0, b = 0, c = 0, d = 0;
  Scalar scale() const { return std::abs(a) + std::abs(b) + std::abs(c) + std::abs(d); }
};

using Params = ModelParams<double>;
using Ledger = IdentityLedger<double>;

// Model inner product; the pairing under which gradient() is the exact
// derivative of energy().
template <typename Scalar>
Scalar inner(const RadialField<Scalar>& f, const RadialField<Scalar>& g) {
  return f.grid->mass().dot(f.values.cwiseProduct(g.values));
}

template <typename Scalar>
Scalar inner(const FieldPair<Scalar>& f, const FieldPair<Scalar>& g) {
  return inner(f.first, g.first) + inner(f.second, g.second);
}

namespace detail {

template <typename Scalar>
Vec<Scalar> dirichlet(const Vec<Scalar>& v) {
  Vec<Scalar> w = v;
  w[w.size() - 1] = 0;
  return w;
}

// -sum mass * u * Delta u over the model nodes.
template <typename Scalar>
Scalar kinetic(const RadialGrid<Scalar>& g, const Vec<Scalar>& u) {
  Vec<Scalar> w = dirichlet(u);
  return -g.mass().dot(w.cwiseProduct(g.laplacian(w)));
}

// Everything the functional needs at a pair, computed once.
template <typename Scalar>
struct Evaluation {
  Vec<Scalar> v1, v2, chi1, chi2, phi1, phi2;
  Vec<Scalar> N, F1, F2, H11, H12, H22;
  bool degenerate = false;

  Evaluation(const FieldPair<Scalar>& u, const ModelParams<Scalar>& prm, int level) {
    const auto& g = u.grid();
    const int n = g.n();
    v1 = dirichlet(u.first.values);
    v2 = dirichlet(u.second.values);
    chi1 = Vec<Scalar>::Ones(n);
    chi2 = Vec<Scalar>::Ones(n);
    if (prm.positive_part) {
      for (int i = 0; i < n; ++i) {
        if (!(v1[i] > 0)) { v1[i] = 0; chi1[i] = 0; }
        if (!(v2[i] > 0)) { v2[i] = 0; chi2[i] = 0; }
      }
    }
    phi1 = g.poisson(v1.cwiseProduct(v1));
    phi2 = g.poisson(v2.cwiseProduct(v2));
    N = Vec<Scalar>::Zero(n);
    F1 = F2 = N;
    if (level >= 2) H11 = H12 = H22 = N;
    if (prm.kappa == 0) return;
    AngularRule<Scalar> rule(prm.angular_nodes);
    for (int i = 1; i < n - 1; ++i) {
      if (v1[i] == 0 && v2[i] == 0) continue;
      auto t = angular_terms(v1[i], v2[i], prm.p, rule, level >= 2);
      N[i] = t.N;
      F1[i] = t.F1;
      F2[i] = t.F2;
      if (level >= 2) {
        H11[i] = t.H11;
        H12[i] = t.H12;
        H22[i] = t.H22;
        degenerate = degenerate || t.degenerate;
      }
    }
  }
};

template <typename Scalar>
IdentityLedger<Scalar> ledger_of(const FieldPair<Scalar>& u, const ModelParams<Scalar>& prm,
                                 const Evaluation<Scalar>& e) {
  const auto& g = u.grid();
  const auto& M = g.mass();
  IdentityLedger<Scalar> L;
  L.a = kinetic(g, u.first.values) + kinetic(g, u.second.values);
  L.b = prm.lambda * (M.dot(u.first.values.cwiseAbs2()) + M.dot(u.second.values.cwiseAbs2()));
  Vec<Scalar> s1 = e.v1.cwiseAbs2(), s2 = e.v2.cwiseAbs2();
  L.c = prm.mu11 * M.dot(s1.cwiseProduct(e.phi1)) + prm.mu22 * M.dot(s2.cwiseProduct(e.phi2)) -
        2 * prm.mu12 * M.dot(s1.cwiseProduct(e.phi2));
  L.d = prm.kappa * M.dot(e.N);
  return L;
}

}  // namespace detail

template <typename Scalar>
IdentityLedger<Scalar> ledger(const FieldPair<Scalar>& u, const ModelParams<Scalar>& prm) {
  detail::Evaluation<Scalar> e(u, prm, 0);
  return detail::ledger_of(u, prm, e);
}

template <typename Scalar>
Scalar energy_from(const IdentityLedger<Scalar>& L, Scalar p) {
  return L.a / 2 + L.b / 2 + L.c / 4 - L.d / (p + 1);
}

template <typename Scalar>
Scalar energy(const FieldPair<Scalar>& u, const ModelParams<Scalar>& prm) {
  return energy_from(ledger(u, prm), prm.p);
}

template <typename Scalar>
Scalar nehari_J(const IdentityLedger<Scalar>& L) {
  return L.a + L.b + L.c - L.d;
}
template <typename Scalar>
Scalar pohozaev_P(const IdentityLedger<Scalar>& L, Scalar p) {
  return -L.a / 2 - Scalar(1.5) * L.b - Scalar(1.25) * L.c + 3 * L.d / (p + 1);
}
template <typename Scalar>
Scalar constraint_G(const IdentityLedger<Scalar>& L, Scalar p) {
  return Scalar(1.5) * L.a + L.b / 2 + Scalar(0.75) * L.c - (2 * p - 1) / (p + 1) * L.d;
}
template <typename Scalar>
Scalar nehari_J(const FieldPair<Scalar>& u, const ModelParams<Scalar>& prm) {
  return nehari_J(ledger(u, prm));
}
template <typename Scalar>
Scalar pohozaev_P(const FieldPair<Scalar>& u, const ModelParams<Scalar>& prm) {
  return pohozaev_P(ledger(u, prm), prm.p);
}
template <typename Scalar>
Scalar constraint_G(const FieldPair<Scalar>& u, const ModelParams<Scalar>& prm) {
  return constraint_G(ledger(u, prm), prm.p);
}

template <typename Scalar>
Scalar pohozaev_residual(const IdentityLedger<Scalar>& L, Scalar p, Scalar A, Scalar B, Scalar C, Scalar D) {
  return A / 2 * L.a + 3 * B / 2 * L.b + 5 * C / 4 * L.c - 3 * D / (p + 1) * L.d;
}
template <typename Scalar>
Scalar pohozaev_residual(const FieldPair<Scalar>& u, const ModelParams<Scalar>& prm, Scalar A = 1, Scalar B = 1,
                         Scalar C = 1, Scalar D = 1) {
  return pohozaev_residual(ledger(u, prm), prm.p, A, B, C, D);
}

namespace detail {

template <typename Scalar>
FieldPair<Scalar> gradient_of(const FieldPair<Scalar>& u, const ModelParams<Scalar>& prm, const Evaluation<Scalar>& e) {
  const auto& g = u.grid();
  const int n = g.n();
  Vec<Scalar> w1 = dirichlet(u.first.values), w2 = dirichlet(u.second.values);
  Vec<Scalar> r1 = -g.laplacian(w1) + prm.lambda * w1 +
                   (prm.mu11 * e.phi1 - prm.mu12 * e.phi2).cwiseProduct(e.v1) - prm.kappa * e.F1;
  Vec<Scalar> r2 = -g.laplacian(w2) + prm.lambda * w2 +
                   (prm.mu22 * e.phi2 - prm.mu12 * e.phi1).cwiseProduct(e.v2) - prm.kappa * e.F2;
  r1[0] = r2[0] = 0;
  r1[n - 1] = r2[n - 1] = 0;
  return FieldPair<Scalar>(RadialField<Scalar>(u.first.grid, std::move(r1)),
                           RadialField<Scalar>(u.first.grid, std::move(r2)));
}

}  // namespace detail

// Strong-form residual at nodes 1..n-2; zero at r=0 (reconstructed, not an
// unknown) and at the Dirichlet node.
template <typename Scalar>
FieldPair<Scalar> gradient(const FieldPair<Scalar>& u, const ModelParams<Scalar>& prm) {
  detail::Evaluation<Scalar> e(u, prm, 1);
  return detail::gradient_of(u, prm, e);
}

template <typename Scalar>
Scalar sup_norm(const FieldPair<Scalar>& f) {
  return std::max(f.first.values.cwiseAbs().maxCoeff(), f.second.values.cwiseAbs().maxCoeff());
}

// Second variation at a fixed pair. apply() is the strong-form Jacobian of
// gradient(); bilinear() is the corresponding symmetric form.
template <typename Scalar>
class Linearization {
 public:
  Linearization(const FieldPair<Scalar>& u, const ModelParams<Scalar>& prm)
      : grid_(u.grid_ptr()), prm_(prm), e_(u, prm, 2) {}

  bool degenerate() const { return e_.degenerate; }
  const detail::Evaluation<Scalar>& evaluation() const { return e_; }

  // Local (non-Poisson-derivative) diagonal blocks, per node.
  void local_blocks(Vec<Scalar>& d11, Vec<Scalar>& d12, Vec<Scalar>& d22) const {
    const auto& e = e_;
    d11 = (prm_.mu11 * e.phi1 - prm_.mu12 * e.phi2).cwiseProduct(e.chi1) - prm_.kappa * e.H11.cwiseProduct(e.chi1);
    d22 = (prm_.mu22 * e.phi2 - prm_.mu12 * e.phi1).cwiseProduct(e.chi2) - prm_.kappa * e.H22.cwiseProduct(e.chi2);
    d12 = -prm_.kappa * e.H12.cwiseProduct(e.chi1).cwiseProduct(e.chi2);
  }

  void apply(const Vec<Scalar>& x1, const Vec<Scalar>& x2, Vec<Scalar>& y1, Vec<Scalar>& y2) const {
    const auto& g = *grid_;
    const auto& e = e_;
    const int n = g.n();
    Vec<Scalar> p1 = detail::dirichlet(Vec<Scalar>(x1.cwiseProduct(e.chi1)));
    Vec<Scalar> p2 = detail::dirichlet(Vec<Scalar>(x2.cwiseProduct(e.chi2)));
    p1[0] = p2[0] = 0;
    Vec<Scalar> w1 = detail::dirichlet(x1), w2 = detail::dirichlet(x2);
    Vec<Scalar> d11, d12, d22;
    local_blocks(d11, d12, d22);
    Vec<Scalar> q1 = g.poisson(e.v1.cwiseProduct(p1));
    Vec<Scalar> q2 = g.poisson(e.v2.cwiseProduct(p2));
    y1 = -g.laplacian(w1) + prm_.lambda * w1 + d11.cwiseProduct(x1) + d12.cwiseProduct(x2) +
         2 * e.v1.cwiseProduct(prm_.mu11 * q1 - prm_.mu12 * q2);
    y2 = -g.laplacian(w2) + prm_.lambda * w2 + d12.cwiseProduct(x1) + d22.cwiseProduct(x2) +
         2 * e.v2.cwiseProduct(prm_.mu22 * q2 - prm_.mu12 * q1);
    y1[0] = y2[0] = 0;
    y1[n - 1] = y2[n - 1] = 0;
  }

  Scalar bilinear(const FieldPair<Scalar>& psi, const FieldPair<Scalar>& xi) const {
    Vec<Scalar> y1, y2;
    apply(xi.first.values, xi.second.values, y1, y2);
    const auto& M = grid_->mass();
    Vec<Scalar> a1 = detail::dirichlet(psi.first.values), a2 = detail::dirichlet(psi.second.values);
    return M.dot(a1.cwiseProduct(y1)) + M.dot(a2.cwiseProduct(y2));
  }

 private:
  GridPtr<Scalar> grid_;
  ModelParams<Scalar> prm_;
  detail::Evaluation<Scalar> e_;
};

template <typename Scalar>
struct QuadForm {
  Scalar value = 0;
  bool degenerate = false;
};

template <typename Scalar>
QuadForm<Scalar> hessian_quadform(const FieldPair<Scalar>& u, const FieldPair<Scalar>& psi,
                                  const ModelParams<Scalar>& prm) {
  Linearization<Scalar> lin(u, prm);
  return {lin.bilinear(psi, psi), lin.degenerate()};
}

template <typename Scalar>
Scalar hessian_bilinear(const FieldPair<Scalar>& u, const FieldPair<Scalar>& psi, const FieldPair<Scalar>& xi,
                        const ModelParams<Scalar>& prm) {
  return Linearization<Scalar>(u, prm).bilinear(psi, xi);
}

}  // namespace splab
