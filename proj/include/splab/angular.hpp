#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace splab {

// Periodic trapezoid rule on [0, 2pi], stored as the half rule on [0, pi]
// (the integrands below depend on theta only through cos theta).
template <typename Scalar>
class AngularRule {
 public:
  explicit AngularRule(int m = 256) : m_(m) {
    if (m < 64 || m % 2) throw std::invalid_argument("angular rule: m must be even and >= 64, got " + std::to_string(m));
    const int half = m / 2;
    cos_.resize(half + 1);
    wt_.resize(half + 1);
    const Scalar two_pi = 2 * std::numbers::pi_v<Scalar>;
    // cos(pi - t) = -cos(t) is imposed exactly so that sign flips of either
    // argument map the node set onto itself.
    for (int k = 0; k <= half; ++k) {
      int j = std::min(k, half - k);
      Scalar c = std::cos(two_pi * Scalar(j) / Scalar(m));
      cos_[k] = (k <= half - k) ? c : -c;
      wt_[k] = (k == 0 || k == half) ? Scalar(1) / m : Scalar(2) / m;
    }
    if (half % 2 == 0) cos_[half / 2] = 0;
  }

  int m() const { return m_; }
  int half_size() const { return static_cast<int>(cos_.size()); }
  Scalar cos_at(int k) const { return cos_[k]; }
  Scalar weight(int k) const { return wt_[k]; }
  Scalar theta(int k) const { return 2 * std::numbers::pi_v<Scalar> * Scalar(k) / Scalar(m_); }

 private:
  int m_;
  std::vector<Scalar> cos_, wt_;
};

namespace detail {

// x^e for x >= 0 with cheap paths for the exponents that show up in practice.
template <typename Scalar>
struct Power {
  explicit Power(Scalar e) : e(e) {
    if (e == 0) kind = 0;
    else if (e == Scalar(0.25)) kind = 1;
    else if (e == Scalar(0.5)) kind = 2;
    else if (e == Scalar(0.75)) kind = 3;
    else if (e == 1) kind = 4;
    else if (e == Scalar(1.5)) kind = 5;
    else if (e == 2) kind = 6;
    else kind = 7;
  }
  Scalar operator()(Scalar x) const {
    using std::sqrt;
    switch (kind) {
      case 0: return 1;
      case 1: return sqrt(sqrt(x));
      case 2: return sqrt(x);
      case 3: { Scalar s = sqrt(x); return s * sqrt(s); }
      case 4: return x;
      case 5: return x * sqrt(x);
      case 6: return x * x;
      default: return x > 0 ? std::pow(x, e) : Scalar(0);
    }
  }
  Scalar e;
  int kind;
};

}  // namespace detail

template <typename Scalar>
struct AngularHessian {
  Eigen::Matrix<Scalar, 2, 2> H = Eigen::Matrix<Scalar, 2, 2>::Zero();
  bool degenerate = false;
};

// All angular quantities at one node, for a >= 0, b >= 0.
template <typename Scalar>
struct AngularTerms {
  Scalar N = 0, F1 = 0, F2 = 0, H11 = 0, H12 = 0, H22 = 0;
  bool degenerate = false;
};

// Evaluates N_p(a,b), F_p(a,b), F_p(b,a) and, when `hessian` is set, the
// Jacobian of (F_p(a,b), F_p(b,a)). Signs are reduced to a,b >= 0 through the
// symmetries of the rule; Q^{-1} is evaluated as 1/max(Q, eps^2), and a
// negative eps selects the default floor eps^2 = 1e-12 (a^2+b^2).
template <typename Scalar>
AngularTerms<Scalar> angular_terms(Scalar a, Scalar b, Scalar p, const AngularRule<Scalar>& rule,
                                   bool hessian = false, Scalar eps = Scalar(-1)) {
  using std::abs;
  const Scalar sa = a < 0 ? Scalar(-1) : Scalar(1);
  const Scalar sb = b < 0 ? Scalar(-1) : Scalar(1);
  a = abs(a);
  b = abs(b);
  AngularTerms<Scalar> t;
  const detail::Power<Scalar> pw((p - 1) / 2);
  if (a == 0 && b == 0) return t;
  if (b == 0 || a == 0) {
    // Closed forms: the rule integrates cos exactly to 0 and cos^2 to 1/2.
    const Scalar x = a == 0 ? b : a;
    const Scalar q = pw(x * x);
    t.N = x * x * q;
    if (a != 0) t.F1 = x * q; else t.F2 = x * q;
    if (hessian) {
      const Scalar own = p * q, other = (p + 1) / 2 * q;
      t.H11 = a != 0 ? own : other;
      t.H22 = a != 0 ? other : own;
    }
    t.F1 *= sa;
    t.F2 *= sb;
    return t;
  }
  const Scalar s2 = a * a + b * b, ab2 = 2 * (a * b);
  Scalar floor = eps < 0 ? Scalar(1e-12) * s2 : eps * eps;
  const int K = rule.half_size();
  for (int k = 0; k < K; ++k) {
    const Scalar c = rule.cos_at(k), w = rule.weight(k);
    Scalar Q = s2 + ab2 * c;
    if (Q < 0) Q = 0;
    const Scalar q = pw(Q);
    const Scalar s = a + b * c, r = b + a * c;
    t.N += w * Q * q;
    t.F1 += w * s * q;
    t.F2 += w * r * q;
    if (hessian) {
      Scalar inv;
      if (Q < floor || Q == 0) { t.degenerate = true; inv = floor > 0 ? 1 / floor : Scalar(0); }
      else inv = 1 / Q;
      const Scalar pm = (p - 1) * inv;
      t.H11 += w * (1 + pm * s * s) * q;
      t.H12 += w * (c + pm * s * r) * q;
      t.H22 += w * (1 + pm * r * r) * q;
    }
  }
  t.F1 *= sa;
  t.F2 *= sb;
  t.H12 *= sa * sb;
  return t;
}

template <typename Scalar>
Scalar angular_density(Scalar a, Scalar b, Scalar p, const AngularRule<Scalar>& rule) {
  if (!(p > 0 && p <= 5)) throw std::invalid_argument("angular_density: p must lie in (0,5]");
  return angular_terms(a, b, p, rule).N;
}

template <typename Scalar>
Scalar angular_force(Scalar a, Scalar b, Scalar p, const AngularRule<Scalar>& rule) {
  return angular_terms(a, b, p, rule).F1;
}

template <typename Scalar>
AngularHessian<Scalar> angular_hessian(Scalar a, Scalar b, Scalar p, const AngularRule<Scalar>& rule,
                                       Scalar eps = Scalar(-1)) {
  auto t = angular_terms(a, b, p, rule, true, eps);
  AngularHessian<Scalar> h;
  h.H << t.H11, t.H12, t.H12, t.H22;
  h.degenerate = t.degenerate;
  return h;
}

template <typename Scalar>
Scalar cp_constant(Scalar p, const AngularRule<Scalar>& rule) {
  return angular_terms(Scalar(1), Scalar(1), p, rule).N;
}

}  // namespace splab
