#pragma once

// Reference values computed without the library.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numbers>

namespace oracle {

// Potential of the density exp(-r^2/s^2): pi^{3/2} s^3 erf(r/s) / (4 pi r).
inline double gaussian_potential(double r, double s) {
  const double q = std::pow(std::numbers::pi, 1.5) * s * s * s / (4 * std::numbers::pi);
  return r == 0 ? q * 2 / (std::sqrt(std::numbers::pi) * s) : q * std::erf(r / s) / r;
}

// (1/2pi) int_0^{2pi} (2 + 2 cos t)^{(p+1)/2} dt in closed form.
inline double cp_closed_form(double p) {
  return std::pow(2.0, p + 1) * std::tgamma((p + 2) / 2) / (std::sqrt(std::numbers::pi) * std::tgamma((p + 3) / 2));
}

// Outcome of integrating u'' + 2u'/r = lambda u - c u^q from u(0) = alpha.
// +1: u crosses zero (alpha too large). -1: u turns upward (alpha too small).
inline int shoot(double alpha, double lambda, double c, double q, double r_end) {
  const double h = 1e-3;
  double r = h;
  const double f0 = lambda * alpha - c * std::pow(alpha, q);
  double u = alpha + f0 * h * h / 6, v = f0 * h / 3;
  auto rhs = [&](double rr, double uu, double vv) {
    return std::array<double, 2>{vv, lambda * uu - c * std::pow(std::max(uu, 0.0), q) - 2 * vv / rr};
  };
  while (r < r_end) {
    auto k1 = rhs(r, u, v);
    auto k2 = rhs(r + h / 2, u + h / 2 * k1[0], v + h / 2 * k1[1]);
    auto k3 = rhs(r + h / 2, u + h / 2 * k2[0], v + h / 2 * k2[1]);
    auto k4 = rhs(r + h, u + h * k3[0], v + h * k3[1]);
    u += h / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    v += h / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    r += h;
    if (u < 0) return 1;
    if (v > 0) return -1;
  }
  return 0;
}

// Central value of the positive radial solution of -Delta u + lambda u = c u^q by bisection.
inline double ground_peak(double lambda, double c, double q, double lo, double hi) {
  for (int it = 0; it < 60; ++it) {
    const double mid = (lo + hi) / 2;
    const int s = shoot(mid, lambda, c, q, 25 / std::sqrt(lambda));
    if (s > 0) hi = mid;
    else if (s < 0) lo = mid;
    else return mid;
  }
  return (lo + hi) / 2;
}

// Minimum of f on [a, b]: dense scan followed by golden-section refinement.
inline double scan_min(const std::function<double(double)>& f, double a, double b, int n = 100000) {
  double best = a, fb = f(a);
  for (int i = 1; i <= n; ++i) {
    const double t = a + (b - a) * i / n;
    const double ft = f(t);
    if (ft < fb) { fb = ft; best = t; }
  }
  double lo = std::max(a, best - (b - a) / n), hi = std::min(b, best + (b - a) / n);
  const double g = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 200; ++it) {
    const double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    if (f(x1) < f(x2)) hi = x2; else lo = x1;
  }
  return std::min(fb, f((lo + hi) / 2));
}

}  // namespace oracle
