#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace splab {

struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Uniform radial grid on [0, r_max].
//
// Two weight sets live here. `weights` is composite Simpson for
// volume_integral. `mass` is the diagonal inner product of the discrete
// model: 4*pi*h*r_i^2 on the interior nodes, zero at r=0 and at the
// Dirichlet node. With that mass the operator below is self-adjoint, so
// the discrete energy has the discrete residual as its exact gradient.
//
// The Laplacian acts on w = r*f with the five-point fourth-order stencil,
// odd reflection at r=0 and zero ghosts past r_max. The Poisson map is the
// exact inverse of the same stencil with a flat (Neumann) far field for
// r*phi, which is the phi ~ Q/r tail.
template <typename Scalar>
class RadialGrid {
 public:
  using Vector = Vec<Scalar>;
  using Sparse = Eigen::SparseMatrix<Scalar>;

  RadialGrid(int n, Scalar r_max) {
    if (n < 16) throw ConfigError("grid: n must be >= 16, got " + std::to_string(n));
    if (!(r_max > 0)) throw ConfigError("grid: r_max must be positive");
    if (n % 2 == 0) ++n;
    n_ = n;
    r_max_ = r_max;
    h_ = r_max / Scalar(n - 1);
    nodes_.resize(n);
    for (int i = 0; i < n; ++i) nodes_[i] = h_ * Scalar(i);
    nodes_[n - 1] = r_max;

    const Scalar four_pi = Scalar(4) * std::numbers::pi_v<Scalar>;
    weights_.resize(n);
    for (int i = 0; i < n; ++i) {
      Scalar s = (i == 0 || i == n - 1) ? 1 : (i % 2 ? 4 : 2);
      weights_[i] = s * h_ / 3 * four_pi * nodes_[i] * nodes_[i];
    }
    mass_ = Vector::Zero(n);
    for (int i = 1; i < n - 1; ++i) mass_[i] = four_pi * h_ * nodes_[i] * nodes_[i];

    build_poisson();
  }

  int n() const { return n_; }
  Scalar r_max() const { return r_max_; }
  Scalar h() const { return h_; }
  const Vector& nodes() const { return nodes_; }
  const Vector& weights() const { return weights_; }
  const Vector& mass() const { return mass_; }

  bool same_as(const RadialGrid& o) const { return n_ == o.n_ && r_max_ == o.r_max_; }

  // Delta f at every node; ghosts beyond r_max are zero.
  Vector laplacian(const Vector& f) const {
    const int n = n_;
    Vector w = nodes_.cwiseProduct(f);
    auto W = [&](int j) -> Scalar {
      if (j < 0) return -w[-j];
      if (j >= n) return Scalar(0);
      return w[j];
    };
    const Scalar s = Scalar(1) / (Scalar(12) * h_ * h_);
    Vector out(n);
    out[0] = 3 * s * (-2 * f[2] + 32 * f[1] - 30 * f[0]);
    for (int i = 1; i < n; ++i)
      out[i] = s * (-W(i - 2) + 16 * W(i - 1) - 30 * W(i) + 16 * W(i + 1) - W(i + 2)) / nodes_[i];
    return out;
  }

  // Stiffness K on the interior unknowns 1..n-2 (Dirichlet node held at
  // zero): (K u)_i = mass_i * (-Delta u)_i. Symmetric positive definite.
  Sparse stiffness() const {
    const int m = n_ - 2;
    const Scalar four_pi = Scalar(4) * std::numbers::pi_v<Scalar>;
    const Scalar s = four_pi * h_ / (Scalar(12) * h_ * h_);
    std::vector<Eigen::Triplet<Scalar>> t;
    t.reserve(5 * m);
    for (int k = 0; k < m; ++k) {
      const int i = k + 1;
      const Scalar ri = nodes_[i];
      const Scalar diag = (i == 1) ? Scalar(29) : Scalar(30);
      t.emplace_back(k, k, s * diag * ri * ri);
      if (k + 1 < m) t.emplace_back(k, k + 1, -16 * s * ri * nodes_[i + 1]);
      if (k + 2 < m) t.emplace_back(k, k + 2, s * ri * nodes_[i + 2]);
      if (k >= 1) t.emplace_back(k, k - 1, -16 * s * ri * nodes_[i - 1]);
      if (k >= 2) t.emplace_back(k, k - 2, s * ri * nodes_[i - 2]);
    }
    Sparse K(m, m);
    K.setFromTriplets(t.begin(), t.end());
    return K;
  }

  // phi with -Delta phi = rho, rho given at every node.
  Vector poisson(const Vector& rho) const {
    const int n = n_;
    Vector rhs(n - 1);
    for (int k = 0; k < n - 1; ++k) rhs[k] = nodes_[k + 1] * rho[k + 1];
    rhs[n - 2] *= Scalar(0.5);
    Vector W = poisson_factor_->solve(rhs);
    Vector phi(n);
    for (int i = 1; i < n; ++i) phi[i] = W[i - 1] / nodes_[i];
    phi[0] = extrapolate_origin(phi);
    return phi;
  }

  // Value at r=0 of an even profile from nodes 1..3 (exact for 1, r^2, r^4).
  static Scalar extrapolate_origin(const Vector& f) {
    return Scalar(1.5) * f[1] - Scalar(0.6) * f[2] + Scalar(0.1) * f[3];
  }

 private:
  void build_poisson() {
    // Unknowns W_1..W_{n-1}; odd reflection at 0, even reflection at r_max.
    // The last row is halved to make the matrix symmetric.
    const int m = n_ - 1;
    const Scalar s = Scalar(1) / (Scalar(12) * h_ * h_);
    std::vector<Eigen::Triplet<Scalar>> t;
    t.reserve(5 * m);
    for (int k = 0; k < m; ++k) {
      Scalar row[5] = {-1, 16, -30, 16, -1};  // offsets -2..2
      Scalar c[5] = {0, 0, 0, 0, 0};
      for (int o = -2; o <= 2; ++o) {
        int j = k + 1 + o;  // node index
        Scalar coef = row[o + 2];
        if (j == 0) continue;
        if (j < 0) { j = -j; coef = -coef; }
        if (j > n_ - 1) j = 2 * (n_ - 1) - j;
        c[j - 1 - k + 2] += coef;
      }
      const Scalar scale = (k == m - 1) ? Scalar(0.5) : Scalar(1);
      for (int o = 0; o < 5; ++o) {
        int col = k + o - 2;
        if (col < 0 || col >= m || c[o] == 0) continue;
        t.emplace_back(k, col, -s * scale * c[o]);
      }
    }
    Sparse A(m, m);
    A.setFromTriplets(t.begin(), t.end());
    auto f = std::make_shared<Eigen::SimplicialLDLT<Sparse>>();
    f->compute(A);
    if (f->info() != Eigen::Success) throw std::runtime_error("grid: Poisson factorization failed");
    poisson_factor_ = f;
  }

  int n_ = 0;
  Scalar r_max_ = 0, h_ = 0;
  Vector nodes_, weights_, mass_;
  std::shared_ptr<const Eigen::SimplicialLDLT<Sparse>> poisson_factor_;
};

template <typename Scalar>
using GridPtr = std::shared_ptr<const RadialGrid<Scalar>>;

template <typename Scalar = double>
GridPtr<Scalar> make_grid(int n, Scalar r_max) {
  return std::make_shared<const RadialGrid<Scalar>>(n, r_max);
}

template <typename Scalar>
struct RadialField {
  GridPtr<Scalar> grid;
  Vec<Scalar> values;

  RadialField() = default;
  RadialField(GridPtr<Scalar> g, Vec<Scalar> v) : grid(std::move(g)), values(std::move(v)) {
    if (values.size() != grid->n()) throw std::invalid_argument("field: size does not match grid");
  }
  static RadialField zero(GridPtr<Scalar> g) { return RadialField(g, Vec<Scalar>::Zero(g->n())); }

  template <typename F>
  static RadialField from(GridPtr<Scalar> g, F&& f) {
    Vec<Scalar> v(g->n());
    for (int i = 0; i < g->n(); ++i) v[i] = f(g->nodes()[i]);
    return RadialField(g, std::move(v));
  }

  int size() const { return static_cast<int>(values.size()); }
  const Vec<Scalar>& r() const { return grid->nodes(); }
  bool finite() const { return values.allFinite(); }
};

template <typename Scalar>
struct FieldPair {
  RadialField<Scalar> first, second;

  FieldPair() = default;
  FieldPair(RadialField<Scalar> a, RadialField<Scalar> b) : first(std::move(a)), second(std::move(b)) {
    if (!first.grid->same_as(*second.grid)) throw std::invalid_argument("pair: components on different grids");
  }
  static FieldPair zero(GridPtr<Scalar> g) {
    return FieldPair(RadialField<Scalar>::zero(g), RadialField<Scalar>::zero(g));
  }
  const RadialGrid<Scalar>& grid() const { return *first.grid; }
  GridPtr<Scalar> grid_ptr() const { return first.grid; }
  bool finite() const { return first.finite() && second.finite(); }
};

using Grid = RadialGrid<double>;
using Field = RadialField<double>;
using Pair = FieldPair<double>;

inline void check_same_grid(const auto& f, const auto& g) {
  if (!f.grid->same_as(*g.grid)) throw std::invalid_argument("fields live on different grids");
}

template <typename Scalar>
Scalar volume_integral(const RadialField<Scalar>& f) {
  return f.grid->weights().dot(f.values);
}

template <typename Scalar>
RadialField<Scalar> laplacian(const RadialField<Scalar>& f) {
  return RadialField<Scalar>(f.grid, f.grid->laplacian(f.values));
}

template <typename Scalar>
RadialField<Scalar> poisson_density(const GridPtr<Scalar>& g, const Vec<Scalar>& rho) {
  return RadialField<Scalar>(g, g->poisson(rho));
}

template <typename Scalar>
RadialField<Scalar> poisson_cross(const RadialField<Scalar>& u, const RadialField<Scalar>& v) {
  check_same_grid(u, v);
  return poisson_density<Scalar>(u.grid, u.values.cwiseProduct(v.values));
}

template <typename Scalar>
RadialField<Scalar> solve_poisson(const RadialField<Scalar>& u) {
  return poisson_cross(u, u);
}

// Sixth-order Lagrange interpolation with even continuation through r=0
// and zero continuation past r_max.
template <typename Scalar>
Scalar sample(const RadialField<Scalar>& f, Scalar r) {
  const auto& g = *f.grid;
  r = std::abs(r);
  if (r >= g.r_max()) return Scalar(0);
  const int n = g.n();
  auto at = [&](int j) -> Scalar {
    if (j < 0) j = -j;
    return j < n ? f.values[j] : Scalar(0);
  };
  const Scalar x = r / g.h();
  const int i0 = static_cast<int>(std::floor(x)) - 2;
  Scalar s = 0;
  for (int j = i0; j < i0 + 6; ++j) {
    Scalar l = 1;
    for (int k = i0; k < i0 + 6; ++k)
      if (k != j) l *= (x - Scalar(k)) / Scalar(j - k);
    s += l * at(j);
  }
  return s;
}

// f(r) -> amp * f(scale * r) on the grid of f.
template <typename Scalar>
RadialField<Scalar> rescaled(const RadialField<Scalar>& f, Scalar amp, Scalar scale) {
  Vec<Scalar> v(f.size());
  for (int i = 0; i < f.size(); ++i) v[i] = amp * sample(f, scale * f.r()[i]);
  v[f.size() - 1] = 0;
  return RadialField<Scalar>(f.grid, std::move(v));
}

template <typename Scalar>
RadialField<Scalar> resampled(const RadialField<Scalar>& f, const GridPtr<Scalar>& to) {
  return RadialField<Scalar>::from(to, [&](Scalar r) { return sample(f, r); });
}

inline std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

// Short form for names and labels.
inline std::string format_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

template <typename Scalar>
void write_csv(const RadialField<Scalar>& f, std::ostream& os) {
  os << "r,value\n";
  for (int i = 0; i < f.size(); ++i)
    os << format_real(double(f.r()[i])) << ',' << format_real(double(f.values[i])) << '\n';
}

// Reads an (r,value) table written by write_csv; the grid must match.
template <typename Scalar>
RadialField<Scalar> read_csv(std::istream& is, const GridPtr<Scalar>& g) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("r,value", 0) != 0)
    throw std::runtime_error("csv: missing r,value header");
  Vec<Scalar> v(g->n());
  int i = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (i >= g->n()) throw std::runtime_error("csv: more rows than grid nodes");
    auto comma = line.find(',');
    if (comma == std::string::npos) throw std::runtime_error("csv: malformed row " + std::to_string(i + 2));
    double r = std::stod(line.substr(0, comma));
    if (std::abs(r - double(g->nodes()[i])) > 1e-12 * (1 + std::abs(r)))
      throw std::runtime_error("csv: node mismatch at row " + std::to_string(i + 2));
    v[i++] = Scalar(std::stod(line.substr(comma + 1)));
  }
  if (i != g->n()) throw std::runtime_error("csv: row count does not match grid");
  return RadialField<Scalar>(g, std::move(v));
}

}  // namespace splab
