#include "splab/solvers.hpp"

#include <Eigen/Sparse>
#include <unsupported/Eigen/IterativeSolvers>

#include <cmath>
#include <functional>

namespace splab {
class SymmetricOperator;
}

namespace Eigen::internal {
template <>
struct traits<splab::SymmetricOperator> : public traits<Eigen::SparseMatrix<double>> {};
}  // namespace Eigen::internal

namespace splab {

// Matrix-free symmetric operator on the interior unknowns.
class SymmetricOperator : public Eigen::EigenBase<SymmetricOperator> {
 public:
  using Scalar = double;
  using RealScalar = double;
  using StorageIndex = int;
  enum { ColsAtCompileTime = Eigen::Dynamic, MaxColsAtCompileTime = Eigen::Dynamic, IsRowMajor = false };

  using Apply = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;
  SymmetricOperator(Eigen::Index size, Apply f) : size_(size), f_(std::move(f)) {}

  Eigen::Index rows() const { return size_; }
  Eigen::Index cols() const { return size_; }

  template <typename Rhs>
  Eigen::Product<SymmetricOperator, Rhs, Eigen::AliasFreeProduct> operator*(const Eigen::MatrixBase<Rhs>& x) const {
    return Eigen::Product<SymmetricOperator, Rhs, Eigen::AliasFreeProduct>(*this, x.derived());
  }

  void apply(const Eigen::VectorXd& x, Eigen::VectorXd& y) const { f_(x, y); }

 private:
  Eigen::Index size_;
  Apply f_;
};

// Block (K + lambda M) preconditioner, one factorization per component.
class SobolevPreconditioner {
 public:
  SobolevPreconditioner() = default;
  void set(const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>* f, int blocks) {
    factor_ = f;
    blocks_ = blocks;
  }
  template <typename M>
  SobolevPreconditioner& analyzePattern(const M&) { return *this; }
  template <typename M>
  SobolevPreconditioner& factorize(const M&) { return *this; }
  template <typename M>
  SobolevPreconditioner& compute(const M&) { return *this; }
  Eigen::ComputationInfo info() { return Eigen::Success; }

  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x(b.size());
    const Eigen::Index m = b.size() / blocks_;
    for (int k = 0; k < blocks_; ++k) x.segment(k * m, m) = factor_->solve(b.segment(k * m, m));
    return x;
  }

 private:
  const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>* factor_ = nullptr;
  int blocks_ = 1;
};

}  // namespace splab

namespace Eigen::internal {
template <typename Rhs>
struct generic_product_impl<splab::SymmetricOperator, Rhs, SparseShape, DenseShape, GemvProduct>
    : generic_product_impl_base<splab::SymmetricOperator, Rhs,
                                generic_product_impl<splab::SymmetricOperator, Rhs>> {
  using Scalar = typename Product<splab::SymmetricOperator, Rhs>::Scalar;
  template <typename Dest>
  static void scaleAndAddTo(Dest& dst, const splab::SymmetricOperator& lhs, const Rhs& rhs, const Scalar& alpha) {
    Eigen::VectorXd x = rhs, y;
    lhs.apply(x, y);
    dst += alpha * y;
  }
};
}  // namespace Eigen::internal

namespace splab {

namespace {

double mass_norm(const Pair& g) {
  const auto& M = g.grid().mass();
  return std::sqrt(M.dot(g.first.values.cwiseAbs2()) + M.dot(g.second.values.cwiseAbs2()));
}

void fix_ends(Pair& u) {
  for (Field* f : {&u.first, &u.second}) {
    f->values[f->size() - 1] = 0;
    f->values[0] = Grid::extrapolate_origin(f->values);
  }
}

}  // namespace

std::string to_string(Classification c) {
  switch (c) {
    case Classification::trivial: return "trivial";
    case Classification::semitrivial_first: return "semitrivial_first";
    case Classification::semitrivial_second: return "semitrivial_second";
    case Classification::vectorial_positive: return "vectorial_positive";
    case Classification::vectorial_signchanging: return "vectorial_signchanging";
    case Classification::diverged: return "diverged";
  }
  return "diverged";
}

void SolverConfig::validate() const {
  if (!(tol > 0)) throw ConfigError("solver: tol must be positive");
  if (max_iter < 1) throw ConfigError("solver: max_iter must be >= 1");
  if (!(damping > 0 && damping <= 1)) throw ConfigError("solver: damping must lie in (0,1]");
  if (continuation_steps < 1) throw ConfigError("solver: continuation_steps must be >= 1");
  if (polish_steps < 0) throw ConfigError("solver: polish_steps must be >= 0");
  if (!(seed_width > 0)) throw ConfigError("solver: seed width must be positive");
}

void finalize(SolveReport& rep, const Params& prm, const SolverConfig& cfg, bool converged) {
  const Pair& u = rep.solution;
  rep.ledger = ledger(u, prm);
  rep.energy = energy_from(rep.ledger, prm.p);
  rep.residual_sup = sup_norm(gradient(u, prm));
  rep.nehari_residual = nehari_J(rep.ledger);
  rep.pohozaev_residual = pohozaev_residual(rep.ledger, prm.p, 1.0, 1.0, 1.0, 1.0);

  const auto& u1 = u.first.values;
  const auto& u2 = u.second.values;
  const double amp1 = u1.cwiseAbs().maxCoeff(), amp2 = u2.cwiseAbs().maxCoeff();
  const double amp = std::max(amp1, amp2);
  rep.ratio_mean = rep.ratio_max_deviation = 0;
  if (!converged || !(rep.residual_sup <= cfg.tol) || !u.finite()) {
    rep.classification = Classification::diverged;
  } else if (amp <= 1e-6) {
    rep.classification = Classification::trivial;
  } else if (amp2 <= 1e-8 * amp1) {
    rep.classification = Classification::semitrivial_first;
  } else if (amp1 <= 1e-8 * amp2) {
    rep.classification = Classification::semitrivial_second;
  } else if (u1.minCoeff() >= -1e-10 * amp && u2.minCoeff() >= -1e-10 * amp) {
    rep.classification = Classification::vectorial_positive;
  } else {
    rep.classification = Classification::vectorial_signchanging;
  }

  const double m1 = u1.maxCoeff();
  if (m1 > 0) {
    double sum = 0;
    int cnt = 0;
    std::vector<double> ratios;
    for (int i = 0; i < u1.size(); ++i)
      if (u1[i] > 1e-6 * m1) {
        ratios.push_back(u2[i] / u1[i]);
        sum += ratios.back();
        ++cnt;
      }
    if (cnt) {
      rep.ratio_mean = sum / cnt;
      for (double q : ratios) rep.ratio_max_deviation = std::max(rep.ratio_max_deviation, std::abs(q - rep.ratio_mean));
    }
  }
}

SolveReport newton_solve(const Pair& init, const Params& prm, const SolverConfig& cfg, Active active) {
  prm.validate();
  const auto gp = init.grid_ptr();
  const Grid& g = *gp;
  const int n = g.n(), m = n - 2;
  const int blocks = active == Active::both ? 2 : 1;

  Eigen::SparseMatrix<double> P = g.stiffness();
  for (int k = 0; k < m; ++k) P.coeffRef(k, k) += prm.lambda * g.mass()[k + 1];
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> factor(P);

  SolveReport rep;
  Pair u = init;
  if (active == Active::first) u.second.values.setZero();
  if (active == Active::second) u.first.values.setZero();
  fix_ends(u);

  auto masked_gradient = [&](const Pair& x) {
    Pair r = gradient(x, prm);
    if (active == Active::first) r.second.values.setZero();
    if (active == Active::second) r.first.values.setZero();
    return r;
  };

  Pair res = masked_gradient(u);
  double sup = sup_norm(res), norm = mass_norm(res);
  rep.trace.push_back(sup);
  bool ok = false;
  int it = 0, polished = 0;
  for (; it <= cfg.max_iter + cfg.polish_steps; ++it) {
    if (sup <= cfg.tol) {
      ok = true;
      if (polished++ >= cfg.polish_steps) break;
    }
    if ((!ok && it >= cfg.max_iter) || !std::isfinite(sup)) break;

    Linearization<double> lin(u, prm);
    rep.degenerate_hessian = rep.degenerate_hessian || lin.degenerate();
    const auto& M = g.mass();

    auto expand = [&](const Eigen::VectorXd& x, Eigen::VectorXd& x1, Eigen::VectorXd& x2) {
      x1 = Eigen::VectorXd::Zero(n);
      x2 = Eigen::VectorXd::Zero(n);
      if (active == Active::both) {
        x1.segment(1, m) = x.head(m);
        x2.segment(1, m) = x.tail(m);
      } else if (active == Active::first) {
        x1.segment(1, m) = x;
      } else {
        x2.segment(1, m) = x;
      }
    };
    auto compress = [&](const Eigen::VectorXd& y1, const Eigen::VectorXd& y2) {
      Eigen::VectorXd y(blocks * m);
      const Eigen::VectorXd Mi = M.segment(1, m);
      if (active == Active::both) {
        y.head(m) = Mi.cwiseProduct(y1.segment(1, m));
        y.tail(m) = Mi.cwiseProduct(y2.segment(1, m));
      } else if (active == Active::first) {
        y = Mi.cwiseProduct(y1.segment(1, m));
      } else {
        y = Mi.cwiseProduct(y2.segment(1, m));
      }
      return y;
    };

    SymmetricOperator op(blocks * m, [&](const Eigen::VectorXd& x, Eigen::VectorXd& y) {
      Eigen::VectorXd x1, x2, y1, y2;
      expand(x, x1, x2);
      lin.apply(x1, x2, y1, y2);
      y = compress(y1, y2);
    });
    Eigen::VectorXd rhs = -compress(res.first.values, res.second.values);

    Eigen::MINRES<SymmetricOperator, Eigen::Lower | Eigen::Upper, SobolevPreconditioner> minres;
    minres.preconditioner().set(&factor, blocks);
    minres.compute(op);
    minres.setTolerance(ok ? 1e-12 : cfg.inner_tol);
    minres.setMaxIterations(4 * m);
    Eigen::VectorXd dx = minres.solve(rhs);
    if (!dx.allFinite()) break;

    Eigen::VectorXd d1, d2;
    expand(dx, d1, d2);
    double alpha = cfg.damping;
    bool accepted = false;
    while (alpha >= std::ldexp(1.0, -20)) {
      Pair trial = u;
      trial.first.values += alpha * d1;
      trial.second.values += alpha * d2;
      fix_ends(trial);
      Pair r = masked_gradient(trial);
      double tn = mass_norm(r);
      const double ts = sup_norm(r);
      if (std::isfinite(tn) && tn < norm && (!ok || ts <= cfg.tol)) {
        u = std::move(trial);
        res = std::move(r);
        norm = tn;
        sup = ts;
        accepted = true;
        break;
      }
      alpha /= 2;
    }
    if (!accepted) break;
    rep.trace.push_back(sup);
  }
  rep.solution = u;
  rep.iterations = it;
  finalize(rep, prm, cfg, ok);
  if (!ok) rep.status = "newton did not reach tolerance";
  return rep;
}

}  // namespace splab
