#include "polaron/lanczos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "polaron/rng.hpp"

namespace polaron {

namespace {

Eigen::VectorXcd random_unit(int n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXcd v(n);
  for (int i = 0; i < n; ++i) v[i] = Complex(rng.normal(), rng.normal());
  v /= v.norm();
  return v;
}

// Two-pass classical Gram-Schmidt against the first `cols` columns of q.
void reorthogonalize(const Eigen::MatrixXcd& q, int cols,
                     Eigen::VectorXcd& w) {
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXcd c = q.leftCols(cols).adjoint() * w;
    w.noalias() -= q.leftCols(cols) * c;
  }
}

struct CycleOutcome {
  double theta = 0.0;
  double gap = 0.0;
  double residual = 0.0;
  Eigen::VectorXcd ritz;
  int matvecs = 0;
  bool breakdown = false;
};

CycleOutcome run_cycle(const MomentumBlock& h, const Eigen::VectorXcd& start,
                       int m, double breakdown_tol) {
  const int n = h.dim();
  Eigen::MatrixXcd q(n, m);
  std::vector<double> alpha, beta;
  q.col(0) = start / start.norm();

  CycleOutcome out;
  Eigen::VectorXcd w(n);
  h.apply(q.col(0), w);
  ++out.matvecs;
  alpha.push_back(q.col(0).dot(w).real());
  w -= alpha[0] * q.col(0);
  reorthogonalize(q, 1, w);

  int built = 1;
  double beta_last = w.norm();
  for (int j = 1; j < m; ++j) {
    if (beta_last < breakdown_tol) {
      out.breakdown = true;
      break;
    }
    beta.push_back(beta_last);
    q.col(j) = w / beta_last;
    h.apply(q.col(j), w);
    ++out.matvecs;
    w -= beta_last * q.col(j - 1);
    alpha.push_back(q.col(j).dot(w).real());
    w -= alpha[j] * q.col(j);
    reorthogonalize(q, j + 1, w);
    beta_last = w.norm();
    built = j + 1;
  }

  Eigen::MatrixXd tri = Eigen::MatrixXd::Zero(built, built);
  for (int i = 0; i < built; ++i) tri(i, i) = alpha[i];
  for (int i = 0; i + 1 < built; ++i) tri(i, i + 1) = tri(i + 1, i) = beta[i];
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(tri);
  const Eigen::VectorXd& evals = es.eigenvalues();
  const Eigen::VectorXd s = es.eigenvectors().col(0);

  out.theta = evals[0];
  out.gap = built > 1 ? evals[1] - evals[0]
                      : std::numeric_limits<double>::infinity();
  out.residual = out.breakdown ? 0.0 : beta_last * std::abs(s[built - 1]);
  out.ritz = q.leftCols(built) * s;
  out.ritz /= out.ritz.norm();
  return out;
}

}  // namespace

EigsResult lowest_eigenpair(const MomentumBlock& h, const EigsOptions& opt) {
  const int n = h.dim();
  if (n == 0) throw std::invalid_argument("lowest_eigenpair: empty basis");

  Eigen::VectorXcd v = random_unit(n, opt.seed);
  if (n == 1) {
    Eigen::VectorXcd one = Eigen::VectorXcd::Ones(1), hv(1);
    h.apply(one, hv);
    return EigsResult{hv[0].real(), one, 1, 0.0};
  }

  // Scale estimate for the breakdown threshold.
  Eigen::VectorXcd hv(n);
  h.apply(v, hv);
  const double scale = std::max(1.0, hv.norm());
  const double breakdown_tol = 1e-13 * scale;

  const int m = std::min(n, std::max(2, opt.cycle));
  int matvecs = 1;
  for (int cycle = 0; cycle < opt.max_cycles; ++cycle) {
    CycleOutcome out = run_cycle(h, v, m, breakdown_tol);
    matvecs += out.matvecs;
    const double err_bound =
        std::min(out.residual,
                 out.residual * out.residual / std::max(out.gap, 1e-300));
    if (err_bound <= opt.tol || (out.breakdown && out.residual <= opt.tol))
      return EigsResult{out.theta, out.ritz, matvecs, out.residual};
    v = out.ritz;
    if (out.breakdown) {
      // Invariant subspace that has not converged: mix in a fresh direction.
      Eigen::VectorXcd fresh = random_unit(n, mix_seed(opt.seed, cycle + 1));
      v = (v + 0.1 * fresh).normalized();
    }
  }

  CycleOutcome out = run_cycle(h, v, m, breakdown_tol);
  throw ConvergenceError(
      "lowest_eigenpair: no convergence after " +
          std::to_string(opt.max_cycles) + " cycles (residual " +
          std::to_string(out.residual) + ")",
      out.residual);
}

Tridiagonal lanczos_tridiagonal(const MomentumBlock& h,
                                const Eigen::VectorXcd& start, int max_depth) {
  const int n = h.dim();
  const int depth = std::min(n, std::max(1, max_depth));
  Eigen::MatrixXcd q(n, depth);
  Tridiagonal tri;
  tri.beta.push_back(0.0);
  q.col(0) = start / start.norm();

  Eigen::VectorXcd w(n);
  h.apply(q.col(0), w);
  tri.alpha.push_back(q.col(0).dot(w).real());
  w -= tri.alpha[0] * q.col(0);
  reorthogonalize(q, 1, w);
  tri.depth = 1;

  const double scale = std::max(1.0, std::abs(tri.alpha[0]) + w.norm());
  for (int j = 1; j < depth; ++j) {
    const double b = w.norm();
    if (b < 1e-13 * scale) {
      tri.breakdown = true;
      return tri;
    }
    tri.beta.push_back(b);
    q.col(j) = w / b;
    h.apply(q.col(j), w);
    w -= b * q.col(j - 1);
    tri.alpha.push_back(q.col(j).dot(w).real());
    w -= tri.alpha[j] * q.col(j);
    reorthogonalize(q, j + 1, w);
    tri.depth = j + 1;
  }
  return tri;
}

}  // namespace polaron
