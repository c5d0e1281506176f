#include "polaron/lbfgs.hpp"

#include <cmath>
#include <deque>
#include <stdexcept>

namespace polaron::gp {

LbfgsResult lbfgs_minimize(const Objective& fg, Eigen::VectorXd x0,
                           const LbfgsOptions& opt) {
  const Eigen::Index n = x0.size();
  double f;
  Eigen::VectorXd g(n);
  if (!fg(x0, f, g))
    throw std::invalid_argument("lbfgs_minimize: infeasible start point");

  struct Pair {
    Eigen::VectorXd s, y;
    double rho;
  };
  std::deque<Pair> memory;

  LbfgsResult res;
  res.x = std::move(x0);
  res.f = f;

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    res.iterations = iter;
    if (g.lpNorm<Eigen::Infinity>() < opt.grad_tol) {
      res.converged = true;
      return res;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = g;
    std::vector<double> alpha(memory.size());
    for (std::size_t i = memory.size(); i-- > 0;) {
      alpha[i] = memory[i].rho * memory[i].s.dot(q);
      q -= alpha[i] * memory[i].y;
    }
    if (!memory.empty()) {
      const auto& last = memory.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const double beta = memory[i].rho * memory[i].y.dot(q);
      q += (alpha[i] - beta) * memory[i].s;
    }
    Eigen::VectorXd dir = -q;
    double slope = g.dot(dir);
    if (!(slope < 0.0)) {  // numerically broken curvature memory
      memory.clear();
      dir = -g;
      slope = -g.squaredNorm();
    }

    double step = 1.0;
    double f_new = f;
    Eigen::VectorXd x_new, g_new(n);
    bool accepted = false;
    for (int bt = 0; bt < opt.max_backtracks; ++bt) {
      x_new = res.x + step * dir;
      if (fg(x_new, f_new, g_new) && f_new <= f + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      res.converged = g.lpNorm<Eigen::Infinity>() < 10.0 * opt.grad_tol;
      return res;
    }

    Eigen::VectorXd s = x_new - res.x;
    Eigen::VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      memory.push_back({std::move(s), std::move(y), 1.0 / sy});
      if (static_cast<int>(memory.size()) > opt.history) memory.pop_front();
    }

    const double drop = f - f_new;
    res.x = std::move(x_new);
    g = g_new;
    f = f_new;
    res.f = f;
    if (drop < opt.f_tol * std::max(1.0, std::abs(f))) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

}  // namespace polaron::gp
