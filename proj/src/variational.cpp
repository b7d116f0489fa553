#include "emloc/variational.hpp"

#include <cmath>
#include <sstream>

namespace emloc {

Eigen::VectorXd select(const Eigen::VectorXd &v, const std::vector<Index> &idx) {
  Eigen::VectorXd out(static_cast<Index>(idx.size()));
  for (std::size_t i = 0; i < idx.size(); ++i)
    out(static_cast<Index>(i)) = v(idx[i]);
  return out;
}

Eigen::MatrixXd select(const Eigen::MatrixXd &m, const std::vector<Index> &rows,
                       const std::vector<Index> &cols) {
  Eigen::MatrixXd out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j)
      out(static_cast<Index>(i), static_cast<Index>(j)) = m(rows[i], cols[j]);
  return out;
}

double discrete_sum(const DiscreteLagrangian &lag, const Eigen::MatrixXd &slices) {
  double s = 0.0;
  for (Index k = 0; k + 1 < slices.cols(); ++k)
    s += lag.value(slices.col(k), slices.col(k + 1));
  return s;
}

Eigen::MatrixXd interior_gradient(const DiscreteLagrangian &lag,
                                  const Eigen::MatrixXd &slices) {
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(slices.rows(), slices.cols());
  Eigen::VectorXd ga, gb;
  const Index steps = slices.cols() - 1;
  for (Index k = 0; k < steps; ++k) {
    lag.gradient(slices.col(k), slices.col(k + 1), ga, gb);
    if (k > 0)
      g.col(k) += ga;
    if (k + 1 < steps)
      g.col(k + 1) += gb;
  }
  return g;
}

BlockTridiagonal<double> interior_hessian(const DiscreteLagrangian &lag,
                                          const Eigen::MatrixXd &slices,
                                          const std::vector<Index> &free_sites) {
  const Index steps = slices.cols() - 1;
  const Index m = static_cast<Index>(free_sites.size());
  BlockTridiagonal<double> h(steps - 1, m);
  Eigen::MatrixXd haa, hab, hbb;
  for (Index k = 0; k < steps; ++k) {
    lag.hessian(slices.col(k), slices.col(k + 1), haa, hab, hbb);
    // Interior slice j = k - 1 in block numbering for slice k.
    if (k > 0)
      h.diag(k - 1) += select(haa, free_sites, free_sites);
    if (k + 1 < steps)
      h.diag(k) += select(hbb, free_sites, free_sites);
    if (k > 0 && k + 1 < steps)
      h.upper(k - 1) = select(hab, free_sites, free_sites);
  }
  return h;
}

namespace {

Eigen::VectorXd stack_free(const Eigen::MatrixXd &g, const std::vector<Index> &free_sites) {
  const Index m = static_cast<Index>(free_sites.size());
  const Index interior = g.cols() - 2;
  Eigen::VectorXd out(m * interior);
  for (Index k = 0; k < interior; ++k)
    out.segment(k * m, m) = select(Eigen::VectorXd(g.col(k + 1)), free_sites);
  return out;
}

void apply_step(Eigen::MatrixXd &slices, const Eigen::VectorXd &step, double alpha,
                const std::vector<Index> &free_sites) {
  const Index m = static_cast<Index>(free_sites.size());
  for (Index k = 0; k + 2 < slices.cols(); ++k)
    for (Index i = 0; i < m; ++i)
      slices(free_sites[static_cast<std::size_t>(i)], k + 1) += alpha * step(k * m + i);
}

double max_abs(const Eigen::VectorXd &v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

} // namespace

NewtonResult solve_stationary(const DiscreteLagrangian &lag, Eigen::MatrixXd slices,
                              const std::vector<Index> &free_sites,
                              const NewtonOptions &options) {
  if (slices.cols() < 3)
    throw Error("stationary solve needs at least three slices");
  NewtonResult result;
  Eigen::VectorXd g = stack_free(interior_gradient(lag, slices), free_sites);
  double res = max_abs(g);

  int it = 0;
  while (res >= options.tol && g.size() > 0) {
    if (it >= options.max_iters) {
      std::ostringstream msg;
      msg << "Newton iteration did not converge in " << options.max_iters
          << " iterations (residual " << res << ")";
      throw NonConvergenceError(msg.str(), res);
    }
    BlockTridiagonal<double> h = interior_hessian(lag, slices, free_sites);
    h.add_to_diagonal(options.regularization);
    const BlockTridiagonalLU<double> lu(h);
    if (!lu.ok())
      throw ConjugatePointError("second variation is singular", 0.0);
    const Eigen::VectorXd step = -lu.solve(g);
    if (!step.allFinite())
      throw ConjugatePointError("second variation is singular", 0.0);

    // Backtracking on the residual norm.
    const double norm0 = g.norm();
    double alpha = 1.0;
    Eigen::MatrixXd trial;
    Eigen::VectorXd g_trial;
    while (true) {
      trial = slices;
      apply_step(trial, step, alpha, free_sites);
      g_trial = stack_free(interior_gradient(lag, trial), free_sites);
      if (g_trial.allFinite() && g_trial.norm() <= (1.0 - 1e-4 * alpha) * norm0)
        break;
      alpha *= 0.5;
      if (alpha < 1e-10)
        break;
    }
    if (!g_trial.allFinite())
      throw NonConvergenceError("Newton step produced non-finite residual", res);
    slices = std::move(trial);
    g = std::move(g_trial);
    res = max_abs(g);
    ++it;
  }

  result.iterations = it;
  result.residual_norm = res;
  if (g.size() > 0) {
    const BlockTridiagonal<double> h = interior_hessian(lag, slices, free_sites);
    result.relative_min_eigenvalue = relative_min_eigenvalue(h);
    if (result.relative_min_eigenvalue < options.conjugate_threshold) {
      std::ostringstream msg;
      msg << "conjugate point: relative smallest eigenvalue of the second variation "
          << result.relative_min_eigenvalue << " below " << options.conjugate_threshold;
      throw ConjugatePointError(msg.str(), result.relative_min_eigenvalue);
    }
  }
  result.slices = std::move(slices);
  return result;
}

Eigen::MatrixXd mixed_endpoint_derivative(const DiscreteLagrangian &lag,
                                          const Eigen::MatrixXd &slices,
                                          const std::vector<Index> &free_sites) {
  const Index steps = slices.cols() - 1;
  Eigen::MatrixXd haa, hab, hbb;
  if (steps == 1) {
    lag.hessian(slices.col(0), slices.col(1), haa, hab, hbb);
    return select(hab, free_sites, free_sites);
  }
  const Index m = static_cast<Index>(free_sites.size());
  lag.hessian(slices.col(0), slices.col(1), haa, hab, hbb);
  const Eigen::MatrixXd first = select(hab, free_sites, free_sites); // φ_0 × φ_1
  lag.hessian(slices.col(steps - 1), slices.col(steps), haa, hab, hbb);
  const Eigen::MatrixXd last = select(hab, free_sites, free_sites); // φ_{K-1} × φ_K

  const BlockTridiagonal<double> h = interior_hessian(lag, slices, free_sites);
  const BlockTridiagonalLU<double> lu(h);
  if (!lu.ok())
    throw ConjugatePointError("second variation is singular", 0.0);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(h.rows(), m);
  rhs.bottomRows(m) = last;
  const Eigen::MatrixXd x = lu.solve(rhs);
  return -first * x.topRows(m);
}

} // namespace emloc
