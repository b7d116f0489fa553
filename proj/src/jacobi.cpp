#include "emloc/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace emloc {

double JacobiMetric::conformal_factor(const Eigen::VectorXd &phi) const {
  return 2.0 * (energy - potential_value(spec, phi));
}

Eigen::MatrixXd JacobiMetric::matrix(const Eigen::VectorXd &phi) const {
  return conformal_factor(phi) * Eigen::MatrixXd(spec.mass().asDiagonal());
}

JacobiMetric build_jacobi_metric(const ActionSpec &spec, double energy) {
  spec.validate();
  return {spec, energy};
}

double length(const JacobiMetric &metric, const Path &path) {
  require_same_mesh(metric.spec.mesh, path.mesh(), "length");
  static const double nodes[3] = {0.5 - 0.5 * std::sqrt(0.6), 0.5, 0.5 + 0.5 * std::sqrt(0.6)};
  static const double weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  const Eigen::VectorXd mass = metric.spec.mass();
  const auto &v = path.values();
  double total = 0.0;
  std::vector<Index> forbidden;
  for (Index k = 0; k + 1 < v.cols(); ++k) {
    const Eigen::VectorXd d = field_difference(v.col(k), v.col(k + 1), metric.spec.field_period);
    const double g = std::sqrt((mass.array() * d.array().square()).sum());
    double avg = 0.0;
    bool bad = metric.conformal_factor(v.col(k)) < 0.0 ||
               metric.conformal_factor(v.col(k + 1)) < 0.0;
    for (int q = 0; q < 3 && !bad; ++q) {
      const double f = metric.conformal_factor(v.col(k) + nodes[q] * d);
      if (!(f > 0.0)) {
        bad = true;
        break;
      }
      avg += weights[q] * std::sqrt(f);
    }
    if (bad) {
      forbidden.push_back(k);
      continue;
    }
    total += avg * g;
  }
  if (!forbidden.empty()) {
    const std::string msg = "path enters the classically forbidden region (E <= V) on " +
                            std::to_string(forbidden.size()) + " segment(s)";
    throw ClassicallyForbiddenError(msg, std::move(forbidden));
  }
  return total;
}

JacobiEnergyLagrangian::JacobiEnergyLagrangian(const JacobiMetric &metric, Index steps)
    : metric_(&metric), mass_(metric.spec.mass()), dtau_(1.0 / static_cast<double>(steps)) {}

double JacobiEnergyLagrangian::value(const Eigen::VectorXd &a, const Eigen::VectorXd &b) const {
  const Eigen::VectorXd d = field_difference(a, b, metric_->spec.field_period);
  const double q = (mass_.array() * d.array().square()).sum();
  return 0.5 * metric_->conformal_factor(a + 0.5 * d) * q / dtau_;
}

void JacobiEnergyLagrangian::gradient(const Eigen::VectorXd &a, const Eigen::VectorXd &b,
                                      Eigen::VectorXd &ga, Eigen::VectorXd &gb) const {
  const Eigen::VectorXd d = field_difference(a, b, metric_->spec.field_period);
  const Eigen::VectorXd mid = a + 0.5 * d;
  const Eigen::VectorXd md = mass_.cwiseProduct(d);
  const double q = d.dot(md);
  const double f = metric_->conformal_factor(mid);
  const Eigen::VectorXd grad_f = -2.0 * potential_gradient(metric_->spec, mid);
  ga = (0.25 * q * grad_f - f * md) / dtau_;
  gb = (0.25 * q * grad_f + f * md) / dtau_;
}

void JacobiEnergyLagrangian::hessian(const Eigen::VectorXd &a, const Eigen::VectorXd &b,
                                     Eigen::MatrixXd &haa, Eigen::MatrixXd &hab,
                                     Eigen::MatrixXd &hbb) const {
  const Eigen::VectorXd d = field_difference(a, b, metric_->spec.field_period);
  const Eigen::VectorXd mid = a + 0.5 * d;
  const Eigen::VectorXd md = mass_.cwiseProduct(d);
  const double q = d.dot(md);
  const double f = metric_->conformal_factor(mid);
  const Eigen::VectorXd grad_f = -2.0 * potential_gradient(metric_->spec, mid);
  const Eigen::MatrixXd hess_f = -2.0 * potential_hessian(metric_->spec, mid);
  const Eigen::MatrixXd m = mass_.asDiagonal();
  const Eigen::MatrixXd common = 0.125 * q * hess_f;
  const Eigen::MatrixXd gm = 0.5 * grad_f * md.transpose();
  // s_a = -1, s_b = +1 in d/da, d/db of Δ.
  haa = (common - gm - gm.transpose() + f * m) / dtau_;
  hbb = (common + gm + gm.transpose() + f * m) / dtau_;
  hab = (common + gm - gm.transpose() - f * m) / dtau_;
}

Path jacobi_geodesic(const JacobiMetric &metric, const Path &guess, const SolveOptions &options) {
  const ActionSpec &spec = metric.spec;
  require_same_mesh(spec.mesh, guess.mesh(), "jacobi_geodesic");
  length(metric, guess);
  const JacobiEnergyLagrangian lag(metric, guess.time_steps());
  NewtonResult r = solve_stationary(lag, guess.values(), spec.free_sites(), options);
  Path geodesic(spec.mesh, std::move(r.slices), 1.0 / static_cast<double>(guess.time_steps()));
  length(metric, geodesic);
  return geodesic;
}

Path jacobi_geodesic(const JacobiMetric &metric, const FieldConfig &phi_i,
                     const FieldConfig &phi_f, Index steps, const SolveOptions &options) {
  return jacobi_geodesic(metric, straight_path(phi_i, phi_f, steps, 1.0), options);
}

Path reparametrize_by_length(const JacobiMetric &metric, const Path &path) {
  const auto &v = path.values();
  const Index steps = path.time_steps();
  std::vector<double> cumulative{0.0};
  for (Index k = 0; k < steps; ++k) {
    Eigen::MatrixXd seg(v.rows(), 2);
    seg << v.col(k), v.col(k + 1);
    cumulative.push_back(cumulative.back() + length(metric, Path(path.mesh(), seg, 1.0)));
  }
  const double total = cumulative.back();
  Eigen::MatrixXd out(v.rows(), steps + 1);
  out.col(0) = v.col(0);
  out.col(steps) = v.col(steps);
  std::size_t seg = 0;
  for (Index j = 1; j < steps; ++j) {
    const double target = total * static_cast<double>(j) / static_cast<double>(steps);
    while (seg + 1 < static_cast<std::size_t>(steps) && cumulative[seg + 1] < target)
      ++seg;
    const double span = cumulative[seg + 1] - cumulative[seg];
    const double t = span > 0 ? (target - cumulative[seg]) / span : 0.0;
    const Index k = static_cast<Index>(seg);
    out.col(j) = v.col(k) + t * field_difference(v.col(k), v.col(k + 1), metric.spec.field_period);
  }
  return {path.mesh(), std::move(out), 1.0 / static_cast<double>(steps)};
}

namespace {

double point_to_polyline(const Eigen::VectorXd &p, const Eigen::MatrixXd &poly,
                         const Eigen::VectorXd &w) {
  double best = std::numeric_limits<double>::infinity();
  for (Index k = 0; k + 1 < poly.cols(); ++k) {
    const Eigen::VectorXd s = poly.col(k + 1) - poly.col(k);
    const Eigen::VectorXd d = p - poly.col(k);
    const double ss = (w.array() * s.array().square()).sum();
    double t = ss > 0 ? (w.array() * s.array() * d.array()).sum() / ss : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Eigen::VectorXd e = d - t * s;
    best = std::min(best, (w.array() * e.array().square()).sum());
  }
  if (poly.cols() == 1)
    best = (w.array() * (p - poly.col(0)).array().square()).sum();
  return std::sqrt(best);
}

double directed(const Eigen::MatrixXd &from, const Eigen::MatrixXd &to, const Eigen::VectorXd &w) {
  double worst = 0.0;
  for (Index k = 0; k < from.cols(); ++k)
    worst = std::max(worst, point_to_polyline(from.col(k), to, w));
  return worst;
}

} // namespace

double image_distance(const Path &p, const Path &q) {
  require_same_mesh(p.mesh(), q.mesh(), "image_distance");
  const Eigen::VectorXd &w = p.mesh()->weights();
  return std::max(directed(p.values(), q.values(), w), directed(q.values(), p.values(), w));
}

EquivalenceReport verify_equivalence(const ActionSpec &spec, const ExtremalPath &ex,
                                     const JacobiMetric &metric, double tol,
                                     const SolveOptions &options) {
  require_same_mesh(spec.mesh, ex.path.mesh(), "verify_equivalence");
  const Path geodesic = jacobi_geodesic(metric, reparametrize_by_length(metric, ex.path), options);
  EquivalenceReport r;
  r.tolerance = tol;
  r.energy = metric.energy;
  r.max_deviation = image_distance(geodesic, ex.path);
  r.geodesic_length = length(metric, geodesic);
  r.extremal_length = length(metric, ex.path);
  r.pass = r.max_deviation < tol;
  return r;
}

} // namespace emloc
