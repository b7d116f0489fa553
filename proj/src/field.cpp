#include "emloc/field.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace emloc {

FieldConfig::FieldConfig(MeshPtr mesh, Eigen::VectorXd values)
    : mesh_(std::move(mesh)), values_(std::move(values)) {
  if (!mesh_)
    throw MeshMismatchError("field has no mesh");
  if (values_.size() != mesh_->size())
    throw MeshMismatchError("field length " + std::to_string(values_.size()) +
                            " does not match site count " +
                            std::to_string(mesh_->size()));
  if (!values_.allFinite())
    throw Error("field values must be finite");
}

FieldConfig FieldConfig::zero(MeshPtr mesh) {
  const Index n = mesh->size();
  return {std::move(mesh), Eigen::VectorXd::Zero(n)};
}

FieldConfig FieldConfig::constant(MeshPtr mesh, double value) {
  const Index n = mesh->size();
  return {std::move(mesh), Eigen::VectorXd::Constant(n, value)};
}

FieldConfig FieldConfig::from_function(
    MeshPtr mesh, const std::function<double(const Eigen::VectorXd &)> &f) {
  Eigen::VectorXd v(mesh->size());
  for (Index i = 0; i < mesh->size(); ++i)
    v(i) = f(mesh->positions().row(i).transpose());
  return {std::move(mesh), std::move(v)};
}

void require_same_mesh(const MeshPtr &a, const MeshPtr &b, const char *what) {
  if (!same_mesh(a, b))
    throw MeshMismatchError(std::string(what) + ": fields live on different meshes");
}

Eigen::VectorXd SuperMetric::diagonal(const Mesh &mesh,
                                      const Eigen::VectorXd &base) const {
  if (kind == Kind::flat_L2)
    return mesh.weights();
  if (!conformal_weight)
    throw MetricDegenerateError("conformal metric without a weight function");
  Eigen::VectorXd w = conformal_weight(base);
  if (w.size() != mesh.size())
    throw MetricDegenerateError("conformal weight has wrong length");
  for (Index i = 0; i < w.size(); ++i) {
    if (!(w(i) > 0.0) || !std::isfinite(w(i)))
      throw MetricDegenerateError("conformal weight is not positive at site " +
                                  std::to_string(i));
  }
  return mesh.weights().cwiseProduct(w);
}

double inner_product(const FieldConfig &u, const FieldConfig &v,
                     const SuperMetric &metric, const FieldConfig &base) {
  require_same_mesh(u.mesh(), v.mesh(), "inner_product");
  require_same_mesh(u.mesh(), base.mesh(), "inner_product");
  const Eigen::VectorXd d = metric.diagonal(*u.mesh(), base.values());
  return (d.array() * u.values().array() * v.values().array()).sum();
}

double inner_product(const FieldConfig &u, const FieldConfig &v,
                     const SuperMetric &metric) {
  return inner_product(u, v, metric, FieldConfig::zero(u.mesh()));
}

double norm(const FieldConfig &u, const SuperMetric &metric) {
  return std::sqrt(inner_product(u, u, metric));
}

void write_field_csv(std::ostream &os, const FieldConfig &field) {
  os << "site_id,value\n";
  char buf[64];
  for (Index i = 0; i < field.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", field[i]);
    os << i << ',' << buf << '\n';
  }
}

FieldConfig read_field_csv(std::istream &is, MeshPtr mesh) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("site_id,value", 0) != 0)
    throw Error("field CSV: missing 'site_id,value' header");
  Eigen::VectorXd v = Eigen::VectorXd::Constant(mesh->size(), std::nan(""));
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty())
      continue;
    std::istringstream ls(line);
    long long site = -1;
    char comma = 0;
    double value = 0.0;
    if (!(ls >> site >> comma >> value) || comma != ',')
      throw Error("field CSV: malformed row " + std::to_string(row));
    if (site < 0 || site >= mesh->size())
      throw MeshMismatchError("field CSV: site id out of range at row " +
                              std::to_string(row));
    v(static_cast<Index>(site)) = value;
  }
  if (!v.allFinite())
    throw MeshMismatchError("field CSV: not every site has a value");
  return {std::move(mesh), std::move(v)};
}

} // namespace emloc
