#pragma once

#include <functional>
#include <iosfwd>

#include <Eigen/Core>

#include "emloc/mesh.hpp"

namespace emloc {

/// One point of configuration space: a real value per mesh site.
class FieldConfig {
public:
  FieldConfig(MeshPtr mesh, Eigen::VectorXd values);

  static FieldConfig zero(MeshPtr mesh);
  static FieldConfig constant(MeshPtr mesh, double value);
  /// Samples f at every site's position row.
  static FieldConfig
  from_function(MeshPtr mesh,
                const std::function<double(const Eigen::VectorXd &)> &f);

  const MeshPtr &mesh() const noexcept { return mesh_; }
  const Eigen::VectorXd &values() const noexcept { return values_; }
  Index size() const noexcept { return values_.size(); }
  double operator[](Index site) const { return values_(site); }

private:
  MeshPtr mesh_;
  Eigen::VectorXd values_;
};

void require_same_mesh(const MeshPtr &a, const MeshPtr &b, const char *what);

/// Inner-product flavour on configuration space. `conformal` scales the site
/// weights by a positive, field-dependent factor evaluated at a base point.
struct SuperMetric {
  enum class Kind { flat_L2, conformal };

  Kind kind = Kind::flat_L2;
  /// Per-site factor w(base, x); only used when kind == conformal.
  std::function<Eigen::VectorXd(const Eigen::VectorXd &base)> conformal_weight;

  static SuperMetric flat() { return {}; }
  static SuperMetric
  conformal(std::function<Eigen::VectorXd(const Eigen::VectorXd &)> weight) {
    return {Kind::conformal, std::move(weight)};
  }

  /// Diagonal of the induced bilinear form at `base`, including site weights.
  Eigen::VectorXd diagonal(const Mesh &mesh, const Eigen::VectorXd &base) const;
};

double inner_product(const FieldConfig &u, const FieldConfig &v,
                     const SuperMetric &metric, const FieldConfig &base);
double inner_product(const FieldConfig &u, const FieldConfig &v,
                     const SuperMetric &metric = SuperMetric::flat());
double norm(const FieldConfig &u, const SuperMetric &metric = SuperMetric::flat());

/// CSV with header `site_id,value`.
void write_field_csv(std::ostream &os, const FieldConfig &field);
FieldConfig read_field_csv(std::istream &is, MeshPtr mesh);

} // namespace emloc
