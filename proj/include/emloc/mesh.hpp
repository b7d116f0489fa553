#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "emloc/errors.hpp"

namespace emloc {

enum class Topology { circle, interval, annulus, product, particle };

std::string_view to_string(Topology t);
Topology topology_from_string(std::string_view s);

struct Neighbor {
  Index site;
  double length;
  friend bool operator==(const Neighbor &, const Neighbor &) = default;
};

/// Undirected edge with a < b.
struct Edge {
  Index a;
  Index b;
  double length;
};

/// A discretized spatial manifold: sites with coordinates, quadrature
/// weights and a weighted adjacency graph. Site ids are 0..size()-1.
///
/// `boundary_sites` lists the sites on the manifold's own boundary (the
/// rings of an annulus, the ends of an interval); closed manifolds have none.
class Mesh {
public:
  Mesh(Topology topology, Eigen::MatrixXd positions, Eigen::VectorXd weights,
       std::vector<std::vector<Neighbor>> adjacency,
       std::vector<Index> boundary_sites = {});

  Index size() const noexcept { return weights_.size(); }
  Topology topology() const noexcept { return topology_; }
  const Eigen::MatrixXd &positions() const noexcept { return positions_; }
  const Eigen::VectorXd &weights() const noexcept { return weights_; }
  const std::vector<Neighbor> &neighbors(Index site) const {
    return adjacency_.at(static_cast<std::size_t>(site));
  }
  const std::vector<std::vector<Neighbor>> &adjacency() const noexcept {
    return adjacency_;
  }
  const std::vector<Index> &boundary_sites() const noexcept {
    return boundary_sites_;
  }
  /// Unique undirected edges in (a, b) lexicographic order.
  const std::vector<Edge> &edges() const noexcept { return edges_; }
  double total_measure() const { return weights_.sum(); }

  friend bool operator==(const Mesh &lhs, const Mesh &rhs);

private:
  Topology topology_;
  Eigen::MatrixXd positions_; // size() x coordinate dimension
  Eigen::VectorXd weights_;
  std::vector<std::vector<Neighbor>> adjacency_;
  std::vector<Index> boundary_sites_;
  std::vector<Edge> edges_;
};

using MeshPtr = std::shared_ptr<const Mesh>;

/// True if both refer to the same mesh object or to structurally equal meshes.
bool same_mesh(const MeshPtr &a, const MeshPtr &b);

/// Uniform periodic chain; positions are arclength coordinates.
MeshPtr build_circle_mesh(Index n_sites, double circumference);

/// Nodes at both ends of [0, length]; dual-cell weights (h/2 at the ends).
/// The two end nodes are the boundary sites.
MeshPtr build_interval_mesh(Index n_sites, double length);

/// Polar grid with n_r rings (inclusive of r1 and r2) and n_theta spokes.
/// Site id = ring * n_theta + spoke; positions are (r, theta).
MeshPtr build_annulus_mesh(Index n_r, Index n_theta, double r1, double r2);

/// Uncoupled point degrees of freedom with unit weight and no adjacency.
MeshPtr build_particle_mesh(Index dim);

/// Disjoint union; its configuration space is the product of the two.
MeshPtr build_product_mesh(const Mesh &first, const Mesh &second);

/// Restriction of a mesh to a site subset. Adjacency is truncated to edges
/// with both ends inside; `sites` must be sorted and unique.
MeshPtr build_submesh(const Mesh &parent, const std::vector<Index> &sites);

} // namespace emloc
