#include "emloc/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace emloc {

std::string_view to_string(Topology t) {
  switch (t) {
  case Topology::circle:
    return "circle";
  case Topology::interval:
    return "interval";
  case Topology::annulus:
    return "annulus";
  case Topology::product:
    return "product";
  case Topology::particle:
    return "particle";
  }
  return "unknown";
}

Topology topology_from_string(std::string_view s) {
  for (Topology t : {Topology::circle, Topology::interval, Topology::annulus,
                     Topology::product, Topology::particle}) {
    if (to_string(t) == s)
      return t;
  }
  throw InvalidMeshError("unknown topology tag '" + std::string(s) + "'");
}

Mesh::Mesh(Topology topology, Eigen::MatrixXd positions,
           Eigen::VectorXd weights,
           std::vector<std::vector<Neighbor>> adjacency,
           std::vector<Index> boundary_sites)
    : topology_(topology), positions_(std::move(positions)),
      weights_(std::move(weights)), adjacency_(std::move(adjacency)),
      boundary_sites_(std::move(boundary_sites)) {
  const Index n = weights_.size();
  if (n == 0)
    throw InvalidMeshError("mesh has no sites");
  if (positions_.rows() != n ||
      static_cast<Index>(adjacency_.size()) != n)
    throw InvalidMeshError("positions/adjacency size does not match site count");
  if (!weights_.allFinite() || (weights_.array() <= 0.0).any())
    throw InvalidMeshError("site weights must be finite and positive");

  std::sort(boundary_sites_.begin(), boundary_sites_.end());
  for (Index b : boundary_sites_) {
    if (b < 0 || b >= n)
      throw InvalidMeshError("boundary site out of range");
  }

  for (Index i = 0; i < n; ++i) {
    for (const Neighbor &nb : adjacency_[static_cast<std::size_t>(i)]) {
      if (nb.site < 0 || nb.site >= n || nb.site == i)
        throw InvalidMeshError("adjacency references an invalid site");
      if (!(nb.length > 0.0) || !std::isfinite(nb.length))
        throw InvalidMeshError("edge lengths must be strictly positive");
      const auto &back = adjacency_[static_cast<std::size_t>(nb.site)];
      const bool symmetric =
          std::any_of(back.begin(), back.end(), [&](const Neighbor &m) {
            return m.site == i && m.length == nb.length;
          });
      if (!symmetric)
        throw InvalidMeshError("adjacency is not symmetric");
      if (i < nb.site)
        edges_.push_back({i, nb.site, nb.length});
    }
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge &l, const Edge &r) {
    return l.a != r.a ? l.a < r.a : l.b < r.b;
  });
}

bool operator==(const Mesh &lhs, const Mesh &rhs) {
  return lhs.topology_ == rhs.topology_ && lhs.size() == rhs.size() &&
         lhs.positions_ == rhs.positions_ && lhs.weights_ == rhs.weights_ &&
         lhs.adjacency_ == rhs.adjacency_ &&
         lhs.boundary_sites_ == rhs.boundary_sites_;
}

bool same_mesh(const MeshPtr &a, const MeshPtr &b) {
  if (!a || !b)
    return false;
  return a == b || *a == *b;
}

MeshPtr build_circle_mesh(Index n_sites, double circumference) {
  if (n_sites < 3)
    throw InvalidMeshError("circle mesh needs at least 3 sites");
  if (!(circumference > 0.0))
    throw InvalidGeometryError("circumference must be positive");
  const double h = circumference / static_cast<double>(n_sites);
  Eigen::MatrixXd pos(n_sites, 1);
  std::vector<std::vector<Neighbor>> adj(static_cast<std::size_t>(n_sites));
  for (Index i = 0; i < n_sites; ++i) {
    pos(i, 0) = h * static_cast<double>(i);
    adj[static_cast<std::size_t>(i)] = {{(i + n_sites - 1) % n_sites, h},
                                        {(i + 1) % n_sites, h}};
  }
  return std::make_shared<const Mesh>(Topology::circle, std::move(pos),
                                      Eigen::VectorXd::Constant(n_sites, h),
                                      std::move(adj));
}

MeshPtr build_interval_mesh(Index n_sites, double length) {
  if (n_sites < 3)
    throw InvalidMeshError("interval mesh needs at least 3 sites");
  if (!(length > 0.0))
    throw InvalidGeometryError("interval length must be positive");
  const double h = length / static_cast<double>(n_sites - 1);
  Eigen::MatrixXd pos(n_sites, 1);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(n_sites, h);
  w(0) = w(n_sites - 1) = 0.5 * h;
  std::vector<std::vector<Neighbor>> adj(static_cast<std::size_t>(n_sites));
  for (Index i = 0; i < n_sites; ++i) {
    pos(i, 0) = h * static_cast<double>(i);
    auto &list = adj[static_cast<std::size_t>(i)];
    if (i > 0)
      list.push_back({i - 1, h});
    if (i + 1 < n_sites)
      list.push_back({i + 1, h});
  }
  return std::make_shared<const Mesh>(Topology::interval, std::move(pos),
                                      std::move(w), std::move(adj),
                                      std::vector<Index>{0, n_sites - 1});
}

MeshPtr build_annulus_mesh(Index n_r, Index n_theta, double r1, double r2) {
  if (!(r1 > 0.0) || !(r2 > r1))
    throw InvalidGeometryError("annulus needs r2 > r1 > 0");
  if (n_r < 2 || n_theta < 8)
    throw InvalidMeshError("annulus mesh needs n_r >= 2 and n_theta >= 8");
  const double dr = (r2 - r1) / static_cast<double>(n_r - 1);
  const double dtheta = 2.0 * std::numbers::pi / static_cast<double>(n_theta);
  const Index n = n_r * n_theta;
  Eigen::MatrixXd pos(n, 2);
  Eigen::VectorXd w(n);
  std::vector<std::vector<Neighbor>> adj(static_cast<std::size_t>(n));
  std::vector<Index> boundary;
  auto id = [n_theta](Index ring, Index spoke) {
    return ring * n_theta + (spoke + n_theta) % n_theta;
  };
  for (Index i = 0; i < n_r; ++i) {
    const double r = r1 + dr * static_cast<double>(i);
    const double r_in = std::max(r - 0.5 * dr, r1);
    const double r_out = std::min(r + 0.5 * dr, r2);
    const double area = 0.5 * (r_out * r_out - r_in * r_in) * dtheta;
    for (Index j = 0; j < n_theta; ++j) {
      const Index s = id(i, j);
      pos(s, 0) = r;
      pos(s, 1) = dtheta * static_cast<double>(j);
      w(s) = area;
      auto &list = adj[static_cast<std::size_t>(s)];
      if (i > 0)
        list.push_back({id(i - 1, j), dr});
      if (i + 1 < n_r)
        list.push_back({id(i + 1, j), dr});
      list.push_back({id(i, j - 1), r * dtheta});
      list.push_back({id(i, j + 1), r * dtheta});
      if (i == 0 || i + 1 == n_r)
        boundary.push_back(s);
    }
  }
  return std::make_shared<const Mesh>(Topology::annulus, std::move(pos),
                                      std::move(w), std::move(adj),
                                      std::move(boundary));
}

MeshPtr build_particle_mesh(Index dim) {
  if (dim < 1)
    throw InvalidMeshError("particle mesh needs at least one degree of freedom");
  Eigen::MatrixXd pos(dim, 1);
  for (Index i = 0; i < dim; ++i)
    pos(i, 0) = static_cast<double>(i);
  return std::make_shared<const Mesh>(
      Topology::particle, std::move(pos), Eigen::VectorXd::Ones(dim),
      std::vector<std::vector<Neighbor>>(static_cast<std::size_t>(dim)));
}

MeshPtr build_product_mesh(const Mesh &first, const Mesh &second) {
  const Index n1 = first.size();
  const Index n = n1 + second.size();
  const Index cols =
      std::max(first.positions().cols(), second.positions().cols());
  Eigen::MatrixXd pos = Eigen::MatrixXd::Zero(n, cols);
  pos.topLeftCorner(n1, first.positions().cols()) = first.positions();
  pos.bottomLeftCorner(second.size(), second.positions().cols()) =
      second.positions();
  Eigen::VectorXd w(n);
  w << first.weights(), second.weights();
  auto adj = first.adjacency();
  for (const auto &list : second.adjacency()) {
    auto shifted = list;
    for (auto &nb : shifted)
      nb.site += n1;
    adj.push_back(std::move(shifted));
  }
  auto boundary = first.boundary_sites();
  for (Index b : second.boundary_sites())
    boundary.push_back(b + n1);
  return std::make_shared<const Mesh>(Topology::product, std::move(pos),
                                      std::move(w), std::move(adj),
                                      std::move(boundary));
}

MeshPtr build_submesh(const Mesh &parent, const std::vector<Index> &sites) {
  if (sites.empty())
    throw InvalidMeshError("submesh needs at least one site");
  std::vector<Index> local(static_cast<std::size_t>(parent.size()), -1);
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const Index s = sites[k];
    if (s < 0 || s >= parent.size() || (k > 0 && s <= sites[k - 1]))
      throw InvalidMeshError("submesh sites must be sorted, unique, in range");
    local[static_cast<std::size_t>(s)] = static_cast<Index>(k);
  }
  const Index n = static_cast<Index>(sites.size());
  Eigen::MatrixXd pos(n, parent.positions().cols());
  Eigen::VectorXd w(n);
  std::vector<std::vector<Neighbor>> adj(sites.size());
  for (Index k = 0; k < n; ++k) {
    const Index s = sites[static_cast<std::size_t>(k)];
    pos.row(k) = parent.positions().row(s);
    w(k) = parent.weights()(s);
    for (const Neighbor &nb : parent.neighbors(s)) {
      const Index l = local[static_cast<std::size_t>(nb.site)];
      if (l >= 0)
        adj[static_cast<std::size_t>(k)].push_back({l, nb.length});
    }
  }
  std::vector<Index> boundary;
  for (Index b : parent.boundary_sites()) {
    if (local[static_cast<std::size_t>(b)] >= 0)
      boundary.push_back(local[static_cast<std::size_t>(b)]);
  }
  Topology topo = parent.topology();
  if (topo == Topology::circle)
    topo = Topology::interval;
  return std::make_shared<const Mesh>(topo, std::move(pos), std::move(w),
                                      std::move(adj), std::move(boundary));
}

} // namespace emloc
