#include "emloc/region.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <sstream>

namespace emloc {

namespace {

enum Label : char { kUnset = 0, kO = 1, kN = 2, kB = 3 };

RegionSide make_side(const Mesh &parent, const std::vector<Index> &interior,
                     const std::vector<Index> &boundary) {
  RegionSide side;
  side.parent_sites = interior;
  side.parent_sites.insert(side.parent_sites.end(), boundary.begin(),
                           boundary.end());
  std::sort(side.parent_sites.begin(), side.parent_sites.end());
  side.mesh = build_submesh(parent, side.parent_sites);
  for (std::size_t k = 0; k < side.parent_sites.size(); ++k) {
    if (std::binary_search(boundary.begin(), boundary.end(),
                           side.parent_sites[k]))
      side.pinned.push_back(static_cast<Index>(k));
  }
  return side;
}

} // namespace

RegionDecomposition::RegionDecomposition(MeshPtr parent,
                                         std::vector<Index> interior_O,
                                         std::vector<Index> interior_N,
                                         std::vector<Index> boundary)
    : parent_(std::move(parent)), interior_O_(std::move(interior_O)),
      interior_N_(std::move(interior_N)), boundary_(std::move(boundary)) {
  if (!parent_)
    throw MeshMismatchError("decomposition without a parent mesh");
  if (interior_O_.empty() || interior_N_.empty())
    throw DegenerateRegionError("both O and N must be nonempty");
  const Index n = parent_->size();
  std::vector<char> label(static_cast<std::size_t>(n), kUnset);
  auto assign = [&](std::vector<Index> &sites, Label l) {
    std::sort(sites.begin(), sites.end());
    for (Index s : sites) {
      if (s < 0 || s >= n)
        throw DegenerateRegionError("region site out of range");
      if (label[static_cast<std::size_t>(s)] != kUnset)
        throw DegenerateRegionError("regions overlap at site " +
                                    std::to_string(s));
      label[static_cast<std::size_t>(s)] = l;
    }
  };
  assign(interior_O_, kO);
  assign(interior_N_, kN);
  assign(boundary_, kB);
  if (std::find(label.begin(), label.end(), kUnset) != label.end())
    throw DegenerateRegionError("regions do not cover the mesh");
  for (const Edge &e : parent_->edges()) {
    const char la = label[static_cast<std::size_t>(e.a)];
    const char lb = label[static_cast<std::size_t>(e.b)];
    if ((la == kO && lb == kN) || (la == kN && lb == kO))
      throw DegenerateRegionError("edge " + std::to_string(e.a) + "-" +
                                  std::to_string(e.b) +
                                  " joins O and N without crossing the boundary");
  }
  o_side_ = make_side(*parent_, interior_O_, boundary_);
  n_side_ = make_side(*parent_, interior_N_, boundary_);
}

RegionDecomposition decompose_sites(const MeshPtr &mesh,
                                    std::vector<Index> selected) {
  const Index n = mesh->size();
  std::sort(selected.begin(), selected.end());
  selected.erase(std::unique(selected.begin(), selected.end()), selected.end());
  if (selected.empty())
    throw DegenerateRegionError("selection is empty");
  std::vector<char> in(static_cast<std::size_t>(n), 0);
  for (Index s : selected) {
    if (s < 0 || s >= n)
      throw DegenerateRegionError("selected site out of range");
    in[static_cast<std::size_t>(s)] = 1;
  }

  // Connectivity of the selection (particle meshes have no edges and are
  // accepted as they are).
  if (!mesh->edges().empty()) {
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::deque<Index> queue{selected.front()};
    seen[static_cast<std::size_t>(selected.front())] = 1;
    std::size_t reached = 0;
    while (!queue.empty()) {
      const Index s = queue.front();
      queue.pop_front();
      ++reached;
      for (const Neighbor &nb : mesh->neighbors(s)) {
        const auto k = static_cast<std::size_t>(nb.site);
        if (in[k] && !seen[k]) {
          seen[k] = 1;
          queue.push_back(nb.site);
        }
      }
    }
    if (reached != selected.size())
      throw DegenerateRegionError("selected region is not connected");
  }

  std::vector<Index> boundary, exterior;
  for (Index s = 0; s < n; ++s) {
    if (in[static_cast<std::size_t>(s)])
      continue;
    const auto &nbs = mesh->neighbors(s);
    const bool touches = std::any_of(nbs.begin(), nbs.end(), [&](const Neighbor &nb) {
      return in[static_cast<std::size_t>(nb.site)] != 0;
    });
    (touches ? boundary : exterior).push_back(s);
  }
  if (exterior.empty())
    throw DegenerateRegionError("exterior region N is empty");
  return {mesh, std::move(selected), std::move(exterior), std::move(boundary)};
}

RegionDecomposition decompose(const MeshPtr &mesh, const PositionPredicate &in_O) {
  std::vector<Index> selected;
  for (Index s = 0; s < mesh->size(); ++s) {
    if (in_O(mesh->positions().row(s).transpose()))
      selected.push_back(s);
  }
  if (selected.empty())
    throw DegenerateRegionError("interior region O is empty");
  return decompose_sites(mesh, std::move(selected));
}

FieldConfig project(const FieldConfig &config, const RegionDecomposition &dec,
                    Side side) {
  require_same_mesh(config.mesh(), dec.parent(), "project");
  const RegionSide &rs = dec.side(side);
  Eigen::VectorXd v(static_cast<Index>(rs.parent_sites.size()));
  for (std::size_t k = 0; k < rs.parent_sites.size(); ++k)
    v(static_cast<Index>(k)) = config[rs.parent_sites[k]];
  return {rs.mesh, std::move(v)};
}

FieldConfig glue(const FieldConfig &f_O, const FieldConfig &f_N,
                 const RegionDecomposition &dec, double tol) {
  const RegionSide &o = dec.side(Side::O);
  const RegionSide &n = dec.side(Side::N);
  require_same_mesh(f_O.mesh(), o.mesh, "glue (O side)");
  require_same_mesh(f_N.mesh(), n.mesh, "glue (N side)");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(dec.parent()->size());
  for (std::size_t k = 0; k < o.parent_sites.size(); ++k)
    v(o.parent_sites[k]) = f_O[static_cast<Index>(k)];
  std::vector<Index> offending;
  for (std::size_t k = 0; k < n.parent_sites.size(); ++k) {
    const Index s = n.parent_sites[k];
    const double value = f_N[static_cast<Index>(k)];
    if (std::binary_search(dec.boundary().begin(), dec.boundary().end(), s)) {
      if (!(std::abs(v(s) - value) <= tol))
        offending.push_back(s);
    } else {
      v(s) = value;
    }
  }
  if (!offending.empty()) {
    std::ostringstream msg;
    msg << "fields disagree on the boundary at sites";
    for (Index s : offending)
      msg << ' ' << s;
    throw BoundaryMismatchError(msg.str(), std::move(offending));
  }
  return {dec.parent(), std::move(v)};
}

} // namespace emloc
