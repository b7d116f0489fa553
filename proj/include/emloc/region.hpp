#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "emloc/field.hpp"
#include "emloc/mesh.hpp"

namespace emloc {

enum class Side { O, N };

/// One side of a decomposition: the submesh interior ∪ ∂O together with the
/// map back to parent site ids. `pinned` holds the local ids of ∂O sites.
struct RegionSide {
  MeshPtr mesh;
  std::vector<Index> parent_sites;
  std::vector<Index> pinned;
};

/// Split of a mesh into interior O, exterior N and the separating boundary ∂O.
/// ∂O consists of the unselected sites adjacent to the selection.
class RegionDecomposition {
public:
  /// Validates disjointness, cover and separation.
  RegionDecomposition(MeshPtr parent, std::vector<Index> interior_O,
                      std::vector<Index> interior_N,
                      std::vector<Index> boundary);

  const MeshPtr &parent() const noexcept { return parent_; }
  const std::vector<Index> &interior_O() const noexcept { return interior_O_; }
  const std::vector<Index> &interior_N() const noexcept { return interior_N_; }
  const std::vector<Index> &boundary() const noexcept { return boundary_; }
  const std::vector<Index> &interior(Side s) const {
    return s == Side::O ? interior_O_ : interior_N_;
  }
  const RegionSide &side(Side s) const { return s == Side::O ? o_side_ : n_side_; }

private:
  MeshPtr parent_;
  std::vector<Index> interior_O_, interior_N_, boundary_;
  RegionSide o_side_, n_side_;
};

using PositionPredicate = std::function<bool(const Eigen::VectorXd &)>;

/// Selects O by a predicate on site positions.
RegionDecomposition decompose(const MeshPtr &mesh, const PositionPredicate &in_O);
/// Selects O by explicit site ids.
RegionDecomposition decompose_sites(const MeshPtr &mesh,
                                    std::vector<Index> selected);

/// Restriction of a field to O ∪ ∂O (resp. N ∪ ∂O).
FieldConfig project(const FieldConfig &config, const RegionDecomposition &dec,
                    Side side);
inline FieldConfig project_O(const FieldConfig &config,
                             const RegionDecomposition &dec) {
  return project(config, dec, Side::O);
}
inline FieldConfig project_N(const FieldConfig &config,
                             const RegionDecomposition &dec) {
  return project(config, dec, Side::N);
}

inline constexpr double kGlueTolerance = 1e-12;

/// Joins fields on both sides; they must agree on ∂O within `tol`.
FieldConfig glue(const FieldConfig &f_O, const FieldConfig &f_N,
                 const RegionDecomposition &dec, double tol = kGlueTolerance);

} // namespace emloc
