#pragma once

#include <complex>
#include <iosfwd>
#include <string>

#include "json.hpp"

#include "emloc/extremal.hpp"
#include "emloc/jacobi.hpp"
#include "emloc/locality.hpp"
#include "emloc/modes.hpp"
#include "emloc/semiclassical.hpp"

namespace emloc {

using json = nlohmann::json;

json to_json(const Mesh &mesh);
MeshPtr mesh_from_json(const json &j);

json to_json(const RegionDecomposition &dec);
RegionDecomposition decomposition_from_json(const json &j, MeshPtr mesh);

/// Complex numbers are [re, im] pairs.
json to_json(std::complex<double> z);

/// Per-extremal action, residual and endpoint momenta.
json to_json(const ActionSpec &spec, const ExtremalSet &set);
json to_json(const LocalityReport &r);
json to_json(const MutualIndependence &m);
json to_json(const VanVleckResult &r);
json to_json(const KernelValue &k);
json to_json(const ClusterReport &r);
json to_json(const ModeMatchReport &r);
json to_json(const ModeIndependence &m);
json to_json(const ModeSectorReport &r);
json to_json(const EquivalenceReport &r);

/// Long-format CSV with header `time,site,value`.
void write_path_csv(std::ostream &os, const Path &path);

/// Rows of comma-separated numbers; all rows must have equal length.
Eigen::MatrixXd read_matrix_csv(std::istream &is);

/// Plain-text table of matched and unmatched modes.
std::string mode_match_table(const ModeMatchReport &r, const std::string &region);

/// Writes `j` with two-space indentation and a trailing newline.
void write_json_file(const std::string &path, const json &j);

} // namespace emloc
