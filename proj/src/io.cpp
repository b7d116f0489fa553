#include "emloc/io.hpp"

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace emloc {

namespace {

json vector_json(const Eigen::VectorXd &v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i)
    a.push_back(v(i));
  return a;
}

json matrix_json(const Eigen::MatrixXd &m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i)
    rows.push_back(vector_json(m.row(i).transpose()));
  return rows;
}

json index_json(const std::vector<Index> &v) {
  json a = json::array();
  for (Index i : v)
    a.push_back(i);
  return a;
}

std::vector<Index> index_vector(const json &j) {
  std::vector<Index> out;
  for (const auto &x : j)
    out.push_back(x.get<Index>());
  return out;
}

} // namespace

json to_json(const Mesh &mesh) {
  json j;
  j["topology"] = std::string(to_string(mesh.topology()));
  j["site_count"] = mesh.size();
  j["positions"] = matrix_json(mesh.positions());
  j["weights"] = vector_json(mesh.weights());
  json adj = json::array();
  for (Index s = 0; s < mesh.size(); ++s) {
    json nbrs = json::array();
    for (const Neighbor &nb : mesh.neighbors(s))
      nbrs.push_back({{"site", nb.site}, {"length", nb.length}});
    adj.push_back(nbrs);
  }
  j["adjacency"] = adj;
  j["boundary_sites"] = index_json(mesh.boundary_sites());
  return j;
}

MeshPtr mesh_from_json(const json &j) {
  const auto &pos = j.at("positions");
  const Index n = static_cast<Index>(pos.size());
  const Index dim = n > 0 ? static_cast<Index>(pos.at(0).size()) : 0;
  Eigen::MatrixXd positions(n, dim);
  for (Index i = 0; i < n; ++i)
    for (Index d = 0; d < dim; ++d)
      positions(i, d) = pos.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(d)).get<double>();
  const auto &w = j.at("weights");
  Eigen::VectorXd weights(static_cast<Index>(w.size()));
  for (std::size_t i = 0; i < w.size(); ++i)
    weights(static_cast<Index>(i)) = w.at(i).get<double>();
  std::vector<std::vector<Neighbor>> adjacency;
  for (const auto &row : j.at("adjacency")) {
    std::vector<Neighbor> nbrs;
    for (const auto &nb : row)
      nbrs.push_back({nb.at("site").get<Index>(), nb.at("length").get<double>()});
    adjacency.push_back(std::move(nbrs));
  }
  return std::make_shared<const Mesh>(topology_from_string(j.at("topology").get<std::string>()),
                                      std::move(positions), std::move(weights),
                                      std::move(adjacency), index_vector(j.at("boundary_sites")));
}

json to_json(const RegionDecomposition &dec) {
  return {{"interior_O", index_json(dec.interior_O())},
          {"interior_N", index_json(dec.interior_N())},
          {"boundary", index_json(dec.boundary())},
          {"parent_site_count", dec.parent()->size()}};
}

RegionDecomposition decomposition_from_json(const json &j, MeshPtr mesh) {
  return RegionDecomposition(std::move(mesh), index_vector(j.at("interior_O")),
                             index_vector(j.at("interior_N")), index_vector(j.at("boundary")));
}

json to_json(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

json to_json(const ActionSpec &spec, const ExtremalSet &set) {
  json j;
  j["dedup_threshold"] = set.dedup_threshold;
  j["seeds_tried"] = set.seeds_tried;
  json list = json::array();
  for (const ExtremalPath &ex : set.extremals) {
    list.push_back({{"seed", ex.seed_label},
                    {"action", ex.on_shell_action},
                    {"residual", ex.residual_norm},
                    {"iterations", ex.iterations},
                    {"relative_min_eigenvalue", ex.relative_min_eigenvalue},
                    {"momentum_initial", vector_json(on_shell_momentum(spec, ex, PathEnd::initial).values())},
                    {"momentum_final", vector_json(on_shell_momentum(spec, ex, PathEnd::final).values())}});
  }
  j["extremals"] = list;
  json failures = json::array();
  for (const SeedFailure &f : set.failures)
    failures.push_back({{"seed", f.label}, {"reason", f.reason}});
  j["failures"] = failures;
  j["empty"] = set.empty();
  return j;
}

json to_json(const LocalityReport &r) {
  json pairs = json::array();
  for (const MatchPair &p : r.matching.pairs)
    pairs.push_back({{"global", p.global}, {"intrinsic", p.intrinsic}, {"epsilon", p.epsilon}});
  return {{"side", r.side == Side::O ? "O" : "N"},
          {"epsilon", r.epsilon},
          {"condition_i", r.condition_i},
          {"condition_ii", r.condition_ii},
          {"verdict", to_string(r.verdict)},
          {"matching",
           {{"pairs", pairs},
            {"unmatched_global", index_json(r.matching.unmatched_global)},
            {"unmatched_intrinsic", index_json(r.matching.unmatched_intrinsic)}}},
          {"global_deviation", r.global_deviation},
          {"intrinsic_deviation", r.intrinsic_deviation},
          {"max_deviation", r.max_deviation},
          {"boundary_drift", r.boundary_drift},
          {"global_count", r.global_count},
          {"intrinsic_count", r.intrinsic_count},
          {"global_seeds", r.global_seeds},
          {"intrinsic_seeds", r.intrinsic_seeds}};
}

json to_json(const MutualIndependence &m) {
  return {{"O_indep_of_N", to_json(m.O_indep_of_N)},
          {"N_indep_of_O", to_json(m.N_indep_of_O)},
          {"mutual", m.mutual}};
}

json to_json(const VanVleckResult &r) {
  return {{"matrix", matrix_json(r.matrix)},
          {"sites", index_json(r.sites)},
          {"determinant", r.determinant},
          {"log_abs_determinant", r.log_abs_determinant},
          {"sign", r.sign},
          {"log_free_reference", r.log_free_reference},
          {"near_caustic", r.near_caustic}};
}

json to_json(const KernelValue &k) {
  json list = json::array();
  for (const ExtremalContribution &c : k.per_extremal)
    list.push_back({{"seed", c.seed_label},
                    {"action", c.action},
                    {"van_vleck", c.van_vleck},
                    {"van_vleck_sign", c.van_vleck_sign},
                    {"phase", to_json(c.phase)},
                    {"term", to_json(c.term)},
                    {"action_over_hbar", c.action_over_hbar},
                    {"near_caustic", c.near_caustic}});
  return {{"amplitude", to_json(k.amplitude)}, {"hbar", k.hbar}, {"per_extremal", list}};
}

json to_json(const ClusterReport &r) {
  return {{"K_joint", to_json(r.K_joint)},
          {"K_product", to_json(r.K_product)},
          {"relative_defect", r.relative_defect},
          {"defect_defined", r.defect_defined},
          {"joint_count", r.joint_count},
          {"O_count", r.O_count},
          {"N_count", r.N_count},
          {"reindexing_holds", r.reindexing_holds},
          {"joint", to_json(r.joint)},
          {"kernel_O", to_json(r.kernel_O)},
          {"kernel_N", to_json(r.kernel_N)}};
}

json to_json(const ModeMatchReport &r) {
  json j;
  j["region_length"] = r.length_region ? json(r.length_region->str()) : json(nullptr);
  j["M_length"] = r.length_M ? json(r.length_M->str()) : json(nullptr);
  if (r.length_region && r.length_M)
    j["N_length"] = (*r.length_M - *r.length_region).str();
  j["irrational_ratio"] = r.irrational.empty() ? json(nullptr) : json(r.irrational);
  j["n_max"] = r.n_max;
  j["global_cutoff"] = r.global_cutoff ? json(*r.global_cutoff) : json(nullptr);
  j["ratio_class"] = r.ratio_class == RatioClass::commensurate ? "commensurate" : "incommensurate";
  json matched = json::array();
  for (const ModeMatch &m : r.matched)
    matched.push_back({m.intrinsic, m.global});
  j["matched"] = matched;
  j["unmatched_intrinsic"] = r.unmatched_intrinsic;
  j["only_constant_solution"] = r.only_constant_solution;
  j["surjective"] = r.surjective();
  return j;
}

json to_json(const ModeIndependence &m) {
  return {{"O_side", to_json(m.O_side)}, {"N_side", to_json(m.N_side)}, {"mutual", m.mutual}};
}

json to_json(const ModeSectorReport &r) {
  json sectors = json::array();
  for (auto z : r.sector_kernels)
    sectors.push_back(to_json(z));
  return {{"K_joint", to_json(r.K_joint)},
          {"K_product", to_json(r.K_product)},
          {"sector_kernels", sectors},
          {"relative_defect", r.relative_defect},
          {"max_offsector_coupling", r.max_offsector_coupling}};
}

json to_json(const EquivalenceReport &r) {
  return {{"max_deviation", r.max_deviation},
          {"tolerance", r.tolerance},
          {"energy", r.energy},
          {"geodesic_length", r.geodesic_length},
          {"extremal_length", r.extremal_length},
          {"pass", r.pass}};
}

void write_path_csv(std::ostream &os, const Path &path) {
  os << "time,site,value\n";
  char buf[96];
  for (Index k = 0; k < path.slice_count(); ++k)
    for (Index s = 0; s < path.values().rows(); ++s) {
      std::snprintf(buf, sizeof buf, "%.17g,%lld,%.17g\n", static_cast<double>(k) * path.dt(),
                    static_cast<long long>(s), path.values()(s, k));
      os << buf;
    }
}

Eigen::MatrixXd read_matrix_csv(std::istream &is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos)
      continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(cell, &used);
      } catch (const std::logic_error &) {
        throw Error("matrix CSV: not a number: '" + cell + "'");
      }
      if (cell.find_first_not_of(" \t\r", used) != std::string::npos)
        throw Error("matrix CSV: not a number: '" + cell + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error("matrix CSV: ragged rows");
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd m(static_cast<Index>(rows.size()),
                    rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k)
      m(static_cast<Index>(i), static_cast<Index>(k)) = rows[i][k];
  return m;
}

std::string mode_match_table(const ModeMatchReport &r, const std::string &region) {
  std::ostringstream os;
  if (r.ratio_class == RatioClass::incommensurate) {
    os << "[" << region << "]/[M] = " << r.irrational << " (irrational): no intrinsic mode of "
       << region << " is a restriction of a global mode; only the constant field survives\n";
    return os.str();
  }
  os << "[" << region << "] = " << r.length_region->str() << ", [M] = " << r.length_M->str()
     << "\n";
  os << std::setw(6) << "n" << std::setw(8) << "n'" << "\n";
  std::size_t mi = 0, ui = 0;
  for (std::int64_t n = 1; n <= r.n_max; ++n) {
    os << std::setw(6) << n;
    if (mi < r.matched.size() && r.matched[mi].intrinsic == n)
      os << std::setw(8) << r.matched[mi++].global << "\n";
    else if (ui < r.unmatched_intrinsic.size() && r.unmatched_intrinsic[ui] == n) {
      os << std::setw(8) << "-" << "\n";
      ++ui;
    }
  }
  os << (r.surjective() ? "every intrinsic mode is a restriction of a global mode\n"
                        : "some intrinsic modes are not restrictions of global modes\n");
  return os.str();
}

void write_json_file(const std::string &path, const json &j) {
  std::ofstream f(path, std::ios::binary);
  if (!f)
    throw Error("cannot write " + path);
  f << j.dump(2) << "\n";
}

} // namespace emloc
