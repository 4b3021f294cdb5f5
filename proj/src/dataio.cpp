#include "cavitykin/dataio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cavitykin {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

std::string format_mm(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  return out;
}

ordered_json parse_json_file(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const ordered_json& j, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
}

ordered_json vec3_json(const Eigen::Vector3d& v) {
  return ordered_json::array({v.x(), v.y(), v.z()});
}

Eigen::Vector3d vec3_from(const ordered_json& j, const char* what) {
  if (!j.is_array() || j.size() != 3)
    throw ParseError(std::string(what) + " must be an array of three numbers");
  return Eigen::Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

bool has_extension(const std::filesystem::path& path, const char* ext) {
  std::string e = path.extension().string();
  for (char& c : e) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return e == ext;
}

Surface load_surface_csv(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  Surface surface;

  while (std::getline(in, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty()) continue;
    if (line_no == 1) {
      if (line.rfind("x,y,z", 0) != 0)
        throw ParseError(path.string() + ":1: expected header 'x,y,z'");
      continue;
    }
    std::istringstream row(line);
    double coords[3];
    std::string field;
    for (int i = 0; i < 3; ++i) {
      if (!std::getline(row, field, ','))
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 3 fields");
      try {
        std::size_t used = 0;
        coords[i] = std::stod(field, &used);
        while (used < field.size() && std::isspace(static_cast<unsigned char>(field[used])))
          ++used;
        if (used != field.size()) throw std::invalid_argument(field);
      } catch (const std::exception&) {
        throw ParseError(path.string() + ":" + std::to_string(line_no) + ": bad number '" +
                         field + "'");
      }
    }
    surface.points.emplace_back(coords[0], coords[1], coords[2]);
  }
  if (surface.empty()) throw EmptyFile(path.string() + " contains no points");
  return surface;
}

void save_surface_csv(const Surface& surface, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "x,y,z\n";
  for (const Point3& p : surface)
    out << format_mm(p.x()) << ',' << format_mm(p.y()) << ',' << format_mm(p.z()) << '\n';
}

Surface load_surface_json(const std::filesystem::path& path) {
  const ordered_json j = parse_json_file(path);
  if (!j.contains("points")) throw ParseError(path.string() + ": missing 'points'");
  Surface surface;
  for (const auto& pt : j.at("points")) surface.points.push_back(vec3_from(pt, "point"));
  if (surface.empty()) throw EmptyFile(path.string() + " contains no points");
  return surface;
}

void save_surface_json(const Surface& surface, const std::filesystem::path& path) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  ordered_json pts = ordered_json::array();
  for (const Point3& p : surface) pts.push_back(vec3_json(p));
  j["points"] = std::move(pts);
  j["metadata"] = ordered_json::object();
  write_json_file(j, path);
}

}  // namespace

Surface load_surface(const std::filesystem::path& path) {
  return has_extension(path, ".json") ? load_surface_json(path) : load_surface_csv(path);
}

void save_surface(const Surface& surface, const std::filesystem::path& path) {
  if (has_extension(path, ".json"))
    save_surface_json(surface, path);
  else
    save_surface_csv(surface, path);
}

RegressionDataset load_dataset(const std::filesystem::path& path) {
  const ordered_json j = parse_json_file(path);
  RegressionDataset data;
  for (const auto& s : j.value("samples", ordered_json::array())) {
    CavitySample sample;
    sample.s = s.at("s").get<double>();
    sample.d = s.at("d").get<double>();
    sample.cavity_id = s.value("cavity_id", 0);
    sample.point_index = s.value("point_index", 0);
    data.samples.push_back(sample);
  }
  data.split.assign(data.samples.size(), Split::train);
  if (j.contains("splits")) {
    const auto& splits = j.at("splits");
    auto apply = [&](const char* name, Split which) {
      for (const auto& idx : splits.value(name, ordered_json::array())) {
        const std::size_t i = idx.get<std::size_t>();
        if (i >= data.samples.size())
          throw ParseError(path.string() + ": split index out of range");
        data.split[i] = which;
      }
    };
    apply("train", Split::train);
    apply("val", Split::val);
    apply("test", Split::test);
  }
  return data;
}

void save_dataset(const RegressionDataset& data, const std::filesystem::path& path) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  ordered_json samples = ordered_json::array();
  for (const CavitySample& s : data.samples) {
    ordered_json item;
    item["s"] = s.s;
    item["d"] = s.d;
    item["cavity_id"] = s.cavity_id;
    item["point_index"] = s.point_index;
    samples.push_back(std::move(item));
  }
  j["samples"] = std::move(samples);
  ordered_json splits;
  splits["train"] = ordered_json::array();
  splits["val"] = ordered_json::array();
  splits["test"] = ordered_json::array();
  for (std::size_t i = 0; i < data.split.size(); ++i) {
    switch (data.split[i]) {
      case Split::train: splits["train"].push_back(i); break;
      case Split::val: splits["val"].push_back(i); break;
      case Split::test: splits["test"].push_back(i); break;
    }
  }
  j["splits"] = std::move(splits);
  j["provenance"] = ordered_json::object();
  write_json_file(j, path);
}

SlpModel load_model(const std::filesystem::path& path, ModelMeta* meta) {
  const ordered_json j = parse_json_file(path);
  SlpModel m;
  try {
    m.w1 = j.at("w1").get<double>();
    m.b1 = j.at("b1").get<double>();
    m.w2 = j.at("w2").get<double>();
    m.b2 = j.at("b2").get<double>();
    m.input_transform = MinMaxTransform{j.at("tx").at("in_min").get<double>(),
                                        j.at("tx").at("in_max").get<double>(), -1.0, 1.0};
    m.output_transform = MinMaxTransform{-1.0, 1.0, j.at("ty").at("out_min").get<double>(),
                                         j.at("ty").at("out_max").get<double>()};
    m.clamp_max_s = j.at("clamp_max_s").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!m.input_transform.valid() || !m.output_transform.valid())
    throw ParseError(path.string() + ": degenerate min-max transform");
  if (m.clamp_max_s != m.input_transform.in_max)
    throw ParseError(path.string() + ": clamp_max_s must equal tx.in_max");
  if (meta && j.contains("meta")) {
    meta->seed = j.at("meta").value("seed", 0ULL);
    meta->rmse = j.at("meta").value("rmse", 0.0);
    meta->mae = j.at("meta").value("mae", 0.0);
  }
  return m;
}

void save_model(const SlpModel& model, const ModelMeta& meta,
                const std::filesystem::path& path) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["w1"] = model.w1;
  j["b1"] = model.b1;
  j["w2"] = model.w2;
  j["b2"] = model.b2;
  j["tx"] = {{"in_min", model.input_transform.in_min}, {"in_max", model.input_transform.in_max}};
  j["ty"] = {{"out_min", model.output_transform.out_min},
             {"out_max", model.output_transform.out_max}};
  j["clamp_max_s"] = model.clamp_max_s;
  j["meta"] = {{"seed", meta.seed}, {"rmse", meta.rmse}, {"mae", meta.mae}};
  write_json_file(j, path);
}

IkConstraints load_constraints(const std::filesystem::path& path) {
  const ordered_json j = parse_json_file(path);
  IkConstraints con;
  con.plane_z = j.at("plane_z").get<double>();
  con.center_lo = vec3_from(j.at("center_lo"), "center_lo");
  con.center_hi = vec3_from(j.at("center_hi"), "center_hi");
  con.direction_lo = vec3_from(j.at("direction_lo"), "direction_lo");
  con.direction_hi = vec3_from(j.at("direction_hi"), "direction_hi");
  con.validate();
  return con;
}

void save_constraints(const IkConstraints& con, const std::filesystem::path& path) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["plane_z"] = con.plane_z;
  j["center_lo"] = vec3_json(con.center_lo);
  j["center_hi"] = vec3_json(con.center_hi);
  j["direction_lo"] = vec3_json(con.direction_lo);
  j["direction_hi"] = vec3_json(con.direction_hi);
  write_json_file(j, path);
}

BeamProfile load_beam_profile(const std::filesystem::path& path) {
  const ordered_json j = parse_json_file(path);
  BeamProfile profile;
  const std::string kind = j.value("kind", "gaussian");
  if (kind == "gaussian")
    profile.kind = BeamProfile::Kind::gaussian;
  else if (kind == "skewed")
    profile.kind = BeamProfile::Kind::skewed;
  else
    throw ParseError(path.string() + ": unknown profile kind '" + kind + "'");
  profile.amplitude = j.at("amplitude_mm").get<double>();
  profile.sigma = j.at("sigma_mm").get<double>();
  if (!(profile.amplitude > 0.0) || !(profile.sigma > 0.0))
    throw ParseError(path.string() + ": amplitude and sigma must be positive");
  return profile;
}

void save_beam_profile(const BeamProfile& profile, const std::filesystem::path& path) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = profile.kind == BeamProfile::Kind::gaussian ? "gaussian" : "skewed";
  j["amplitude_mm"] = profile.amplitude;
  j["sigma_mm"] = profile.sigma;
  write_json_file(j, path);
}

namespace {

std::vector<std::array<double, 2>> angle_pairs(const ordered_json& j, const char* list_key,
                                               const char* grid_key) {
  std::vector<std::array<double, 2>> pairs;
  if (j.contains(list_key)) {
    for (const auto& p : j.at(list_key)) {
      if (!p.is_array() || p.size() != 2)
        throw ParseError(std::string(list_key) + " entries must be [theta_x, theta_y]");
      pairs.push_back({p[0].get<double>(), p[1].get<double>()});
    }
  } else if (j.contains(grid_key)) {
    const auto& g = j.at(grid_key);
    const double lo = g.at("min").get<double>();
    const double hi = g.at("max").get<double>();
    const double step = g.at("step").get<double>();
    if (!(step > 0.0) || hi < lo) throw ParseError(std::string(grid_key) + " is malformed");
    for (double ax = lo; ax <= hi + 1e-9; ax += step)
      for (double ay = lo; ay <= hi + 1e-9; ay += step) pairs.push_back({ax, ay});
  }
  return pairs;
}

}  // namespace

ExperimentSpec load_experiment_spec(const std::filesystem::path& path) {
  const ordered_json j = parse_json_file(path);
  ExperimentSpec spec;
  spec.plan.gt_angles_deg = angle_pairs(j, "gt_angles_deg", "gt_angle_grid_deg");
  spec.plan.init_angles_deg = angle_pairs(j, "init_angles_deg", "init_angle_grid_deg");
  if (spec.plan.gt_angles_deg.empty() || spec.plan.init_angles_deg.empty())
    throw ParseError(path.string() + ": plan needs gt and init angle grids");
  spec.plan.position_noise_bound = j.value("position_noise_bound_mm", 0.5);
  spec.plan.seed = j.value("seed", 0ULL);
  spec.standoff = j.value("standoff_mm", 1.0);
  if (j.contains("surface")) {
    spec.surface_half_extent = j.at("surface").value("half_extent_mm", 1.0);
    spec.surface_spacing = j.at("surface").value("spacing_mm", 0.1);
  }
  if (j.contains("training")) {
    const auto& t = j.at("training");
    spec.training_cavities = t.value("cavities", 6);
    spec.training_samples_per_cavity = t.value("samples_per_cavity", 660);
    spec.training_half_extent = t.value("half_extent_mm", 1.2);
    spec.training_noise_sigma = t.value("noise_sigma_mm", 0.0);
  }
  if (j.contains("constraints")) {
    const auto& c = j.at("constraints");
    spec.constraints.plane_z = c.value("plane_z", 0.0);
    if (c.contains("center_lo")) spec.constraints.center_lo = vec3_from(c.at("center_lo"), "center_lo");
    if (c.contains("center_hi")) spec.constraints.center_hi = vec3_from(c.at("center_hi"), "center_hi");
    if (c.contains("direction_lo"))
      spec.constraints.direction_lo = vec3_from(c.at("direction_lo"), "direction_lo");
    if (c.contains("direction_hi"))
      spec.constraints.direction_hi = vec3_from(c.at("direction_hi"), "direction_hi");
    spec.constraints.validate();
  }
  return spec;
}

void save_experiment_spec(const ExperimentSpec& spec, const std::filesystem::path& path) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  ordered_json gt = ordered_json::array();
  for (const auto& p : spec.plan.gt_angles_deg) gt.push_back({p[0], p[1]});
  ordered_json init = ordered_json::array();
  for (const auto& p : spec.plan.init_angles_deg) init.push_back({p[0], p[1]});
  j["gt_angles_deg"] = std::move(gt);
  j["init_angles_deg"] = std::move(init);
  j["position_noise_bound_mm"] = spec.plan.position_noise_bound;
  j["seed"] = spec.plan.seed;
  j["standoff_mm"] = spec.standoff;
  j["surface"] = {{"half_extent_mm", spec.surface_half_extent},
                  {"spacing_mm", spec.surface_spacing}};
  j["training"] = {{"cavities", spec.training_cavities},
                   {"samples_per_cavity", spec.training_samples_per_cavity},
                   {"half_extent_mm", spec.training_half_extent},
                   {"noise_sigma_mm", spec.training_noise_sigma}};
  j["constraints"] = {{"plane_z", spec.constraints.plane_z},
                      {"center_lo", vec3_json(spec.constraints.center_lo)},
                      {"center_hi", vec3_json(spec.constraints.center_hi)},
                      {"direction_lo", vec3_json(spec.constraints.direction_lo)},
                      {"direction_hi", vec3_json(spec.constraints.direction_hi)}};
  write_json_file(j, path);
}

std::string volumetric_report_to_json(const VolumetricReport& report, const RoiGrid& grid) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["v_predict"] = report.v_predict;
  j["v_gt"] = report.v_gt;
  j["v_overlap"] = report.v_overlap;
  if (report.gt_volume_zero) {
    j["over_cut_ratio"] = nullptr;
    j["under_cut_ratio"] = nullptr;
  } else {
    j["over_cut_ratio"] = report.over_cut_ratio;
    j["under_cut_ratio"] = report.under_cut_ratio;
  }
  j["iou"] = report.iou;
  j["gt_volume_zero"] = report.gt_volume_zero;
  j["grid"] = {{"radius_mm", grid.radius},
               {"resolution_cells_per_mm", grid.resolution},
               {"cell_count", grid.samples.size()},
               {"origin", vec3_json(grid.plane.origin)},
               {"normal", vec3_json(grid.plane.normal.vec())}};
  return j.dump(2);
}

std::string fit_report_to_json(const FitReport& report, std::uint64_t seed) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["rmse"] = report.rmse;
  j["mae"] = report.mae;
  j["epochs_used"] = report.epochs_used;
  j["converged"] = report.converged;
  j["losses"] = {{"train_mse", report.train_mse},
                 {"val_mse", report.val_mse},
                 {"test_mse", report.test_mse}};
  j["seed"] = seed;
  return j.dump(2);
}

std::string plan_solution_to_json(const PlanSolution& solution) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["config"] = {{"center", vec3_json(solution.config.center)},
                 {"direction", vec3_json(solution.config.direction.vec())}};
  j["total_cost"] = solution.total_cost;
  j["per_point_costs"] = solution.per_point_costs;
  j["converged"] = solution.converged;
  j["iterations"] = solution.iterations;
  j["kkt_residual"] = solution.kkt_residual;
  return j.dump(2);
}

std::string success_report_to_json(const SuccessReport& report, std::uint64_t seed) {
  std::size_t successes = 0;
  for (const CaseRecord& rec : report.cases)
    if (rec.success) ++successes;
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["rate_percent"] = report.rate_percent;
  j["n_cases"] = report.cases.size();
  j["n_success"] = successes;
  j["seed"] = seed;
  return j.dump(2);
}

void save_case_records_csv(const SuccessReport& report, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  out << "case_id,gt_cx,gt_cy,gt_cz,gt_vx,gt_vy,gt_vz,"
         "init_cx,init_cy,init_cz,init_vx,init_vy,init_vz,"
         "final_cx,final_cy,final_cz,final_vx,final_vy,final_vz,"
         "cost,iterations,success,status\n";
  auto put_cfg = [&](const LaserConfig& cfg) {
    out << format_mm(cfg.center.x()) << ',' << format_mm(cfg.center.y()) << ','
        << format_mm(cfg.center.z()) << ',' << format_mm(cfg.direction.x()) << ','
        << format_mm(cfg.direction.y()) << ',' << format_mm(cfg.direction.z()) << ',';
  };
  for (const CaseRecord& rec : report.cases) {
    out << rec.case_id << ',';
    put_cfg(rec.gt);
    put_cfg(rec.init);
    put_cfg(rec.final);
    out << format_mm(rec.cost) << ',' << rec.iterations << ',' << (rec.success ? 1 : 0) << ','
        << rec.status << '\n';
  }
}

LocalSurfaceFrame load_frame(const std::filesystem::path& path) {
  const ordered_json j = parse_json_file(path);
  LocalSurfaceFrame frame;
  frame.center = vec3_from(j.at("center"), "center");
  frame.normal = UnitVec3(vec3_from(j.at("normal"), "normal"));
  return frame;
}

void save_frame(const LocalSurfaceFrame& frame, const std::filesystem::path& path) {
  ordered_json j;
  j["schema_version"] = kSchemaVersion;
  j["center"] = vec3_json(frame.center);
  j["normal"] = vec3_json(frame.normal.vec());
  write_json_file(j, path);
}

LocalSurfaceFrame fit_local_frame(const Surface& surface,
                                  const std::optional<ExclusionDisc>& exclude_roi) {
  std::vector<Point3> used;
  used.reserve(surface.size());
  for (const Point3& p : surface) {
    if (exclude_roi) {
      const Eigen::Vector3d& a = exclude_roi->axis.vec();
      const Eigen::Vector3d rel = p - exclude_roi->center;
      const double radial = (rel - rel.dot(a) * a).norm();
      if (radial < exclude_roi->radius) continue;
    }
    used.push_back(p);
  }
  if (used.size() < 3) throw DegenerateGeometry("plane fit needs at least 3 points");

  Point3 centroid = Point3::Zero();
  for (const Point3& p : used) centroid += p;
  centroid /= static_cast<double>(used.size());

  Eigen::Matrix3d scatter = Eigen::Matrix3d::Zero();
  for (const Point3& p : used) {
    const Eigen::Vector3d d = p - centroid;
    scatter.noalias() += d * d.transpose();
  }

  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(scatter);
  // Eigenvalues ascending: [0] is the plane-normal direction, [1] must carry
  // real spread or the points are collinear.
  const double spread = eig.eigenvalues()(2);
  if (eig.eigenvalues()(1) <= 1e-12 * std::max(spread, 1.0))
    throw DegenerateGeometry("points are collinear; plane is not determined");

  Eigen::Vector3d normal = eig.eigenvectors().col(0);
  if (normal.z() < 0.0 || (normal.z() == 0.0 && (normal.y() < 0.0 ||
                                                 (normal.y() == 0.0 && normal.x() < 0.0))))
    normal = -normal;

  return LocalSurfaceFrame{centroid, UnitVec3(normal)};
}

std::vector<CavitySample> extract_regression_tuples(const Surface& cavity,
                                                    const LocalSurfaceFrame& frame,
                                                    const LaserConfig& cfg, double standoff,
                                                    int cavity_id) {
  const IncidentPlane plane = incident_plane(cfg, standoff);
  std::vector<CavitySample> tuples;
  tuples.reserve(cavity.size());
  for (std::size_t k = 0; k < cavity.size(); ++k) {
    CavitySample sample;
    sample.s = distance_to_laser_center(cavity.points[k], plane);
    sample.d = depth_of_cut_measured(cavity.points[k], frame, cfg.direction);
    sample.cavity_id = cavity_id;
    sample.point_index = static_cast<int>(k);
    tuples.push_back(sample);
  }
  return tuples;
}

}  // namespace cavitykin
