#include "cavitykin/synth.hpp"

#include <atomic>
#include <cmath>
#include <thread>

#include "cavitykin/random.hpp"

namespace cavitykin {

double BeamProfile::depth(double s) const {
  const double g = amplitude * std::exp(-s * s / (2.0 * sigma * sigma));
  if (kind == Kind::gaussian) return g;
  return g * std::max(0.0, 1.0 - s / (3.0 * sigma));
}

Surface make_planar_grid(double half_extent, double spacing, double z) {
  Surface s;
  const int half = static_cast<int>(std::round(half_extent / spacing));
  s.points.reserve(static_cast<std::size_t>(2 * half + 1) * (2 * half + 1));
  for (int i = -half; i <= half; ++i)
    for (int j = -half; j <= half; ++j)
      s.points.emplace_back(i * spacing, j * spacing, z);
  return s;
}

Surface make_random_scatter(double half_extent, int count, std::uint64_t seed, double z) {
  Surface s;
  s.points.reserve(static_cast<std::size_t>(count));
  std::mt19937_64 gen(mix_seed(seed, 0x5ca77e2, static_cast<std::uint64_t>(count)));
  for (int i = 0; i < count; ++i) {
    const double x = uniform_in(gen, -half_extent, half_extent);
    const double y = uniform_in(gen, -half_extent, half_extent);
    s.points.emplace_back(x, y, z);
  }
  return s;
}

GeneratedCavity generate_cavity(const BeamProfile& profile, const LaserConfig& cfg,
                                const Surface& pre_surface, double noise_sigma,
                                std::uint64_t seed, int cavity_id, double standoff) {
  GeneratedCavity out;
  out.post.points.reserve(pre_surface.size());
  out.samples.reserve(pre_surface.size());

  const IncidentPlane plane = incident_plane(cfg, standoff);
  std::mt19937_64 gen(mix_seed(seed, 0xcab17e, static_cast<std::uint64_t>(cavity_id)));

  for (std::size_t k = 0; k < pre_surface.size(); ++k) {
    const Point3& p = pre_surface.points[k];
    const double s = distance_to_laser_center(p, plane);
    double d = profile.depth(s);
    if (noise_sigma > 0.0) d += noise_sigma * normal01(gen);
    d = std::max(d, 0.0);
    out.post.points.push_back(p + d * cfg.direction.vec());
    out.samples.push_back(CavitySample{s, d, cavity_id, static_cast<int>(k)});
  }
  return out;
}

RegressionDataset make_training_dataset(const BeamProfile& profile, int cavities,
                                        int samples_per_cavity, double half_extent,
                                        double noise_sigma, std::uint64_t seed) {
  RegressionDataset data;
  const LaserConfig straight_down{Point3::Zero(), UnitVec3(0.0, 0.0, -1.0)};
  for (int c = 1; c <= cavities; ++c) {
    const Surface pre = make_random_scatter(half_extent, samples_per_cavity,
                                            mix_seed(seed, 0x5caf, c));
    GeneratedCavity cav =
        generate_cavity(profile, straight_down, pre, noise_sigma, mix_seed(seed, 0xca, c), c);
    data.samples.insert(data.samples.end(), cav.samples.begin(), cav.samples.end());
  }
  assign_splits(data, seed);
  return data;
}

ExperimentPlan default_experiment_plan(std::uint64_t seed) {
  ExperimentPlan plan;
  for (int ix = -2; ix <= 2; ++ix)
    for (int iy = -2; iy <= 2; ++iy)
      plan.gt_angles_deg.push_back({15.0 * ix, 15.0 * iy});
  for (int ix = -1; ix <= 1; ++ix)
    for (int iy = -1; iy <= 1; ++iy)
      plan.init_angles_deg.push_back({15.0 * ix, 15.0 * iy});
  plan.position_noise_bound = 0.5;
  plan.seed = seed;
  return plan;
}

namespace {

UnitVec3 rotate_xy(const UnitVec3& dir, double theta_x_deg, double theta_y_deg) {
  const double rx = theta_x_deg * M_PI / 180.0;
  const double ry = theta_y_deg * M_PI / 180.0;
  const Eigen::Matrix3d rot =
      (Eigen::AngleAxisd(rx, Eigen::Vector3d::UnitX()) *
       Eigen::AngleAxisd(ry, Eigen::Vector3d::UnitY()))
          .toRotationMatrix();
  return UnitVec3(rot * dir.vec());
}

}  // namespace

std::vector<GtWithInits> sample_experiment_configs(const ExperimentPlan& plan,
                                                   const UnitVec3& base_direction,
                                                   const Point3& base_center) {
  std::vector<GtWithInits> out;
  out.reserve(plan.gt_angles_deg.size());
  for (std::size_t gi = 0; gi < plan.gt_angles_deg.size(); ++gi) {
    GtWithInits entry;
    entry.gt.center = base_center;
    entry.gt.direction =
        rotate_xy(base_direction, plan.gt_angles_deg[gi][0], plan.gt_angles_deg[gi][1]);
    entry.inits.reserve(plan.init_angles_deg.size());
    for (std::size_t ii = 0; ii < plan.init_angles_deg.size(); ++ii) {
      std::mt19937_64 gen(mix_seed(plan.seed, gi, ii));
      LaserConfig init;
      const double b = plan.position_noise_bound;
      init.center = entry.gt.center +
                    Point3(uniform_in(gen, -b, b), uniform_in(gen, -b, b), 0.0);
      init.direction =
          rotate_xy(entry.gt.direction, plan.init_angles_deg[ii][0], plan.init_angles_deg[ii][1]);
      entry.inits.push_back(init);
    }
    out.push_back(std::move(entry));
  }
  return out;
}

IkConstraints default_box_constraints(double plane_z) {
  IkConstraints con;
  con.plane_z = plane_z;
  con.center_lo = Eigen::Vector3d(-5.0, -5.0, std::min(-5.0, plane_z - 5.0));
  con.center_hi = Eigen::Vector3d(5.0, 5.0, std::max(5.0, plane_z + 5.0));
  con.direction_lo = Eigen::Vector3d(-1.0, -1.0, -1.0);
  con.direction_hi = Eigen::Vector3d(1.0, 1.0, 1.0);
  return con;
}

namespace {

Eigen::Matrix<double, 6, 1> stack_config(const LaserConfig& cfg) {
  Eigen::Matrix<double, 6, 1> x;
  x << cfg.center, cfg.direction.vec();
  return x;
}

}  // namespace

SuccessReport run_planning_experiment(const ExperimentPlan& plan, const BeamProfile& profile,
                                      const SlpModel& model, const IkConstraints& constraints,
                                      double surface_half_extent, double surface_spacing,
                                      double standoff, int workers) {
  (void)profile;  // targets come from the model fitted to this profile
  const Point3 base_center = Point3::Zero();
  const UnitVec3 base_direction(0.0, 0.0, -1.0);
  const Surface pre = make_planar_grid(surface_half_extent, surface_spacing, base_center.z());

  const std::vector<GtWithInits> configs =
      sample_experiment_configs(plan, base_direction, base_center);

  struct Case {
    const LaserConfig* gt;
    const LaserConfig* init;
  };
  std::vector<Case> flat;
  for (const GtWithInits& entry : configs)
    for (const LaserConfig& init : entry.inits) flat.push_back(Case{&entry.gt, &init});

  SuccessReport report;
  report.cases.resize(flat.size());

  auto run_case = [&](std::size_t idx) {
    CaseRecord rec;
    rec.case_id = static_cast<int>(idx);
    rec.gt = *flat[idx].gt;
    rec.init = *flat[idx].init;
    try {
      PlanProblem problem;
      problem.pre_surface = pre;
      problem.target_surface = fk_surface(rec.gt, model, pre, standoff);
      problem.model = model;
      problem.constraints = constraints;
      problem.standoff = standoff;

      SolverOpts opts;
      opts.seed = mix_seed(plan.seed, 0xca5e, idx);
      const PlanSolution sol = plan_solve(problem, rec.init, opts);

      rec.final = sol.config;
      rec.cost = sol.total_cost;
      rec.iterations = sol.iterations;
      const double dist = (stack_config(sol.config) - stack_config(rec.gt)).norm();
      rec.success = dist <= kSuccessThreshold;
      if (!constraints.contains(rec.gt))
        rec.status = "infeasible";  // the target configuration is outside the feasible box
      else
        rec.status = sol.converged ? "ok" : "max_iterations";
    } catch (const Error& e) {
      rec.success = false;
      rec.status = std::string("error: ") + e.what();
    }
    report.cases[idx] = std::move(rec);
  };

  if (workers <= 1) {
    for (std::size_t i = 0; i < flat.size(); ++i) run_case(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next.fetch_add(1); i < flat.size(); i = next.fetch_add(1))
          run_case(i);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  std::size_t successes = 0;
  for (const CaseRecord& rec : report.cases)
    if (rec.success) ++successes;
  report.rate_percent = report.cases.empty()
                            ? 0.0
                            : 100.0 * static_cast<double>(successes) /
                                  static_cast<double>(report.cases.size());
  return report;
}

}  // namespace cavitykin
