// Command-line surface for the cavity prediction and planning pipeline.
//
// Exit codes: 0 success, 1 input/configuration error, 2 numerical
// non-convergence (artifacts are still written). Machine-readable output
// goes to stdout; diagnostics go to stderr.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "cavitykin/dataio.hpp"

namespace fs = std::filesystem;
using namespace cavitykin;

namespace {

bool log_enabled() {
  static const bool enabled = [] {
    const char* v = std::getenv("CAVITYKIN_LOG");
    return v != nullptr && std::string(v) != "" && std::string(v) != "0";
  }();
  return enabled;
}

void diag(const std::string& msg) {
  if (log_enabled()) std::cerr << "[cavitykin] " << msg << "\n";
}

LaserConfig parse_config_literal(const std::string& literal, bool* was_normalized = nullptr) {
  std::istringstream in(literal);
  double v[6];
  std::string field;
  for (int i = 0; i < 6; ++i) {
    if (!std::getline(in, field, ','))
      throw ParseError("config literal needs 6 comma-separated numbers: cx,cy,cz,vx,vy,vz");
    try {
      v[i] = std::stod(field);
    } catch (const std::exception&) {
      throw ParseError("bad number '" + field + "' in config literal");
    }
  }
  const Eigen::Vector3d dir_raw(v[3], v[4], v[5]);
  if (was_normalized) *was_normalized = std::abs(dir_raw.norm() - 1.0) > 1e-9;
  return LaserConfig{Point3(v[0], v[1], v[2]), UnitVec3(dir_raw)};
}

struct GlobalOpts {
  std::uint64_t seed = 0;
  std::string output_dir;
  std::string format = "csv";
};

fs::path resolve_out(const GlobalOpts& g, const fs::path& path) {
  if (!g.output_dir.empty() && path.is_relative()) {
    fs::create_directories(g.output_dir);
    return fs::path(g.output_dir) / path;
  }
  return path;
}

int cmd_fit(const GlobalOpts& g, const std::string& dataset_path, const std::string& out_path,
            int restarts) {
  RegressionDataset data = load_dataset(dataset_path);
  if (data.samples.empty()) throw DegenerateData("dataset has no samples");

  FitConfig cfg;
  cfg.seed = g.seed;
  cfg.restarts = restarts;
  diag("fitting on " + std::to_string(data.samples.size()) + " samples");
  const FitResult result = fit_slp(data, cfg);

  save_model(result.model, ModelMeta{g.seed, result.report.rmse, result.report.mae},
             resolve_out(g, out_path));
  std::cout << fit_report_to_json(result.report, g.seed) << "\n";
  if (!result.report.converged) {
    std::cerr << "fit did not converge within the iteration budget\n";
    return 2;
  }
  return 0;
}

int cmd_predict(const GlobalOpts& g, const std::string& model_path,
                const std::string& surface_path, const std::string& config_literal,
                const std::string& out_path, double standoff) {
  const SlpModel model = load_model(model_path);
  const Surface pre = load_surface(surface_path);
  bool normalized = false;
  const LaserConfig cfg = parse_config_literal(config_literal, &normalized);
  if (normalized) std::cerr << "warning: direction was not unit length; normalized\n";

  const Surface post = fk_surface(cfg, model, pre, standoff);
  fs::path out = resolve_out(g, out_path);
  if (!out.has_extension()) out += g.format == "json" ? ".json" : ".csv";
  save_surface(post, out);
  diag("predicted surface written to " + out.string());
  return 0;
}

int cmd_plan(const GlobalOpts& g, const std::string& model_path, const std::string& pre_path,
             const std::string& target_path, const std::string& constraints_path,
             const std::string& init_literal, int restarts, double standoff,
             const std::string& out_path) {
  PlanProblem problem;
  problem.model = load_model(model_path);
  problem.pre_surface = load_surface(pre_path);
  problem.target_surface = load_surface(target_path);
  problem.constraints = load_constraints(constraints_path);
  problem.standoff = standoff;

  bool normalized = false;
  const LaserConfig init = parse_config_literal(init_literal, &normalized);
  if (normalized) std::cerr << "warning: init direction was not unit length; normalized\n";

  SolverOpts opts;
  opts.seed = g.seed;
  opts.restarts = restarts;
  const PlanSolution sol = plan_solve(problem, init, opts);

  const std::string json = plan_solution_to_json(sol);
  std::cout << json << "\n";
  if (!out_path.empty()) {
    std::ofstream out(resolve_out(g, out_path));
    out << json << "\n";
  }
  return sol.converged ? 0 : 2;
}

int cmd_evaluate(const GlobalOpts& g, const std::string& model_path,
                 const std::string& config_literal, const std::string& gt_surface_path,
                 const std::string& frame_spec, double radius, double resolution,
                 double standoff, const std::string& out_cells) {
  const SlpModel model = load_model(model_path);
  bool normalized = false;
  const LaserConfig cfg = parse_config_literal(config_literal, &normalized);
  if (normalized) std::cerr << "warning: direction was not unit length; normalized\n";

  const Surface gt_surface = load_surface(gt_surface_path);
  const LocalSurfaceFrame frame =
      frame_spec == "auto"
          ? fit_local_frame(gt_surface, ExclusionDisc{cfg.center, cfg.direction, radius})
          : load_frame(frame_spec);

  const RoiGrid grid = sample_roi(incident_plane(cfg, standoff), radius, resolution);
  const DepthField predicted = depth_field_predicted(model, grid);
  const DepthField gt = depth_field_measured(gt_surface, frame, grid);
  const VolumetricReport report = compare_cavities(predicted, gt, grid);

  std::cout << volumetric_report_to_json(report, grid) << "\n";

  if (!out_cells.empty()) {
    std::ofstream out(resolve_out(g, out_cells));
    out << "x,y,depth_predicted,depth_gt\n";
    char buf[160];
    for (std::size_t i = 0; i < grid.samples.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g\n", grid.samples[i].x,
                    grid.samples[i].y, predicted.values[i], gt.values[i]);
      out << buf;
    }
  }

  if (report.gt_volume_zero) {
    std::cerr << "ground-truth cavity volume is zero; ratios undefined\n";
    return 1;
  }
  return 0;
}

int cmd_simulate(const GlobalOpts& g, const std::string& plan_path,
                 const std::string& profile_path, int workers, const std::string& out_cases,
                 const std::string& out_summary) {
  const ExperimentSpec spec = load_experiment_spec(plan_path);
  const BeamProfile profile = load_beam_profile(profile_path);

  diag("fitting model for the sweep");
  const RegressionDataset data = make_training_dataset(
      profile, spec.training_cavities, spec.training_samples_per_cavity,
      spec.training_half_extent, spec.training_noise_sigma, spec.plan.seed);
  FitConfig fit_cfg;
  fit_cfg.seed = spec.plan.seed;
  const FitResult fit = fit_slp(data, fit_cfg);

  diag("running " + std::to_string(spec.plan.gt_angles_deg.size() *
                                   spec.plan.init_angles_deg.size()) +
       " cases on " + std::to_string(workers) + " worker(s)");
  const SuccessReport report = run_planning_experiment(
      spec.plan, profile, fit.model, spec.constraints, spec.surface_half_extent,
      spec.surface_spacing, spec.standoff, workers);

  const std::string json = success_report_to_json(report, spec.plan.seed);
  std::cout << json << "\n";
  save_case_records_csv(report, resolve_out(g, out_cases));
  if (!out_summary.empty()) {
    std::ofstream out(resolve_out(g, out_summary));
    out << json << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cavitykin: one-shot laser ablation cavity prediction and planning"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOpts g;
  app.add_option("--seed", g.seed, "seed for all randomized steps (default 0)");
  app.add_option("--output-dir", g.output_dir, "directory for relative output paths");
  app.add_option("--format", g.format, "default output format (json|csv)")
      ->check(CLI::IsMember({"json", "csv"}));

  auto* fit = app.add_subcommand("fit", "fit a depth model on a regression dataset");
  std::string fit_dataset, fit_out;
  int fit_restarts = 8;
  fit->add_option("--dataset", fit_dataset, "dataset JSON path")->required();
  fit->add_option("--out", fit_out, "output model JSON path")->required();
  fit->add_option("--restarts", fit_restarts, "random restarts (default 8)");

  auto* predict = app.add_subcommand("predict", "predict a post-ablation surface");
  std::string pr_model, pr_surface, pr_config, pr_out;
  double pr_standoff = 1.0;
  predict->add_option("--model", pr_model)->required();
  predict->add_option("--surface", pr_surface, "pre-ablation surface (csv|json)")->required();
  predict->add_option("--config", pr_config, "incident configuration cx,cy,cz,vx,vy,vz")
      ->required();
  predict->add_option("--out", pr_out)->required();
  predict->add_option("--standoff", pr_standoff, "laser origin standoff, mm (default 1)");

  auto* plan = app.add_subcommand("plan", "solve the surface-alignment planning problem");
  std::string pl_model, pl_pre, pl_target, pl_constraints, pl_init, pl_out;
  int pl_restarts = 0;
  double pl_standoff = 1.0;
  plan->add_option("--model", pl_model)->required();
  plan->add_option("--pre", pl_pre, "pre-ablation surface")->required();
  plan->add_option("--target", pl_target, "target surface (row-matched)")->required();
  plan->add_option("--constraints", pl_constraints, "constraints JSON")->required();
  plan->add_option("--init", pl_init, "initial configuration cx,cy,cz,vx,vy,vz")->required();
  plan->add_option("--restarts", pl_restarts, "extra seeded starts (default 0)");
  plan->add_option("--standoff", pl_standoff);
  plan->add_option("--out", pl_out, "also write the solution JSON here");

  auto* evaluate = app.add_subcommand("evaluate", "volumetric comparison against a measured cavity");
  std::string ev_model, ev_config, ev_gt, ev_frame = "auto", ev_cells;
  double ev_radius = 1.0, ev_resolution = 64.0, ev_standoff = 1.0;
  evaluate->add_option("--model", ev_model)->required();
  evaluate->add_option("--config", ev_config, "incident configuration cx,cy,cz,vx,vy,vz")
      ->required();
  evaluate->add_option("--gt-surface", ev_gt, "measured cavity surface")->required();
  evaluate->add_option("--frame", ev_frame, "'auto' or a frame JSON path");
  evaluate->add_option("--radius", ev_radius, "ROI radius, mm (default 1.0)");
  evaluate->add_option("--resolution", ev_resolution, "grid cells per mm (default 64)");
  evaluate->add_option("--standoff", ev_standoff);
  evaluate->add_option("--out-cells", ev_cells, "per-cell depth CSV for plotting");

  auto* simulate = app.add_subcommand("simulate", "run a seeded planning experiment sweep");
  std::string sim_plan, sim_profile, sim_cases = "cases.csv", sim_summary;
  int sim_workers = 1;
  simulate->add_option("--plan", sim_plan, "experiment plan JSON")->required();
  simulate->add_option("--profile", sim_profile, "beam profile JSON")->required();
  simulate->add_option("--workers", sim_workers, "worker threads (default 1)")
      ->check(CLI::PositiveNumber);
  simulate->add_option("--out-cases", sim_cases, "per-case CSV path (default cases.csv)");
  simulate->add_option("--out-summary", sim_summary, "also write the summary JSON here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fit) return cmd_fit(g, fit_dataset, fit_out, fit_restarts);
    if (*predict) return cmd_predict(g, pr_model, pr_surface, pr_config, pr_out, pr_standoff);
    if (*plan)
      return cmd_plan(g, pl_model, pl_pre, pl_target, pl_constraints, pl_init, pl_restarts,
                      pl_standoff, pl_out);
    if (*evaluate)
      return cmd_evaluate(g, ev_model, ev_config, ev_gt, ev_frame, ev_radius, ev_resolution,
                          ev_standoff, ev_cells);
    if (*simulate)
      return cmd_simulate(g, sim_plan, sim_profile, sim_workers, sim_cases, sim_summary);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
