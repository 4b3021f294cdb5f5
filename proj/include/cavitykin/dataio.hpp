#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "cavitykin/synth.hpp"
#include "cavitykin/volumetrics.hpp"

namespace cavitykin {

// Surfaces persist as CSV ("x,y,z" header, one point per row, mm) or JSON,
// chosen by file extension. Row order is the correspondence index: planner
// inputs pair the k-th row of the pre-ablation file with the k-th row of the
// target file.
Surface load_surface(const std::filesystem::path& path);
void save_surface(const Surface& surface, const std::filesystem::path& path);

RegressionDataset load_dataset(const std::filesystem::path& path);
void save_dataset(const RegressionDataset& data, const std::filesystem::path& path);

struct ModelMeta {
  std::uint64_t seed = 0;
  double rmse = 0.0;
  double mae = 0.0;
};

SlpModel load_model(const std::filesystem::path& path, ModelMeta* meta = nullptr);
void save_model(const SlpModel& model, const ModelMeta& meta,
                const std::filesystem::path& path);

IkConstraints load_constraints(const std::filesystem::path& path);
void save_constraints(const IkConstraints& con, const std::filesystem::path& path);

BeamProfile load_beam_profile(const std::filesystem::path& path);
void save_beam_profile(const BeamProfile& profile, const std::filesystem::path& path);

// Experiment plan file; carries optional "constraints", "surface" and
// "training" blocks consumed by the simulate command.
struct ExperimentSpec {
  ExperimentPlan plan;
  IkConstraints constraints = default_box_constraints(0.0);
  double surface_half_extent = 1.0;
  double surface_spacing = 0.1;
  double standoff = 1.0;
  int training_cavities = 6;
  int training_samples_per_cavity = 660;
  double training_half_extent = 1.2;
  double training_noise_sigma = 0.0;
};

ExperimentSpec load_experiment_spec(const std::filesystem::path& path);
void save_experiment_spec(const ExperimentSpec& spec, const std::filesystem::path& path);

std::string volumetric_report_to_json(const VolumetricReport& report, const RoiGrid& grid);
std::string fit_report_to_json(const FitReport& report, std::uint64_t seed);
std::string plan_solution_to_json(const PlanSolution& solution);
std::string success_report_to_json(const SuccessReport& report, std::uint64_t seed);

void save_case_records_csv(const SuccessReport& report, const std::filesystem::path& path);

// Cylindrical exclusion region used to mask a cavity out of a plane fit.
struct ExclusionDisc {
  Point3 center{0.0, 0.0, 0.0};
  UnitVec3 axis{0.0, 0.0, -1.0};
  double radius = 1.0;
};

LocalSurfaceFrame load_frame(const std::filesystem::path& path);
void save_frame(const LocalSurfaceFrame& frame, const std::filesystem::path& path);

// Total-least-squares plane through the surface points (optionally excluding
// the cavity region), oriented toward positive z. Throws DegenerateGeometry
// for fewer than three usable points or a collinear set.
LocalSurfaceFrame fit_local_frame(const Surface& surface,
                                  const std::optional<ExclusionDisc>& exclude_roi = {});

// Per-point (distance-to-laser-center, depth-of-cut) tuples of a measured
// cavity, in point order.
std::vector<CavitySample> extract_regression_tuples(const Surface& cavity,
                                                    const LocalSurfaceFrame& frame,
                                                    const LaserConfig& cfg,
                                                    double standoff = 1.0, int cavity_id = 0);

}  // namespace cavitykin
