#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cavitykin/planner.hpp"

namespace cavitykin {

// Synthetic beam energy profiles standing in for measured cavities. The
// skewed variant multiplies the Gaussian by a linear radial taper (zeroed at
// three sigma) so its depth curve is deliberately non-Gaussian.
struct BeamProfile {
  enum class Kind { gaussian, skewed };

  double amplitude = 0.3;  // peak depth, mm
  double sigma = 0.35;     // mm
  Kind kind = Kind::gaussian;

  double depth(double s) const;
};

Surface make_planar_grid(double half_extent, double spacing, double z = 0.0);
Surface make_random_scatter(double half_extent, int count, std::uint64_t seed, double z = 0.0);

struct GeneratedCavity {
  Surface post;
  std::vector<CavitySample> samples;
};

// Ablate the pre-ablation surface with the profile, with optional additive
// Gaussian depth noise (clamped so depths stay non-negative). The emitted
// samples pair each point's radial distance with its noisy depth.
GeneratedCavity generate_cavity(const BeamProfile& profile, const LaserConfig& cfg,
                                const Surface& pre_surface, double noise_sigma,
                                std::uint64_t seed, int cavity_id = 0, double standoff = 1.0);

// Training corpus in the standard layout: `cavities` cavities of
// `samples_per_cavity` scattered points each, odd cavity ids feeding the
// train/validation pool and even ids held out as the test set.
RegressionDataset make_training_dataset(const BeamProfile& profile, int cavities = 6,
                                        int samples_per_cavity = 660, double half_extent = 1.2,
                                        double noise_sigma = 0.0, std::uint64_t seed = 0);

struct ExperimentPlan {
  std::vector<std::array<double, 2>> gt_angles_deg;    // (theta_x, theta_y) pairs
  std::vector<std::array<double, 2>> init_angles_deg;  // perturbation pairs
  double position_noise_bound = 0.5;                   // mm, uniform in [-b, b]
  std::uint64_t seed = 0;
};

// 25 ground-truth orientations on the +/-30 degree grid, each perturbed by
// the 9-point +/-15 degree grid with +/-0.5 mm position noise.
ExperimentPlan default_experiment_plan(std::uint64_t seed = 0);

struct GtWithInits {
  LaserConfig gt;
  std::vector<LaserConfig> inits;
};

std::vector<GtWithInits> sample_experiment_configs(const ExperimentPlan& plan,
                                                   const UnitVec3& base_direction,
                                                   const Point3& base_center);

IkConstraints default_box_constraints(double plane_z);

struct CaseRecord {
  int case_id = 0;
  LaserConfig gt;
  LaserConfig init;
  LaserConfig final;
  double cost = 0.0;
  int iterations = 0;
  bool success = false;
  std::string status;  // ok | infeasible | max_iterations | error
};

struct SuccessReport {
  double rate_percent = 0.0;
  std::vector<CaseRecord> cases;
};

// Full planning sweep: for every (gt, init) pair, synthesize the target
// cavity with the model's forward map, solve the alignment problem from the
// init, and classify success by ||X_opt - X_gt||_2 <= 1e-5 over the stacked
// 6-dof configuration. Per-case failures are recorded, never thrown. The
// sweep may fan out over `workers` threads; records are keyed by case id so
// the result is identical for any worker count.
SuccessReport run_planning_experiment(const ExperimentPlan& plan, const BeamProfile& profile,
                                      const SlpModel& model, const IkConstraints& constraints,
                                      double surface_half_extent = 1.0,
                                      double surface_spacing = 0.1, double standoff = 1.0,
                                      int workers = 1);

constexpr double kSuccessThreshold = 1e-5;

}  // namespace cavitykin
