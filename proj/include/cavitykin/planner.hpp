#pragma once

#include <vector>

#include "cavitykin/kinematics.hpp"

namespace cavitykin {

// One-shot surface-alignment problem: drive every pre-ablation point onto
// its index-matched target with a single incident configuration.
struct PlanProblem {
  Surface pre_surface;
  Surface target_surface;
  SlpModel model;
  IkConstraints constraints;
  double standoff = 1.0;
};

struct PlanCost {
  double total = 0.0;
  std::vector<double> per_point;
};

struct PlanSolution {
  LaserConfig config;
  double total_cost = 0.0;
  std::vector<double> per_point_costs;
  bool converged = false;
  int iterations = 0;
  double kkt_residual = 0.0;
};

PlanCost plan_cost(const PlanProblem& problem, const LaserConfig& cfg);

// Sum of the per-point cost gradients, accumulated in index order.
IkGradient plan_gradient(const PlanProblem& problem, const LaserConfig& cfg);

PlanSolution plan_solve(const PlanProblem& problem, const LaserConfig& init,
                        const SolverOpts& opts = {});

}  // namespace cavitykin
