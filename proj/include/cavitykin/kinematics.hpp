#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>

#include "cavitykin/geometry.hpp"
#include "cavitykin/slp.hpp"

namespace cavitykin {

// Feasible set for the incident configuration: the center is pinned to the
// horizontal plane z = plane_z (handled by variable elimination), and both
// the center and the raw direction components live in axis-aligned boxes.
struct IkConstraints {
  double plane_z = 0.0;
  Eigen::Vector3d center_lo{-5.0, -5.0, -5.0};
  Eigen::Vector3d center_hi{5.0, 5.0, 5.0};
  Eigen::Vector3d direction_lo{-1.0, -1.0, -1.0};
  Eigen::Vector3d direction_hi{1.0, 1.0, 1.0};

  // Throws InfeasibleStart when a box is empty or the equality plane lies
  // outside the center box.
  void validate() const;
  bool contains(const LaserConfig& cfg, double tol = 1e-12) const;
};

struct SolverOpts {
  double kkt_tol = 1e-9;
  int max_iterations = 300;
  int restarts = 0;  // extra seeded starts (planner)
  std::uint64_t seed = 0;
};

struct IkSolution {
  LaserConfig config;
  double final_cost = 0.0;
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
};

// Predicted post-ablation position of a single pre-ablation point.
Point3 fk_point(const LaserConfig& cfg, const SlpModel& model, const Point3& p,
                double standoff = 1.0);

// Element-wise fk_point; correspondence indices are preserved.
Surface fk_surface(const LaserConfig& cfg, const SlpModel& model, const Surface& pre,
                   double standoff = 1.0);

// Squared distance between the predicted position of p and the target.
double ik_cost(const LaserConfig& cfg, const SlpModel& model, const Point3& p,
               const Point3& target, double standoff = 1.0);

struct IkGradient {
  Eigen::Vector3d center{0.0, 0.0, 0.0};
  Eigen::Vector3d direction{0.0, 0.0, 0.0};
  // Set when the point projects exactly onto the laser origin; the radial
  // sub-gradient is zeroed there.
  bool singular = false;

  Eigen::Matrix<double, 6, 1> stacked() const {
    Eigen::Matrix<double, 6, 1> g;
    g << center, direction;
    return g;
  }
};

// Cost and gradient with the direction treated as a free (not necessarily
// unit) vector, the form consumed by the constrained solver and by
// finite-difference checks. ik_cost/ik_cost_gradient are these functions
// evaluated on the unit direction stored in LaserConfig.
double ik_cost_raw(const Point3& center, const Eigen::Vector3d& direction,
                   const SlpModel& model, const Point3& p, const Point3& target,
                   double standoff = 1.0);
IkGradient ik_cost_gradient_raw(const Point3& center, const Eigen::Vector3d& direction,
                                const SlpModel& model, const Point3& p, const Point3& target,
                                double standoff = 1.0);

IkGradient ik_cost_gradient(const LaserConfig& cfg, const SlpModel& model, const Point3& p,
                            const Point3& target, double standoff = 1.0);

// Constrained local minimization of ik_cost for one point/target pair.
IkSolution ik_solve(const SlpModel& model, const Point3& p, const Point3& target,
                    const IkConstraints& constraints, const LaserConfig& init,
                    const SolverOpts& opts = {}, double standoff = 1.0);

namespace detail {

struct EngineResult {
  Point3 center{0.0, 0.0, 0.0};
  Eigen::Vector3d direction{0.0, 0.0, -1.0};  // raw optimizer variable
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
};

// Shared damped Gauss-Newton engine over stacked point-to-target residuals.
// The center z-coordinate is eliminated at constraints.plane_z; steps are
// projected onto the boxes and accepted on cost decrease. Convergence is a
// projected-gradient (first-order KKT) residual below opts.kkt_tol.
EngineResult solve_alignment(const SlpModel& model, std::span<const Point3> pre,
                             std::span<const Point3> target, const IkConstraints& constraints,
                             const LaserConfig& init, const SolverOpts& opts, double standoff);

}  // namespace detail

}  // namespace cavitykin
