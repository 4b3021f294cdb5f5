#include "cavitykin/planner.hpp"

#include <cmath>

#include "cavitykin/random.hpp"

namespace cavitykin {

namespace {

void check_cardinality(const PlanProblem& problem) {
  if (problem.pre_surface.size() != problem.target_surface.size())
    throw CardinalityMismatch("pre and target surfaces differ in size");
  if (problem.pre_surface.empty())
    throw CardinalityMismatch("plan problem has no points");
}

}  // namespace

PlanCost plan_cost(const PlanProblem& problem, const LaserConfig& cfg) {
  check_cardinality(problem);
  PlanCost out;
  out.per_point.reserve(problem.pre_surface.size());
  for (std::size_t k = 0; k < problem.pre_surface.size(); ++k) {
    const double c = ik_cost(cfg, problem.model, problem.pre_surface.points[k],
                             problem.target_surface.points[k], problem.standoff);
    out.per_point.push_back(c);
    out.total += c;
  }
  return out;
}

IkGradient plan_gradient(const PlanProblem& problem, const LaserConfig& cfg) {
  check_cardinality(problem);
  IkGradient sum;
  for (std::size_t k = 0; k < problem.pre_surface.size(); ++k) {
    const IkGradient g = ik_cost_gradient(cfg, problem.model, problem.pre_surface.points[k],
                                          problem.target_surface.points[k], problem.standoff);
    sum.center += g.center;
    sum.direction += g.direction;
    sum.singular = sum.singular || g.singular;
  }
  return sum;
}

PlanSolution plan_solve(const PlanProblem& problem, const LaserConfig& init,
                        const SolverOpts& opts) {
  check_cardinality(problem);

  std::vector<LaserConfig> starts{init};
  if (opts.restarts > 0) {
    std::mt19937_64 gen(mix_seed(opts.seed, 0x9157a27, problem.pre_surface.size()));
    for (int r = 0; r < opts.restarts; ++r) {
      LaserConfig cand = init;
      cand.center.x() += uniform_in(gen, -0.25, 0.25);
      cand.center.y() += uniform_in(gen, -0.25, 0.25);
      Eigen::Vector3d d = init.direction.vec();
      d.x() += uniform_in(gen, -0.15, 0.15);
      d.y() += uniform_in(gen, -0.15, 0.15);
      cand.direction = UnitVec3(d);
      starts.push_back(cand);
    }
  }

  detail::EngineResult best;
  bool have = false;
  for (const LaserConfig& start : starts) {
    const detail::EngineResult r = detail::solve_alignment(
        problem.model, problem.pre_surface.points, problem.target_surface.points,
        problem.constraints, start, opts, problem.standoff);
    if (!have || r.cost < best.cost) {
      best = r;
      have = true;
    }
  }

  PlanSolution sol;
  sol.config = LaserConfig{best.center, UnitVec3(best.direction)};
  sol.converged = best.converged;
  sol.iterations = best.iterations;
  sol.kkt_residual = best.kkt_residual;

  // Recompute per-point costs at the reported (normalized) configuration so
  // the published total is exactly their sum.
  PlanCost final_cost = plan_cost(problem, sol.config);
  sol.per_point_costs = std::move(final_cost.per_point);
  sol.total_cost = final_cost.total;
  return sol;
}

}  // namespace cavitykin
