#include "cavitykin/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cavitykin {

void IkConstraints::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(center_lo(i) <= center_hi(i)) || !(direction_lo(i) <= direction_hi(i)))
      throw InfeasibleStart("constraint box is empty");
  }
  if (plane_z < center_lo.z() || plane_z > center_hi.z())
    throw InfeasibleStart("equality plane lies outside the center box");
}

bool IkConstraints::contains(const LaserConfig& cfg, double tol) const {
  if (std::abs(cfg.center.z() - plane_z) > tol) return false;
  for (int i = 0; i < 3; ++i) {
    if (cfg.center(i) < center_lo(i) - tol || cfg.center(i) > center_hi(i) + tol) return false;
    if (cfg.direction.vec()(i) < direction_lo(i) - tol ||
        cfg.direction.vec()(i) > direction_hi(i) + tol)
      return false;
  }
  return true;
}

namespace {

// Beam geometry shared by the cost and its derivatives, valid for a raw
// (non-unit) direction. The radial distance s reduces to the distance from
// the surface point to the beam axis, so it is independent of both the
// direction length and the standoff; the derivatives below keep the full
// dependence through the laser origin.
struct BeamEval {
  double s = 0.0;           // radial distance on the incident plane
  Eigen::Vector3d radial{0.0, 0.0, 0.0};  // unit, origin -> projection; zero when s == 0
  double axial = 0.0;       // v.(p - origin) / |v|^2
  bool singular = false;    // s == 0
};

BeamEval eval_beam(const Point3& center, const Eigen::Vector3d& v, const Point3& p,
                   double standoff) {
  const double vv = v.squaredNorm();
  if (vv < 1e-20) throw DegenerateGeometry("direction vector is zero");
  const Point3 origin = center - standoff * v;
  const Eigen::Vector3d w = p - origin;
  const double g = v.dot(w);
  const Eigen::Vector3d rad = w - (g / vv) * v;  // projection - origin
  BeamEval out;
  out.s = rad.norm();
  out.axial = standoff - g / vv;
  if (out.s > 1e-12) {
    out.radial = rad / out.s;
  } else {
    out.singular = true;
  }
  return out;
}

}  // namespace

Point3 fk_point(const LaserConfig& cfg, const SlpModel& model, const Point3& p,
                double standoff) {
  const double s = distance_to_laser_center(p, incident_plane(cfg, standoff));
  return p + slp_forward(model, s) * cfg.direction.vec();
}

Surface fk_surface(const LaserConfig& cfg, const SlpModel& model, const Surface& pre,
                   double standoff) {
  Surface post;
  post.points.reserve(pre.size());
  const IncidentPlane plane = incident_plane(cfg, standoff);
  for (const Point3& p : pre) {
    const double s = distance_to_laser_center(p, plane);
    post.points.push_back(p + slp_forward(model, s) * cfg.direction.vec());
  }
  return post;
}

double ik_cost(const LaserConfig& cfg, const SlpModel& model, const Point3& p,
               const Point3& target, double standoff) {
  return (fk_point(cfg, model, p, standoff) - target).squaredNorm();
}

double ik_cost_raw(const Point3& center, const Eigen::Vector3d& direction,
                   const SlpModel& model, const Point3& p, const Point3& target,
                   double standoff) {
  const BeamEval beam = eval_beam(center, direction, p, standoff);
  const Eigen::Vector3d q = p + slp_forward(model, beam.s) * direction;
  return (q - target).squaredNorm();
}

IkGradient ik_cost_gradient_raw(const Point3& center, const Eigen::Vector3d& direction,
                                const SlpModel& model, const Point3& p, const Point3& target,
                                double standoff) {
  const BeamEval beam = eval_beam(center, direction, p, standoff);
  const double depth = slp_forward(model, beam.s);
  const double slope = slp_input_derivative(model, beam.s);
  const Eigen::Vector3d err2 = 2.0 * (p + depth * direction - target);

  // Chain rule through the depth model: the cost moves along the beam by the
  // depth change, and the radial distance s shrinks when the center moves
  // toward the point's projection (grad_c s = -radial) and changes with the
  // direction through both the plane tilt and the origin shift
  // (grad_v s = axial * radial).
  IkGradient grad;
  grad.singular = beam.singular;
  const double along = err2.dot(direction) * slope;
  if (!beam.singular) {
    grad.center = along * (-beam.radial);
    grad.direction = along * beam.axial * beam.radial;
  }
  grad.direction += depth * err2;
  return grad;
}

IkGradient ik_cost_gradient(const LaserConfig& cfg, const SlpModel& model, const Point3& p,
                            const Point3& target, double standoff) {
  return ik_cost_gradient_raw(cfg.center, cfg.direction.vec(), model, p, target, standoff);
}

namespace detail {

namespace {

using Vec5 = Eigen::Matrix<double, 5, 1>;
using Mat5 = Eigen::Matrix<double, 5, 5>;

struct BoxedProblem {
  const SlpModel& model;
  std::span<const Point3> pre;
  std::span<const Point3> target;
  const IkConstraints& con;
  double standoff;

  Vec5 lo() const {
    Vec5 v;
    v << con.center_lo.x(), con.center_lo.y(), con.direction_lo.x(), con.direction_lo.y(),
        con.direction_lo.z();
    return v;
  }
  Vec5 hi() const {
    Vec5 v;
    v << con.center_hi.x(), con.center_hi.y(), con.direction_hi.x(), con.direction_hi.y(),
        con.direction_hi.z();
    return v;
  }

  Point3 center_of(const Vec5& theta) const { return Point3(theta(0), theta(1), con.plane_z); }
  Eigen::Vector3d direction_of(const Vec5& theta) const {
    return Eigen::Vector3d(theta(2), theta(3), theta(4));
  }

  double cost(const Vec5& theta) const {
    const Point3 c = center_of(theta);
    const Eigen::Vector3d v = direction_of(theta);
    if (v.squaredNorm() < 1e-16) return std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (std::size_t k = 0; k < pre.size(); ++k)
      acc += ik_cost_raw(c, v, model, pre[k], target[k], standoff);
    return acc;
  }

  // Gauss-Newton normal equations and cost in one pass.
  double assemble(const Vec5& theta, Mat5& jtj, Vec5& jtr) const {
    const Point3 c = center_of(theta);
    const Eigen::Vector3d v = direction_of(theta);
    jtj.setZero();
    jtr.setZero();
    double acc = 0.0;
    for (std::size_t k = 0; k < pre.size(); ++k) {
      const BeamEval beam = eval_beam(c, v, pre[k], standoff);
      const double depth = slp_forward(model, beam.s);
      const double slope = slp_input_derivative(model, beam.s);
      const Eigen::Vector3d res = pre[k] + depth * v - target[k];
      acc += res.squaredNorm();

      Eigen::Matrix<double, 3, 5> jac = Eigen::Matrix<double, 3, 5>::Zero();
      if (!beam.singular && slope != 0.0) {
        jac.col(0) = slope * (-beam.radial.x()) * v;
        jac.col(1) = slope * (-beam.radial.y()) * v;
        for (int j = 0; j < 3; ++j)
          jac.col(2 + j) = slope * beam.axial * beam.radial(j) * v;
      }
      jac.block<3, 3>(0, 2) += depth * Eigen::Matrix3d::Identity();

      jtj.noalias() += jac.transpose() * jac;
      jtr.noalias() += jac.transpose() * res;
    }
    return acc;
  }
};

Vec5 clamp_box(const Vec5& x, const Vec5& lo, const Vec5& hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

}  // namespace

EngineResult solve_alignment(const SlpModel& model, std::span<const Point3> pre,
                             std::span<const Point3> target, const IkConstraints& constraints,
                             const LaserConfig& init, const SolverOpts& opts, double standoff) {
  constraints.validate();
  if (pre.size() != target.size())
    throw CardinalityMismatch("pre and target surfaces differ in size");

  BoxedProblem prob{model, pre, target, constraints, standoff};
  const Vec5 lo = prob.lo();
  const Vec5 hi = prob.hi();

  Vec5 theta;
  theta << init.center.x(), init.center.y(), init.direction.x(), init.direction.y(),
      init.direction.z();
  theta = clamp_box(theta, lo, hi);

  Mat5 jtj;
  Vec5 jtr;
  double cost = prob.assemble(theta, jtj, jtr);
  double lambda = 1e-3;

  EngineResult result;
  auto kkt_of = [&](const Vec5& th, const Vec5& grad) {
    return (th - clamp_box(th - grad, lo, hi)).cwiseAbs().maxCoeff();
  };

  int iter = 0;
  bool stop = false;
  for (; iter < opts.max_iterations && !stop; ++iter) {
    result.kkt_residual = kkt_of(theta, 2.0 * jtr);
    if (result.kkt_residual < opts.kkt_tol) {
      result.converged = true;
      break;
    }

    bool accepted = false;
    for (int tries = 0; tries < 40 && !accepted; ++tries) {
      const Mat5 damped = jtj + lambda * Mat5::Identity();
      const Vec5 step = damped.ldlt().solve(-jtr);
      const Vec5 cand = clamp_box(theta + step, lo, hi);
      const double cand_cost = prob.cost(cand);
      if (cand_cost < cost) {
        const double moved = (cand - theta).norm();
        theta = cand;
        cost = prob.assemble(theta, jtj, jtr);
        lambda = std::max(lambda * 0.1, 1e-14);
        accepted = true;
        if (moved < 1e-14) stop = true;
      } else {
        lambda = std::min(lambda * 10.0, 1e14);
      }
    }
    if (!accepted) stop = true;  // damping ceiling reached, no descent left
    if (stop) {
      result.kkt_residual = kkt_of(theta, 2.0 * jtr);
      result.converged = result.kkt_residual < opts.kkt_tol;
    }
  }
  result.center = prob.center_of(theta);
  result.direction = prob.direction_of(theta);
  result.cost = cost;
  result.iterations = iter;
  return result;
}

}  // namespace detail

IkSolution ik_solve(const SlpModel& model, const Point3& p, const Point3& target,
                    const IkConstraints& constraints, const LaserConfig& init,
                    const SolverOpts& opts, double standoff) {
  const detail::EngineResult r = detail::solve_alignment(
      model, std::span<const Point3>(&p, 1), std::span<const Point3>(&target, 1), constraints,
      init, opts, standoff);
  IkSolution sol;
  sol.config = LaserConfig{r.center, UnitVec3(r.direction)};
  sol.final_cost = r.cost;
  sol.iterations = r.iterations;
  sol.converged = r.converged;
  sol.kkt_residual = r.kkt_residual;
  return sol;
}

}  // namespace cavitykin
