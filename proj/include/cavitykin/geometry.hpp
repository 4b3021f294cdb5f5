#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "cavitykin/errors.hpp"

namespace cavitykin {

using Point3 = Eigen::Vector3d;

// Direction vector normalized at construction. Raw inputs of any length are
// accepted; zero or non-finite vectors are rejected.
class UnitVec3 {
 public:
  UnitVec3() : v_(0.0, 0.0, -1.0) {}

  explicit UnitVec3(const Eigen::Vector3d& raw) {
    if (!raw.allFinite()) throw DegenerateGeometry("direction has non-finite components");
    const double n = raw.norm();
    if (n <= 0.0) throw DegenerateGeometry("cannot normalize a zero vector");
    v_ = raw / n;
  }

  UnitVec3(double x, double y, double z) : UnitVec3(Eigen::Vector3d(x, y, z)) {}

  const Eigen::Vector3d& vec() const { return v_; }
  double x() const { return v_.x(); }
  double y() const { return v_.y(); }
  double z() const { return v_.z(); }

  double dot(const Eigen::Vector3d& other) const { return v_.dot(other); }
  UnitVec3 flipped() const {
    UnitVec3 u;
    u.v_ = -v_;
    return u;
  }

 private:
  Eigen::Vector3d v_;
};

// 6-dof incident configuration: ablation center plus incident direction.
struct LaserConfig {
  Point3 center{0.0, 0.0, 0.0};
  UnitVec3 direction{};
};

// Reference plane through the laser origin, perpendicular to the beam.
// The origin sits `standoff` behind the ablation center along the beam.
struct IncidentPlane {
  Point3 origin{0.0, 0.0, 1.0};
  UnitVec3 normal{};
  double standoff = 1.0;
};

// Local planar approximation of the (pre-ablation) surface around a cavity.
struct LocalSurfaceFrame {
  Point3 center{0.0, 0.0, 0.0};
  UnitVec3 normal{0.0, 0.0, 1.0};
};

// Indexed 3D point set. Point order carries the correspondence index: the
// k-th point of a pre-ablation surface pairs with the k-th point of the
// post-ablation / target surface.
struct Surface {
  std::vector<Point3> points;

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  auto begin() const { return points.begin(); }
  auto end() const { return points.end(); }
};

Point3 laser_origin(const LaserConfig& cfg, double standoff = 1.0);
IncidentPlane incident_plane(const LaserConfig& cfg, double standoff = 1.0);

Point3 project_to_incident_plane(const Point3& p, const IncidentPlane& plane);
double distance_to_laser_center(const Point3& p, const IncidentPlane& plane);

// Length of the beam segment between the surface point and the reference
// plane, measured along the (negated) incident direction. Throws
// DegenerateProjection when the beam is parallel to the reference plane.
double depth_of_cut_measured(const Point3& p, const LocalSurfaceFrame& frame,
                             const UnitVec3& direction);

// Mean of the incident-plane projections of the points whose depth falls in
// the top `top_fraction` quantile (nearest-rank, ties included).
Point3 estimate_incident_center(const Surface& cavity, const IncidentPlane& plane,
                                std::span<const double> depths,
                                double top_fraction = 0.15);

}  // namespace cavitykin
