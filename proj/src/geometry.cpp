#include "cavitykin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cavitykin {

Point3 laser_origin(const LaserConfig& cfg, double standoff) {
  if (!(standoff > 0.0)) throw std::invalid_argument("standoff must be positive");
  return cfg.center - standoff * cfg.direction.vec();
}

IncidentPlane incident_plane(const LaserConfig& cfg, double standoff) {
  return IncidentPlane{laser_origin(cfg, standoff), cfg.direction, standoff};
}

Point3 project_to_incident_plane(const Point3& p, const IncidentPlane& plane) {
  const Eigen::Vector3d& v = plane.normal.vec();
  // Slide p along -v until it meets the plane; for a unit normal the
  // denominator is exactly -1, so this is the orthogonal projection.
  const double t = v.dot(p - plane.origin) / v.dot(-v);
  return p - t * (-v);
}

double distance_to_laser_center(const Point3& p, const IncidentPlane& plane) {
  return (project_to_incident_plane(p, plane) - plane.origin).norm();
}

double depth_of_cut_measured(const Point3& p, const LocalSurfaceFrame& frame,
                             const UnitVec3& direction) {
  const Eigen::Vector3d& n = frame.normal.vec();
  const Eigen::Vector3d& v = direction.vec();
  const double denom = (-n).dot(-v);
  if (std::abs(denom) <= 1e-6)
    throw DegenerateProjection("beam direction is parallel to the local surface plane");
  const double t = (-n).dot(p - frame.center) / denom;
  return (t * (-v)).norm();
}

Point3 estimate_incident_center(const Surface& cavity, const IncidentPlane& plane,
                                std::span<const double> depths, double top_fraction) {
  if (cavity.empty()) throw EmptySelection("cavity has no points");
  if (depths.size() != cavity.size())
    throw CardinalityMismatch("depths are not aligned with cavity points");
  if (!(top_fraction > 0.0) || top_fraction > 1.0)
    throw std::invalid_argument("top_fraction must be in (0, 1]");

  const std::size_t m = cavity.size();
  // Nearest-rank quantile threshold; every point tied with it is included,
  // so the selection can exceed the nominal fraction.
  std::vector<double> sorted(depths.begin(), depths.end());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  std::size_t rank = static_cast<std::size_t>(std::ceil(top_fraction * static_cast<double>(m)));
  rank = std::clamp<std::size_t>(rank, 1, m);
  const double threshold = sorted[rank - 1];

  Point3 sum = Point3::Zero();
  std::size_t count = 0;
  for (std::size_t k = 0; k < m; ++k) {
    if (depths[k] >= threshold) {
      sum += project_to_incident_plane(cavity.points[k], plane);
      ++count;
    }
  }
  return sum / static_cast<double>(count);
}

}  // namespace cavitykin
