#include "cavitykin/volumetrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cavitykin {

namespace {

// Orthonormal in-plane basis chosen deterministically from the normal.
void plane_basis(const UnitVec3& normal, Eigen::Vector3d& u, Eigen::Vector3d& v) {
  const Eigen::Vector3d& n = normal.vec();
  const Eigen::Vector3d seed =
      std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  u = n.cross(seed).normalized();
  v = n.cross(u);
}

// Fraction of a square cell inside the disc, by subsample counting. Only
// called for cells straddling the rim.
double clipped_fraction(double cx, double cy, double h, double radius) {
  constexpr int kSub = 16;
  const double r2 = radius * radius;
  int inside = 0;
  for (int i = 0; i < kSub; ++i) {
    const double x = cx - 0.5 * h + (i + 0.5) * h / kSub;
    for (int j = 0; j < kSub; ++j) {
      const double y = cy - 0.5 * h + (j + 0.5) * h / kSub;
      if (x * x + y * y <= r2) ++inside;
    }
  }
  return static_cast<double>(inside) / (kSub * kSub);
}

}  // namespace

double RoiGrid::total_area() const {
  double acc = 0.0;
  for (const RoiSample& s : samples) acc += s.area;
  return acc;
}

RoiGrid sample_roi(const IncidentPlane& plane, double radius, double resolution) {
  if (!(radius > 0.0)) throw std::invalid_argument("ROI radius must be positive");
  if (!(resolution >= 8.0)) throw std::invalid_argument("resolution must be >= 8 cells/mm");

  RoiGrid grid;
  grid.plane = plane;
  grid.radius = radius;
  grid.resolution = resolution;
  plane_basis(plane.normal, grid.basis_u, grid.basis_v);

  const double h = 1.0 / resolution;
  const int half = static_cast<int>(std::ceil(radius / h));
  const double half_diag = h * std::sqrt(0.5);
  grid.samples.reserve(static_cast<std::size_t>(M_PI * radius * radius / (h * h)) + 64);

  for (int i = -half; i < half; ++i) {
    const double x = (i + 0.5) * h;
    for (int j = -half; j < half; ++j) {
      const double y = (j + 0.5) * h;
      const double r = std::hypot(x, y);
      double area;
      if (r + half_diag <= radius) {
        area = h * h;  // fully inside
      } else if (r - half_diag >= radius) {
        continue;  // fully outside
      } else {
        area = h * h * clipped_fraction(x, y, h, radius);
        if (area <= 0.0) continue;
      }
      RoiSample sample;
      sample.x = x;
      sample.y = y;
      sample.area = area;
      sample.position = plane.origin + x * grid.basis_u + y * grid.basis_v;
      grid.samples.push_back(sample);
    }
  }
  return grid;
}

DepthField depth_field_predicted(const SlpModel& model, const RoiGrid& grid) {
  DepthField field;
  field.values.reserve(grid.samples.size());
  for (const RoiSample& s : grid.samples)
    field.values.push_back(slp_forward(model, std::hypot(s.x, s.y)));
  return field;
}

DepthField depth_field_measured(const Surface& cavity, const LocalSurfaceFrame& frame,
                                const RoiGrid& grid) {
  if (cavity.empty()) throw EmptySelection("measured cavity has no points");

  // Project every cavity point onto the incident plane and measure its beam
  // depth against the local surface frame.
  const std::size_t n = cavity.size();
  std::vector<double> px(n), py(n), depth(n);
  for (std::size_t k = 0; k < n; ++k) {
    const Point3 proj = project_to_incident_plane(cavity.points[k], grid.plane);
    const Eigen::Vector3d rel = proj - grid.plane.origin;
    px[k] = rel.dot(grid.basis_u);
    py[k] = rel.dot(grid.basis_v);
    depth[k] = depth_of_cut_measured(cavity.points[k], frame, grid.plane.normal);
  }

  // Median nearest-neighbor spacing of the projected points, via a uniform
  // binning structure so large surfaces stay cheap.
  double min_x = px[0], max_x = px[0], min_y = py[0], max_y = py[0];
  for (std::size_t k = 1; k < n; ++k) {
    min_x = std::min(min_x, px[k]);
    max_x = std::max(max_x, px[k]);
    min_y = std::min(min_y, py[k]);
    max_y = std::max(max_y, py[k]);
  }
  const double extent = std::max({max_x - min_x, max_y - min_y, 1e-9});
  const int bins = std::clamp(static_cast<int>(std::sqrt(static_cast<double>(n))), 1, 512);
  const double bin_w = extent / bins * (1.0 + 1e-12);
  auto bin_of = [&](double x, double lo) {
    return std::clamp(static_cast<int>((x - lo) / bin_w), 0, bins - 1);
  };
  std::vector<std::vector<std::size_t>> cells(static_cast<std::size_t>(bins) * bins);
  for (std::size_t k = 0; k < n; ++k)
    cells[static_cast<std::size_t>(bin_of(py[k], min_y)) * bins + bin_of(px[k], min_x)]
        .push_back(k);

  auto nearest = [&](double x, double y, std::size_t skip) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_k = n;
    const int bx = bin_of(x, min_x);
    const int by = bin_of(y, min_y);
    for (int ring = 0; ring < bins; ++ring) {
      const int x0 = std::max(bx - ring, 0), x1 = std::min(bx + ring, bins - 1);
      const int y0 = std::max(by - ring, 0), y1 = std::min(by + ring, bins - 1);
      for (int cy = y0; cy <= y1; ++cy) {
        for (int cx = x0; cx <= x1; ++cx) {
          if (ring > 0 && cx != x0 && cx != x1 && cy != y0 && cy != y1) continue;
          for (std::size_t k : cells[static_cast<std::size_t>(cy) * bins + cx]) {
            if (k == skip) continue;
            const double d2 = (px[k] - x) * (px[k] - x) + (py[k] - y) * (py[k] - y);
            if (d2 < best) {
              best = d2;
              best_k = k;
            }
          }
        }
      }
      // One extra ring after the first hit guarantees correctness near
      // bin boundaries.
      if (best_k != n && ring > static_cast<int>(std::sqrt(best) / bin_w) + 1) break;
    }
    return std::pair<std::size_t, double>(best_k, std::sqrt(best));
  };

  double median_spacing = 0.0;
  if (n > 1) {
    std::vector<double> nn(n);
    for (std::size_t k = 0; k < n; ++k) nn[k] = nearest(px[k], py[k], k).second;
    std::nth_element(nn.begin(), nn.begin() + n / 2, nn.end());
    median_spacing = nn[n / 2];
  }

  DepthField field;
  field.values.reserve(grid.samples.size());
  std::size_t uncovered = 0;
  const double reach = 2.0 * median_spacing;
  for (const RoiSample& s : grid.samples) {
    const auto [k, dist] = nearest(s.x, s.y, n);
    if (n > 1 && dist > reach) ++uncovered;
    field.values.push_back(depth[k]);
  }

  if (static_cast<double>(uncovered) > 0.05 * static_cast<double>(grid.samples.size()))
    throw SparseCoverage("measured surface covers too little of the ROI grid");
  return field;
}

double cavity_volume(const DepthField& field, const RoiGrid& grid) {
  if (field.values.size() != grid.samples.size())
    throw CardinalityMismatch("depth field is not aligned with the grid");
  double acc = 0.0;
  for (std::size_t i = 0; i < field.values.size(); ++i)
    acc += field.values[i] * grid.samples[i].area;
  return acc;
}

VolumetricReport compare_cavities(const DepthField& predicted, const DepthField& gt,
                                  const RoiGrid& grid) {
  if (predicted.values.size() != grid.samples.size() || gt.values.size() != grid.samples.size())
    throw CardinalityMismatch("depth fields are not aligned with the grid");

  VolumetricReport rep;
  double v_over_excess = 0.0, v_under_excess = 0.0;
  for (std::size_t i = 0; i < grid.samples.size(); ++i) {
    const double a = grid.samples[i].area;
    const double dp = predicted.values[i];
    const double dg = gt.values[i];
    rep.v_predict += dp * a;
    rep.v_gt += dg * a;
    rep.v_overlap += std::min(dp, dg) * a;
    v_over_excess += std::max(dp - dg, 0.0) * a;
    v_under_excess += std::max(dg - dp, 0.0) * a;
  }

  if (rep.v_gt > 0.0) {
    rep.over_cut_ratio = 100.0 * v_over_excess / rep.v_gt;
    rep.under_cut_ratio = 100.0 * v_under_excess / rep.v_gt;
  } else {
    rep.gt_volume_zero = true;
  }
  const double denom = rep.v_gt + rep.v_predict;
  // Identical all-zero fields count as perfect agreement.
  rep.iou = denom > 0.0 ? 200.0 * rep.v_overlap / denom : 100.0;
  return rep;
}

}  // namespace cavitykin
