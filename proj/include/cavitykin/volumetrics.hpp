#pragma once

#include <vector>

#include "cavitykin/geometry.hpp"
#include "cavitykin/slp.hpp"

namespace cavitykin {

struct RoiSample {
  Point3 position{0.0, 0.0, 0.0};  // on the incident plane
  double x = 0.0;                  // in-plane coordinates relative to the origin
  double y = 0.0;
  double area = 0.0;  // mm^2, boundary cells are clipped to the disc
};

// Deterministic midpoint-rule quadrature grid on the ROI disc of the
// incident plane.
struct RoiGrid {
  IncidentPlane plane;
  double radius = 1.0;
  double resolution = 64.0;  // cells per mm
  Eigen::Vector3d basis_u{1.0, 0.0, 0.0};
  Eigen::Vector3d basis_v{0.0, 1.0, 0.0};
  std::vector<RoiSample> samples;

  double total_area() const;
};

RoiGrid sample_roi(const IncidentPlane& plane, double radius = 1.0, double resolution = 64.0);

// Depth-of-cut per grid sample, aligned with RoiGrid::samples.
struct DepthField {
  std::vector<double> values;
};

// Depth predicted by the model at each sample's radial distance.
DepthField depth_field_predicted(const SlpModel& model, const RoiGrid& grid);

// Depths measured from a reconstructed cavity surface: per-point beam depths
// against the local surface frame, carried to the grid by nearest-sample
// lookup on the incident plane. Throws SparseCoverage when more than 5% of
// the grid cells have no measured point within twice the median point
// spacing.
DepthField depth_field_measured(const Surface& cavity, const LocalSurfaceFrame& frame,
                                const RoiGrid& grid);

double cavity_volume(const DepthField& field, const RoiGrid& grid);

struct VolumetricReport {
  double v_predict = 0.0;  // mm^3
  double v_gt = 0.0;
  double v_overlap = 0.0;
  double over_cut_ratio = 0.0;   // percent of the ground-truth volume
  double under_cut_ratio = 0.0;  // percent of the ground-truth volume
  double iou = 0.0;              // percent
  bool gt_volume_zero = false;   // over/under ratios undefined when set
};

VolumetricReport compare_cavities(const DepthField& predicted, const DepthField& gt,
                                  const RoiGrid& grid);

}  // namespace cavitykin
