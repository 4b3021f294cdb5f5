#include <doctest.h>

#include <cmath>

#include "cavitykin/dataio.hpp"
#include "cavitykin/random.hpp"
#include "cavitykin/synth.hpp"
#include "cavitykin/volumetrics.hpp"
#include "oracles.hpp"

using namespace cavitykin;

namespace {

SlpModel crater_model(double peak = 0.4, double s_max = 2.0) {
  SlpModel m;
  m.w1 = -2.0;
  m.b1 = -1.0;
  m.w2 = 1.0;
  m.b2 = -1.0 - std::tanh(m.w1 * 1.0 + m.b1);
  m.input_transform = MinMaxTransform{0.0, s_max, -1.0, 1.0};
  const double top = std::tanh(m.w1 * -1.0 + m.b1) * m.w2 + m.b2;
  m.output_transform = MinMaxTransform{-1.0, 1.0, 0.0, 2.0 * peak / (top + 1.0)};
  m.clamp_max_s = s_max;
  return m;
}

IncidentPlane default_plane() {
  return incident_plane(LaserConfig{Point3(0, 0, 0), UnitVec3(0, 0, -1)}, 1.0);
}

DepthField constant_field(const RoiGrid& grid, double value) {
  DepthField f;
  f.values.assign(grid.samples.size(), value);
  return f;
}

DepthField scaled(const DepthField& f, double factor) {
  DepthField out = f;
  for (double& v : out.values) v *= factor;
  return out;
}

}  // namespace

TEST_CASE("sample_roi") {
  const IncidentPlane plane = default_plane();

  SUBCASE("quadrature area converges to the disc area") {
    const RoiGrid grid = sample_roi(plane, 1.0, 64.0);
    CHECK(grid.total_area() == doctest::Approx(M_PI).epsilon(0.005));
  }

  SUBCASE("area scales with the square of the radius") {
    const double a1 = sample_roi(plane, 1.0, 64.0).total_area();
    const double a2 = sample_roi(plane, 2.0, 64.0).total_area();
    CHECK(a2 / a1 == doctest::Approx(4.0).epsilon(0.005));
  }

  SUBCASE("every sample lies on the plane and inside the disc") {
    const RoiGrid grid = sample_roi(plane, 1.0, 32.0);
    for (const RoiSample& s : grid.samples) {
      CHECK(std::abs(plane.normal.dot(s.position - plane.origin)) < 1e-10);
      CHECK(std::hypot(s.x, s.y) < 1.0 + 0.05);  // cell centers of clipped rim cells
    }
  }

  SUBCASE("deterministic for fixed inputs") {
    const RoiGrid a = sample_roi(plane, 1.0, 16.0);
    const RoiGrid b = sample_roi(plane, 1.0, 16.0);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
      CHECK(a.samples[i].x == b.samples[i].x);
      CHECK(a.samples[i].area == b.samples[i].area);
    }
  }

  SUBCASE("tilted plane keeps the same quadrature quality") {
    const IncidentPlane tilted =
        incident_plane(LaserConfig{Point3(0.3, -0.2, 0.1), UnitVec3(0.3, -0.2, -1.0)}, 1.0);
    const RoiGrid grid = sample_roi(tilted, 1.0, 32.0);
    CHECK(grid.total_area() == doctest::Approx(M_PI).epsilon(0.005));
    for (std::size_t i = 0; i < grid.samples.size(); i += 97)
      CHECK(std::abs(tilted.normal.dot(grid.samples[i].position - tilted.origin)) < 1e-10);
  }

  SUBCASE("parameter validation") {
    CHECK_THROWS_AS(sample_roi(plane, -1.0, 64.0), std::invalid_argument);
    CHECK_THROWS_AS(sample_roi(plane, 1.0, 4.0), std::invalid_argument);
  }
}

TEST_CASE("depth_field_predicted") {
  const SlpModel m = crater_model();
  const RoiGrid grid = sample_roi(default_plane(), 1.0, 32.0);
  const DepthField f = depth_field_predicted(m, grid);
  REQUIRE(f.values.size() == grid.samples.size());
  for (std::size_t i = 0; i < grid.samples.size(); i += 53) {
    CHECK(f.values[i] ==
          doctest::Approx(slp_forward(m, std::hypot(grid.samples[i].x, grid.samples[i].y))));
  }
}

TEST_CASE("depth_field_measured") {
  const SlpModel m = crater_model();
  const LaserConfig cfg{Point3(0, 0, 0), UnitVec3(0, 0, -1)};
  const RoiGrid grid = sample_roi(incident_plane(cfg, 1.0), 1.0, 32.0);
  const LocalSurfaceFrame frame{Point3(0, 0, 0), UnitVec3(0, 0, 1)};

  SUBCASE("flat surface measures zero everywhere") {
    const Surface flat = make_planar_grid(1.5, 0.05);
    const DepthField f = depth_field_measured(flat, frame, grid);
    for (double v : f.values) CHECK(v == doctest::Approx(0.0));
  }

  SUBCASE("cavity sampled exactly at the grid footprint matches the prediction") {
    // Pre-ablation points placed directly under each grid sample, so the
    // measured depths land back on the same cells.
    Surface pre;
    for (const RoiSample& s : grid.samples) pre.points.emplace_back(s.x, s.y, 0.0);
    const Surface cavity = fk_surface(cfg, m, pre);
    const DepthField measured = depth_field_measured(cavity, frame, grid);
    const DepthField predicted = depth_field_predicted(m, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < measured.values.size(); ++i)
      worst = std::max(worst, std::abs(measured.values[i] - predicted.values[i]));
    CHECK(worst < 1e-3);
  }

  SUBCASE("dense scattered cavity reproduces the prediction within spacing error") {
    const Surface pre = make_random_scatter(1.3, 40000, 5);
    const Surface cavity = fk_surface(cfg, m, pre);
    const DepthField measured = depth_field_measured(cavity, frame, grid);
    const DepthField predicted = depth_field_predicted(m, grid);
    double worst = 0.0;
    for (std::size_t i = 0; i < measured.values.size(); ++i)
      worst = std::max(worst, std::abs(measured.values[i] - predicted.values[i]));
    CHECK(worst < 0.05);  // nearest-sample error ~ spacing * max slope
  }

  SUBCASE("sparse coverage is rejected") {
    Surface half;   // points only on one side of the ROI
    for (double x = 0.5; x <= 1.4; x += 0.02)
      for (double y = -1.4; y <= 1.4; y += 0.02) half.points.emplace_back(x, y, 0.0);
    CHECK_THROWS_AS(depth_field_measured(half, frame, grid), SparseCoverage);
  }
}

TEST_CASE("cavity_volume") {
  const IncidentPlane plane = default_plane();
  const RoiGrid grid = sample_roi(plane, 1.0, 64.0);

  CHECK(cavity_volume(constant_field(grid, 0.0), grid) == 0.0);

  SUBCASE("constant depth gives a cylinder") {
    const double c = 0.37;
    CHECK(cavity_volume(constant_field(grid, c), grid) ==
          doctest::Approx(c * M_PI).epsilon(0.005));
  }

  SUBCASE("narrow Gaussian matches its closed-form volume") {
    // Volume of A*exp(-s^2/(2 sigma^2)) over the whole plane is 2*pi*sigma^2*A;
    // with sigma much smaller than the ROI radius the truncation is negligible.
    const double amplitude = 0.5, sigma = 0.15;
    DepthField f;
    for (const RoiSample& s : grid.samples) {
      const double r2 = s.x * s.x + s.y * s.y;
      f.values.push_back(amplitude * std::exp(-r2 / (2.0 * sigma * sigma)));
    }
    CHECK(cavity_volume(f, grid) ==
          doctest::Approx(2.0 * M_PI * sigma * sigma * amplitude).epsilon(0.002));
  }

  SUBCASE("matches the Monte-Carlo oracle on a smooth model field") {
    const SlpModel m = crater_model();
    const DepthField f = depth_field_predicted(m, grid);
    const double grid_volume = cavity_volume(f, grid);

    std::mt19937_64 gen(99);
    double acc = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
      double x, y;
      oracles::disc_point(gen, 1.0, x, y);
      acc += slp_forward(m, std::hypot(x, y));
    }
    const double mc_volume = M_PI * acc / n;
    CHECK(grid_volume == doctest::Approx(mc_volume).epsilon(0.01));
  }
}

TEST_CASE("compare_cavities") {
  const RoiGrid grid = sample_roi(default_plane(), 1.0, 64.0);
  const SlpModel m = crater_model();
  const DepthField base = depth_field_predicted(m, grid);

  SUBCASE("identical fields agree perfectly") {
    const VolumetricReport rep = compare_cavities(base, base, grid);
    CHECK(rep.iou == doctest::Approx(100.0));
    CHECK(rep.over_cut_ratio == doctest::Approx(0.0));
    CHECK(rep.under_cut_ratio == doctest::Approx(0.0));
    CHECK(rep.v_overlap == doctest::Approx(rep.v_gt));
  }

  SUBCASE("doubled prediction: over-cut 100%, IoU 2/3") {
    const VolumetricReport rep = compare_cavities(scaled(base, 2.0), base, grid);
    CHECK(rep.over_cut_ratio == doctest::Approx(100.0).epsilon(1e-10));
    CHECK(rep.under_cut_ratio == doctest::Approx(0.0));
    CHECK(rep.iou == doctest::Approx(200.0 / 3.0).epsilon(1e-10));
  }

  SUBCASE("swap symmetry of the IoU and the excess volumes") {
    std::mt19937_64 gen(14);
    DepthField other = base;
    for (double& v : other.values) v = std::max(0.0, v + uniform_in(gen, -0.05, 0.05));
    const VolumetricReport ab = compare_cavities(base, other, grid);
    const VolumetricReport ba = compare_cavities(other, base, grid);
    CHECK(ab.iou == doctest::Approx(ba.iou).epsilon(1e-12));
    // over-excess(A over B) is the same volume as under-excess(B under A).
    CHECK(ab.over_cut_ratio * ab.v_gt ==
          doctest::Approx(ba.under_cut_ratio * ba.v_gt).epsilon(1e-9));
  }

  SUBCASE("overlap bound and exact volume decomposition") {
    std::mt19937_64 gen(15);
    DepthField other = base;
    for (double& v : other.values) v = std::max(0.0, v + uniform_in(gen, -0.1, 0.1));
    const VolumetricReport rep = compare_cavities(base, other, grid);
    CHECK(rep.v_overlap <= std::min(rep.v_predict, rep.v_gt) + 1e-12);
    const double over_excess = rep.over_cut_ratio / 100.0 * rep.v_gt;
    const double under_excess = rep.under_cut_ratio / 100.0 * rep.v_gt;
    CHECK(rep.v_predict == doctest::Approx(rep.v_overlap + over_excess).epsilon(1e-10));
    CHECK(rep.v_gt == doctest::Approx(rep.v_overlap + under_excess).epsilon(1e-10));
  }

  SUBCASE("grid refinement changes nothing meaningful") {
    const RoiGrid fine = sample_roi(default_plane(), 1.0, 128.0);
    const SlpModel m2 = crater_model(0.3, 1.8);
    const VolumetricReport coarse_rep =
        compare_cavities(depth_field_predicted(m, grid), depth_field_predicted(m2, grid), grid);
    const VolumetricReport fine_rep =
        compare_cavities(depth_field_predicted(m, fine), depth_field_predicted(m2, fine), fine);
    CHECK(fine_rep.v_predict == doctest::Approx(coarse_rep.v_predict).epsilon(0.005));
    CHECK(fine_rep.v_gt == doctest::Approx(coarse_rep.v_gt).epsilon(0.005));
    CHECK(fine_rep.v_overlap == doctest::Approx(coarse_rep.v_overlap).epsilon(0.005));
    CHECK(fine_rep.iou == doctest::Approx(coarse_rep.iou).epsilon(0.005));
  }

  SUBCASE("zero ground truth raises the report flag") {
    const VolumetricReport rep = compare_cavities(base, constant_field(grid, 0.0), grid);
    CHECK(rep.gt_volume_zero);
    CHECK(rep.iou == doctest::Approx(0.0));
    const VolumetricReport both = compare_cavities(constant_field(grid, 0.0),
                                                   constant_field(grid, 0.0), grid);
    CHECK(both.gt_volume_zero);
    CHECK(both.iou == doctest::Approx(100.0));  // identical fields
  }
}
