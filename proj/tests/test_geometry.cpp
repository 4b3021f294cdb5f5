#include <doctest.h>

#include <cmath>

#include "cavitykin/geometry.hpp"
#include "cavitykin/random.hpp"
#include "oracles.hpp"

using namespace cavitykin;

namespace {

Point3 random_point(std::mt19937_64& gen, double extent) {
  return Point3(uniform_in(gen, -extent, extent), uniform_in(gen, -extent, extent),
                uniform_in(gen, -extent, extent));
}

UnitVec3 random_direction(std::mt19937_64& gen) {
  while (true) {
    const Point3 v = random_point(gen, 1.0);
    if (v.norm() > 0.1) return UnitVec3(v);
  }
}

}  // namespace

TEST_CASE("laser_origin basic cases") {
  const LaserConfig down{Point3(0, 0, 0), UnitVec3(0, 0, -1)};
  CHECK(laser_origin(down, 1.0).isApprox(Point3(0, 0, 1), 1e-15));

  const LaserConfig shifted{Point3(1, 2, 3), UnitVec3(0, 0, -1)};
  CHECK(laser_origin(shifted, 1.0).isApprox(Point3(1, 2, 4), 1e-15));

  // Hand computation: normalize(1,1,1) = (1,1,1)/sqrt(3), origin = -2*that.
  const LaserConfig diag{Point3(0, 0, 0), UnitVec3(1, 1, 1)};
  const double c = -2.0 / std::sqrt(3.0);
  CHECK(laser_origin(diag, 2.0).isApprox(Point3(c, c, c), 1e-14));

  CHECK_THROWS_AS(laser_origin(down, 0.0), std::invalid_argument);
}

TEST_CASE("projection onto the incident plane") {
  const LaserConfig down{Point3(0, 0, 0), UnitVec3(0, 0, -1)};
  const IncidentPlane plane = incident_plane(down, 1.0);
  CHECK(plane.origin.isApprox(Point3(0, 0, 1), 1e-15));

  SUBCASE("point on the plane is unchanged") {
    const Point3 p(0.4, -0.7, 1.0);
    CHECK(project_to_incident_plane(p, plane).isApprox(p, 1e-15));
  }

  SUBCASE("axial point projects to the origin") {
    const Point3 p = plane.origin + 3.0 * plane.normal.vec();
    CHECK(project_to_incident_plane(p, plane).isApprox(plane.origin, 1e-12));
  }

  SUBCASE("hand-computed offset case") {
    CHECK(project_to_incident_plane(Point3(0.5, 0, 0), plane).isApprox(Point3(0.5, 0, 1), 1e-12));
  }

  SUBCASE("idempotence and plane membership on random input") {
    std::mt19937_64 gen(42);
    for (int i = 0; i < 200; ++i) {
      const LaserConfig cfg{random_point(gen, 2.0), random_direction(gen)};
      const IncidentPlane pl = incident_plane(cfg, uniform_in(gen, 0.2, 3.0));
      const Point3 p = random_point(gen, 5.0);
      const Point3 proj = project_to_incident_plane(p, pl);
      CHECK(std::abs(pl.normal.dot(proj - pl.origin)) < 1e-10);
      CHECK((project_to_incident_plane(proj, pl) - proj).norm() < 1e-10);
    }
  }
}

TEST_CASE("distance_to_laser_center") {
  const LaserConfig down{Point3(0, 0, 0), UnitVec3(0, 0, -1)};
  const IncidentPlane plane = incident_plane(down, 1.0);

  CHECK(distance_to_laser_center(plane.origin, plane) == doctest::Approx(0.0));

  SUBCASE("axial offset is invisible, radial offset is the answer") {
    const Eigen::Vector3d u(1, 0, 0);  // perpendicular to the beam
    const Point3 p = plane.origin + 2.5 * plane.normal.vec() + 0.8 * u;
    CHECK(distance_to_laser_center(p, plane) == doctest::Approx(0.8).epsilon(1e-12));
  }

  SUBCASE("matches the brute-force plane-sampling oracle") {
    std::mt19937_64 gen(7);
    for (int i = 0; i < 10; ++i) {
      const LaserConfig cfg{random_point(gen, 1.0), random_direction(gen)};
      const IncidentPlane pl = incident_plane(cfg, 1.0);
      const Point3 p = random_point(gen, 1.5);
      const double expected = oracles::brute_force_plane_distance(p, pl);
      CHECK(distance_to_laser_center(p, pl) == doctest::Approx(expected).epsilon(0.02));
    }
  }

  SUBCASE("invariant under sliding the query point along the beam") {
    std::mt19937_64 gen(11);
    for (int i = 0; i < 100; ++i) {
      const LaserConfig cfg{random_point(gen, 2.0), random_direction(gen)};
      const IncidentPlane pl = incident_plane(cfg, 1.0);
      const Point3 p = random_point(gen, 3.0);
      const double base = distance_to_laser_center(p, pl);
      const double t = uniform_in(gen, -4.0, 4.0);
      CHECK(std::abs(distance_to_laser_center(p + t * cfg.direction.vec(), pl) - base) < 1e-10);
    }
  }
}

TEST_CASE("depth_of_cut_measured") {
  const LocalSurfaceFrame frame{Point3(0, 0, 0), UnitVec3(0, 0, 1)};
  const UnitVec3 straight_down(0, 0, -1);

  CHECK(depth_of_cut_measured(Point3(0.3, -0.1, 0.0), frame, straight_down) ==
        doctest::Approx(0.0));
  CHECK(depth_of_cut_measured(Point3(0, 0, -0.2), frame, straight_down) ==
        doctest::Approx(0.2).epsilon(1e-14));

  SUBCASE("oblique beam at 30 degrees lengthens the cut") {
    const double a = 30.0 * M_PI / 180.0;
    const UnitVec3 oblique(std::sin(a), 0.0, -std::cos(a));
    const Point3 p(0.05, 0.0, -0.1);  // 0.1 below the plane
    CHECK(depth_of_cut_measured(p, frame, oblique) ==
          doctest::Approx(0.1 / std::cos(a)).epsilon(1e-12));
  }

  SUBCASE("degenerate when the beam lies in the plane") {
    const UnitVec3 sideways(1, 0, 0);
    CHECK_THROWS_AS(depth_of_cut_measured(Point3(0, 0, -0.1), frame, sideways),
                    DegenerateProjection);
  }

  SUBCASE("rigid translation applied to both the point and the frame center") {
    std::mt19937_64 gen(5);
    for (int i = 0; i < 100; ++i) {
      const LocalSurfaceFrame f{random_point(gen, 1.0), random_direction(gen)};
      const UnitVec3 v = random_direction(gen);
      if (std::abs(f.normal.dot(v.vec())) < 1e-3) continue;
      const Point3 p = random_point(gen, 1.0);
      const Point3 shift = random_point(gen, 10.0);
      const double d0 = depth_of_cut_measured(p, f, v);
      const LocalSurfaceFrame f2{f.center + shift, f.normal};
      CHECK(depth_of_cut_measured(p + shift, f2, v) == doctest::Approx(d0).epsilon(1e-10));
    }
  }

  SUBCASE("normal incidence reduces to the plane offset") {
    std::mt19937_64 gen(9);
    for (int i = 0; i < 100; ++i) {
      const LocalSurfaceFrame f{random_point(gen, 1.0), random_direction(gen)};
      const UnitVec3 v = f.normal.flipped();
      const Point3 p = random_point(gen, 1.0);
      const double expected = std::abs(f.normal.dot(p - f.center));
      CHECK(depth_of_cut_measured(p, f, v) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
}

TEST_CASE("estimate_incident_center") {
  const LaserConfig down{Point3(0.2, -0.3, 0), UnitVec3(0, 0, -1)};
  const IncidentPlane plane = incident_plane(down, 1.0);

  SUBCASE("single point selects itself") {
    Surface cavity;
    cavity.points.push_back(Point3(0.5, 0.1, -0.2));
    const double depth = 0.2;
    const Point3 est = estimate_incident_center(cavity, plane, std::span(&depth, 1), 0.15);
    CHECK(est.isApprox(Point3(0.5, 0.1, 1.0), 1e-12));
  }

  SUBCASE("uniform depths with top_fraction 1 give the centroid of projections") {
    Surface cavity;
    std::vector<double> depths;
    Point3 centroid = Point3::Zero();
    for (int i = 0; i < 7; ++i) {
      const Point3 p(0.1 * i, -0.05 * i, -0.3);
      cavity.points.push_back(p);
      depths.push_back(0.3);
      centroid += project_to_incident_plane(p, plane);
    }
    centroid /= 7.0;
    CHECK(estimate_incident_center(cavity, plane, depths, 1.0).isApprox(centroid, 1e-12));
  }

  SUBCASE("recovers the center of a symmetric synthetic cavity") {
    // Gaussian depth bump centered at c on a regular grid.
    const Point3 c(0.2, -0.3, 0.0);
    const double spacing = 0.05;
    Surface cavity;
    std::vector<double> depths;
    for (int i = -20; i <= 20; ++i) {
      for (int j = -20; j <= 20; ++j) {
        const Point3 p(c.x() + i * spacing, c.y() + j * spacing, 0.0);
        const double r2 = (p - c).squaredNorm();
        const double d = 0.3 * std::exp(-r2 / (2.0 * 0.35 * 0.35));
        cavity.points.push_back(p - Point3(0, 0, d));
        depths.push_back(d);
      }
    }
    const Point3 est = estimate_incident_center(cavity, plane, depths, 0.15);
    CHECK((est - Point3(c.x(), c.y(), 1.0)).norm() < 2.0 * spacing);
  }

  SUBCASE("empty cavity") {
    Surface cavity;
    CHECK_THROWS_AS(estimate_incident_center(cavity, plane, {}, 0.15), EmptySelection);
  }

  SUBCASE("result lies on the incident plane") {
    std::mt19937_64 gen(3);
    Surface cavity;
    std::vector<double> depths;
    for (int i = 0; i < 50; ++i) {
      cavity.points.push_back(random_point(gen, 1.0));
      depths.push_back(uniform_in(gen, 0.0, 0.5));
    }
    const Point3 est = estimate_incident_center(cavity, plane, depths, 0.15);
    CHECK(std::abs(plane.normal.dot(est - plane.origin)) < 1e-10);
  }
}
