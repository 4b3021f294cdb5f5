// Test-only oracles, kept independent of the implementation paths they check.
#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "cavitykin/geometry.hpp"
#include "cavitykin/random.hpp"

namespace oracles {

// Central finite difference of a scalar function.
inline double central_fd(const std::function<double(double)>& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Brute-force distance-to-laser-center: scan a dense grid of plane points for
// the closest one to p, then measure its distance to the plane origin.
inline double brute_force_plane_distance(const cavitykin::Point3& p,
                                         const cavitykin::IncidentPlane& plane,
                                         double extent = 3.0, double spacing = 0.005) {
  const Eigen::Vector3d& n = plane.normal.vec();
  const Eigen::Vector3d seed =
      std::abs(n.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  const Eigen::Vector3d e1 = n.cross(seed).normalized();
  const Eigen::Vector3d e2 = n.cross(e1);

  double best_d2 = std::numeric_limits<double>::infinity();
  double best_radius = 0.0;
  const int half = static_cast<int>(extent / spacing);
  for (int i = -half; i <= half; ++i) {
    for (int j = -half; j <= half; ++j) {
      const cavitykin::Point3 cand = plane.origin + i * spacing * e1 + j * spacing * e2;
      const double d2 = (cand - p).squaredNorm();
      if (d2 < best_d2) {
        best_d2 = d2;
        best_radius = (cand - plane.origin).norm();
      }
    }
  }
  return best_radius;
}

// Uniform random point on a disc of the given radius (polar inversion).
inline void disc_point(std::mt19937_64& gen, double radius, double& x, double& y) {
  const double r = radius * std::sqrt(cavitykin::uniform01(gen));
  const double a = 2.0 * M_PI * cavitykin::uniform01(gen);
  x = r * std::cos(a);
  y = r * std::sin(a);
}

// Least-squares fit of a two-parameter radial Gaussian amplitude*exp(-s^2 /
// (2 sigma^2)), used as the baseline the four-parameter model must beat on
// non-Gaussian data. Log-linear initialization plus Gauss-Newton polish;
// independent of the library fitting code.
struct GaussianFit {
  double amplitude = 0.0;
  double sigma = 1.0;

  double operator()(double s) const {
    return amplitude * std::exp(-s * s / (2.0 * sigma * sigma));
  }
};

inline GaussianFit fit_gaussian_baseline(const std::vector<double>& s,
                                         const std::vector<double>& d) {
  // ln d = ln A - s^2/(2 sigma^2): weighted linear regression on (s^2, ln d).
  double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (d[i] <= 1e-6) continue;
    const double w = d[i] * d[i];  // de-emphasize the noisy log tail
    const double x = s[i] * s[i];
    const double y = std::log(d[i]);
    sw += w;
    sx += w * x;
    sy += w * y;
    sxx += w * x * x;
    sxy += w * x * y;
  }
  const double det = sw * sxx - sx * sx;
  GaussianFit fit;
  double slope = -1.0, intercept = 0.0;
  if (std::abs(det) > 1e-30) {
    slope = (sw * sxy - sx * sy) / det;
    intercept = (sxx * sy - sx * sxy) / det;
  }
  fit.amplitude = std::exp(intercept);
  fit.sigma = slope < 0.0 ? std::sqrt(-0.5 / slope) : 1.0;

  // Gauss-Newton on the true least-squares objective.
  for (int it = 0; it < 60; ++it) {
    double h11 = 0, h12 = 0, h22 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double e = std::exp(-s[i] * s[i] / (2.0 * fit.sigma * fit.sigma));
      const double r = fit.amplitude * e - d[i];
      const double ja = e;
      const double js = fit.amplitude * e * s[i] * s[i] / (fit.sigma * fit.sigma * fit.sigma);
      h11 += ja * ja;
      h12 += ja * js;
      h22 += js * js;
      g1 += ja * r;
      g2 += js * r;
    }
    const double det2 = h11 * h22 - h12 * h12;
    if (std::abs(det2) < 1e-30) break;
    const double da = -(h22 * g1 - h12 * g2) / det2;
    const double ds = -(h11 * g2 - h12 * g1) / det2;
    fit.amplitude += da;
    fit.sigma += ds;
    if (fit.sigma < 1e-6) fit.sigma = 1e-6;
    if (std::abs(da) + std::abs(ds) < 1e-14) break;
  }
  return fit;
}

inline double rmse_of(const std::function<double(double)>& f, const std::vector<double>& s,
                      const std::vector<double>& d) {
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double r = f(s[i]) - d[i];
    acc += r * r;
  }
  return std::sqrt(acc / static_cast<double>(s.size()));
}

}  // namespace oracles
