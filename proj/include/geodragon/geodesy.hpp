#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "geodragon/error.hpp"

namespace geodragon::geodesy {

inline constexpr double kEarthRadiusM = 6378137.0;  // WGS-84 semi-major axis
inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kDegToRad = kPi / 180.0;

// Wraps an angle into (-pi, pi].
double normalize_angle(double rad);

struct Wgs84Point {
  double lat = 0.0;  // degrees, [-90, 90]
  double lon = 0.0;  // degrees, [-180, 180]

  // Validating constructor; rejects NaN and out-of-range values.
  static Wgs84Point checked(double lat_deg, double lon_deg);
};

struct EnuPoint {
  double x_east = 0.0;
  double y_north = 0.0;

  EnuPoint operator+(EnuPoint o) const { return {x_east + o.x_east, y_north + o.y_north}; }
  EnuPoint operator-(EnuPoint o) const { return {x_east - o.x_east, y_north - o.y_north}; }
  EnuPoint operator*(double s) const { return {x_east * s, y_north * s}; }
  double norm() const { return std::hypot(x_east, y_north); }
};

inline double distance(EnuPoint a, EnuPoint b) { return (a - b).norm(); }

struct HeadingBias {
  double theta_bias = 0.0;  // radians in (-pi, pi]

  static HeadingBias from_radians(double rad) { return {normalize_angle(rad)}; }
};

// Equirectangular tangent-plane projection, valid for small areas around the
// anchor (|dlat|, |dlon| < 0.1 degrees).
EnuPoint wgs84_to_enu(const Wgs84Point& anchor, const Wgs84Point& p);
Wgs84Point enu_to_wgs84(const Wgs84Point& anchor, const EnuPoint& p);

// Heading of the displacement from p_start to p_end, measured from east.
// Rejects baselines shorter than min_baseline_m.
HeadingBias heading_from_fixes(EnuPoint p_start, EnuPoint p_end,
                               double min_baseline_m = 1.0);

// Generalization used for in-motion re-alignment: angle of the local frame's
// x-axis measured from east, given the same displacement expressed in both
// frames.
HeadingBias heading_bias_between(EnuPoint enu_delta, EnuPoint local_delta,
                                 double min_baseline_m = 1.0);

// W_local = R(theta)^T (W_global - p_end).
EnuPoint global_to_local_waypoint(EnuPoint w_global, EnuPoint p_end, HeadingBias bias);
// Inverse of the above.
EnuPoint local_to_global_waypoint(EnuPoint w_local, EnuPoint p_end, HeadingBias bias);

// Per-axis zero-mean Gaussian position noise with value-semantic generator
// state: two copies with equal state produce equal samples.
class GnssNoiseModel {
 public:
  GnssNoiseModel(double sigma_m, std::uint64_t seed);

  EnuPoint sample(EnuPoint true_point);
  double sigma_m() const { return sigma_m_; }
  std::uint64_t seed() const { return seed_; }

 private:
  double sigma_m_;
  std::uint64_t seed_;
  std::mt19937_64 rng_;
};

inline EnuPoint simulate_gnss_fix(EnuPoint true_point, GnssNoiseModel& model) {
  return model.sample(true_point);
}

// Mean of `count` consecutive fixes of the same true point (the position
// filter applied at the endpoints of the heading-initialization run).
EnuPoint filtered_fix(EnuPoint true_point, GnssNoiseModel& model, int count);

// Batch projection kernels. The serial variant is the reference; the parallel
// variant must match it element-for-element.
std::vector<EnuPoint> batch_wgs84_to_enu_serial(const Wgs84Point& anchor,
                                                std::span<const Wgs84Point> pts);
std::vector<EnuPoint> batch_wgs84_to_enu(const Wgs84Point& anchor,
                                         std::span<const Wgs84Point> pts,
                                         bool parallel = true);

}  // namespace geodragon::geodesy
