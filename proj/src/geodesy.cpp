#include "geodragon/geodesy.hpp"

#include <cmath>

#include "geodragon/parallel.hpp"

namespace geodragon::geodesy {

double normalize_angle(double rad) {
  double a = std::fmod(rad, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  if (a > kPi) a -= 2.0 * kPi;
  return a;
}

Wgs84Point Wgs84Point::checked(double lat_deg, double lon_deg) {
  require(std::isfinite(lat_deg) && std::isfinite(lon_deg), Errc::RangeError,
          "non-finite geodetic coordinate");
  require(lat_deg >= -90.0 && lat_deg <= 90.0, Errc::RangeError,
          "latitude out of [-90, 90]: ", lat_deg);
  require(lon_deg >= -180.0 && lon_deg <= 180.0, Errc::RangeError,
          "longitude out of [-180, 180]: ", lon_deg);
  return {lat_deg, lon_deg};
}

namespace {
constexpr double kValidityDeg = 0.1;

void check_validity(const Wgs84Point& anchor, const Wgs84Point& p) {
  require(std::abs(p.lat - anchor.lat) < kValidityDeg &&
              std::abs(p.lon - anchor.lon) < kValidityDeg,
          Errc::RangeError,
          "point outside the tangent-plane validity box around the anchor");
}
}  // namespace

EnuPoint wgs84_to_enu(const Wgs84Point& anchor, const Wgs84Point& p) {
  check_validity(anchor, p);
  const double dlat = (p.lat - anchor.lat) * kDegToRad;
  const double dlon = (p.lon - anchor.lon) * kDegToRad;
  return {kEarthRadiusM * std::cos(anchor.lat * kDegToRad) * dlon,
          kEarthRadiusM * dlat};
}

Wgs84Point enu_to_wgs84(const Wgs84Point& anchor, const EnuPoint& p) {
  const double dlat = p.y_north / kEarthRadiusM;
  const double dlon = p.x_east / (kEarthRadiusM * std::cos(anchor.lat * kDegToRad));
  Wgs84Point out{anchor.lat + dlat / kDegToRad, anchor.lon + dlon / kDegToRad};
  check_validity(anchor, out);
  return out;
}

HeadingBias heading_from_fixes(EnuPoint p_start, EnuPoint p_end,
                               double min_baseline_m) {
  const EnuPoint d = p_end - p_start;
  require(d.norm() >= min_baseline_m, Errc::InsufficientBaseline,
          "heading baseline ", d.norm(), " m below minimum ", min_baseline_m, " m");
  return HeadingBias::from_radians(std::atan2(d.y_north, d.x_east));
}

HeadingBias heading_bias_between(EnuPoint enu_delta, EnuPoint local_delta,
                                 double min_baseline_m) {
  require(enu_delta.norm() >= min_baseline_m && local_delta.norm() >= min_baseline_m,
          Errc::InsufficientBaseline, "re-alignment baseline below minimum ",
          min_baseline_m, " m");
  return HeadingBias::from_radians(std::atan2(enu_delta.y_north, enu_delta.x_east) -
                                   std::atan2(local_delta.y_north, local_delta.x_east));
}

EnuPoint global_to_local_waypoint(EnuPoint w_global, EnuPoint p_end, HeadingBias bias) {
  const EnuPoint d = w_global - p_end;
  const double c = std::cos(bias.theta_bias);
  const double s = std::sin(bias.theta_bias);
  return {c * d.x_east + s * d.y_north, -s * d.x_east + c * d.y_north};
}

EnuPoint local_to_global_waypoint(EnuPoint w_local, EnuPoint p_end, HeadingBias bias) {
  const double c = std::cos(bias.theta_bias);
  const double s = std::sin(bias.theta_bias);
  return {p_end.x_east + c * w_local.x_east - s * w_local.y_north,
          p_end.y_north + s * w_local.x_east + c * w_local.y_north};
}

GnssNoiseModel::GnssNoiseModel(double sigma_m, std::uint64_t seed)
    : sigma_m_(sigma_m), seed_(seed), rng_(seed) {
  require(sigma_m >= 0.0, Errc::ValidationError, "gnss sigma must be >= 0");
}

namespace {
double uniform01(std::mt19937_64& rng) {
  // 53-bit mantissa draw in [0, 1).
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
}  // namespace

EnuPoint GnssNoiseModel::sample(EnuPoint true_point) {
  if (sigma_m_ == 0.0) return true_point;
  // Box-Muller keeps the draw sequence independent of the standard library's
  // normal_distribution implementation.
  const double u1 = uniform01(rng_);
  const double u2 = uniform01(rng_);
  const double r = std::sqrt(-2.0 * std::log1p(-u1));
  const double nx = r * std::cos(2.0 * kPi * u2);
  const double ny = r * std::sin(2.0 * kPi * u2);
  return {true_point.x_east + sigma_m_ * nx, true_point.y_north + sigma_m_ * ny};
}

EnuPoint filtered_fix(EnuPoint true_point, GnssNoiseModel& model, int count) {
  require(count >= 1, Errc::ValidationError, "fix count must be >= 1");
  EnuPoint sum{0.0, 0.0};
  for (int i = 0; i < count; ++i) sum = sum + model.sample(true_point);
  return {sum.x_east / count, sum.y_north / count};
}

std::vector<EnuPoint> batch_wgs84_to_enu_serial(const Wgs84Point& anchor,
                                                std::span<const Wgs84Point> pts) {
  std::vector<EnuPoint> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) out[i] = wgs84_to_enu(anchor, pts[i]);
  return out;
}

std::vector<EnuPoint> batch_wgs84_to_enu(const Wgs84Point& anchor,
                                         std::span<const Wgs84Point> pts,
                                         bool parallel) {
  std::vector<EnuPoint> out(pts.size());
  par::parallel_for(static_cast<std::int64_t>(pts.size()),
                    [&](std::int64_t i) { out[i] = wgs84_to_enu(anchor, pts[i]); },
                    parallel);
  return out;
}

}  // namespace geodragon::geodesy
