#include "geodragon/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "geodragon/parallel.hpp"

namespace geodragon::geom {

namespace {

constexpr double kEps = 1e-12;
constexpr double kBoundaryEps = 1e-9;

bool nearly_equal(EnuPoint a, EnuPoint b) {
  return std::abs(a.x_east - b.x_east) < kEps && std::abs(a.y_north - b.y_north) < kEps;
}

double cross(EnuPoint o, EnuPoint a, EnuPoint b) {
  return (a.x_east - o.x_east) * (b.y_north - o.y_north) -
         (a.y_north - o.y_north) * (b.x_east - o.x_east);
}

bool on_segment_box(EnuPoint a, EnuPoint b, EnuPoint p) {
  return std::min(a.x_east, b.x_east) - kEps <= p.x_east &&
         p.x_east <= std::max(a.x_east, b.x_east) + kEps &&
         std::min(a.y_north, b.y_north) - kEps <= p.y_north &&
         p.y_north <= std::max(a.y_north, b.y_north) + kEps;
}

// Proper or touching intersection between segments ab and cd.
bool segments_intersect(EnuPoint a, EnuPoint b, EnuPoint c, EnuPoint d) {
  const double d1 = cross(c, d, a);
  const double d2 = cross(c, d, b);
  const double d3 = cross(a, b, c);
  const double d4 = cross(a, b, d);
  if (((d1 > kEps && d2 < -kEps) || (d1 < -kEps && d2 > kEps)) &&
      ((d3 > kEps && d4 < -kEps) || (d3 < -kEps && d4 > kEps)))
    return true;
  if (std::abs(d1) <= kEps && on_segment_box(c, d, a)) return true;
  if (std::abs(d2) <= kEps && on_segment_box(c, d, b)) return true;
  if (std::abs(d3) <= kEps && on_segment_box(a, b, c)) return true;
  if (std::abs(d4) <= kEps && on_segment_box(a, b, d)) return true;
  return false;
}

}  // namespace

Polygon Polygon::make(std::vector<EnuPoint> ring) {
  // Drop the duplicate closing vertex and any repeated consecutive vertices.
  std::vector<EnuPoint> v;
  for (const EnuPoint& p : ring) {
    require(std::isfinite(p.x_east) && std::isfinite(p.y_north), Errc::GeometryError,
            "non-finite polygon vertex");
    if (v.empty() || !nearly_equal(v.back(), p)) v.push_back(p);
  }
  if (v.size() >= 2 && nearly_equal(v.front(), v.back())) v.pop_back();
  require(v.size() >= 3, Errc::GeometryError,
          "polygon needs at least 3 distinct vertices, got ", v.size());

  Polygon poly{std::move(v)};
  require(poly.area() > kEps, Errc::GeometryError, "degenerate polygon with zero area");
  if (poly.signed_area() < 0.0) std::reverse(poly.v.begin(), poly.v.end());

  // Simple-polygon check: non-adjacent edges must not intersect.
  const std::size_t n = poly.v.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(poly.v[i], poly.v[(i + 1) % n], poly.v[j],
                             poly.v[(j + 1) % n]))
        raise(Errc::GeometryError, "self-intersecting polygon (edges ", i, " and ", j, ")");
    }
  }
  return poly;
}

double Polygon::signed_area() const {
  double acc = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const EnuPoint& a = v[i];
    const EnuPoint& b = v[(i + 1) % v.size()];
    acc += a.x_east * b.y_north - b.x_east * a.y_north;
  }
  return 0.5 * acc;
}

EnuPoint Polygon::centroid() const {
  double a = 0.0, cx = 0.0, cy = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const EnuPoint& p = v[i];
    const EnuPoint& q = v[(i + 1) % v.size()];
    const double w = p.x_east * q.y_north - q.x_east * p.y_north;
    a += w;
    cx += (p.x_east + q.x_east) * w;
    cy += (p.y_north + q.y_north) * w;
  }
  a *= 0.5;
  return {cx / (6.0 * a), cy / (6.0 * a)};
}

EnuPoint closest_point_on_segment(EnuPoint a, EnuPoint b, EnuPoint p) {
  const EnuPoint ab = b - a;
  const double len2 = ab.x_east * ab.x_east + ab.y_north * ab.y_north;
  if (len2 <= kEps) return a;
  double t = ((p.x_east - a.x_east) * ab.x_east + (p.y_north - a.y_north) * ab.y_north) / len2;
  t = std::clamp(t, 0.0, 1.0);
  return {a.x_east + t * ab.x_east, a.y_north + t * ab.y_north};
}

bool point_in_polygon(EnuPoint p, const Polygon& poly) {
  const std::size_t n = poly.v.size();
  // Boundary counts as inside.
  for (std::size_t i = 0; i < n; ++i) {
    const EnuPoint q = closest_point_on_segment(poly.v[i], poly.v[(i + 1) % n], p);
    if (distance(p, q) <= kBoundaryEps) return true;
  }
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const EnuPoint& a = poly.v[i];
    const EnuPoint& b = poly.v[j];
    const bool straddles = (a.y_north > p.y_north) != (b.y_north > p.y_north);
    if (straddles) {
      const double x_cross =
          (b.x_east - a.x_east) * (p.y_north - a.y_north) / (b.y_north - a.y_north) +
          a.x_east;
      if (p.x_east < x_cross) inside = !inside;
    }
  }
  return inside;
}

EnuPoint nearest_point_on_polygon(const Polygon& poly, EnuPoint p) {
  require(poly.v.size() >= 3 && poly.area() > kEps, Errc::GeometryError,
          "degenerate polygon");
  EnuPoint best{};
  double best_d = std::numeric_limits<double>::infinity();
  const std::size_t n = poly.v.size();
  for (std::size_t i = 0; i < n; ++i) {
    const EnuPoint q = closest_point_on_segment(poly.v[i], poly.v[(i + 1) % n], p);
    const double d = distance(p, q);
    if (d < best_d - kEps) {  // strict improvement keeps the lowest edge index on ties
      best_d = d;
      best = q;
    }
  }
  return best;
}

double boundary_distance(const Polygon& poly, EnuPoint p) {
  return distance(p, nearest_point_on_polygon(poly, p));
}

double region_distance(const Polygon& poly, EnuPoint p) {
  if (point_in_polygon(p, poly)) return 0.0;
  return boundary_distance(poly, p);
}

bool within_buffer(const Polygon& poly, EnuPoint p, double buffer_m) {
  return region_distance(poly, p) <= buffer_m;
}

std::vector<std::uint8_t> points_in_polygon_serial(std::span<const EnuPoint> pts,
                                                   const Polygon& poly) {
  std::vector<std::uint8_t> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i)
    out[i] = point_in_polygon(pts[i], poly) ? 1 : 0;
  return out;
}

std::vector<std::uint8_t> points_in_polygon(std::span<const EnuPoint> pts,
                                            const Polygon& poly, bool parallel) {
  std::vector<std::uint8_t> out(pts.size());
  par::parallel_for(static_cast<std::int64_t>(pts.size()),
                    [&](std::int64_t i) { out[i] = point_in_polygon(pts[i], poly) ? 1 : 0; },
                    parallel);
  return out;
}

}  // namespace geodragon::geom
