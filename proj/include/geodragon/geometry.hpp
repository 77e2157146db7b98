#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "geodragon/geodesy.hpp"

namespace geodragon::geom {

using geodesy::EnuPoint;

// Simple polygon in a local ENU frame. Stored as an open ring, normalized to
// counter-clockwise order with the duplicate closing vertex removed.
struct Polygon {
  std::vector<EnuPoint> v;

  // Normalizes and validates: >= 3 distinct vertices, non-self-intersecting,
  // non-zero area.
  static Polygon make(std::vector<EnuPoint> ring);

  double signed_area() const;
  double area() const { return std::abs(signed_area()); }
  EnuPoint centroid() const;
  std::size_t size() const { return v.size(); }
};

EnuPoint closest_point_on_segment(EnuPoint a, EnuPoint b, EnuPoint p);

// Ray-casting parity test; boundary points count as inside.
bool point_in_polygon(EnuPoint p, const Polygon& poly);

// Closest boundary point; ties broken by the lowest edge index of the
// normalized ring. Interior points still map to the boundary.
EnuPoint nearest_point_on_polygon(const Polygon& poly, EnuPoint p);

// Distance to the boundary polyline (positive inside and outside).
double boundary_distance(const Polygon& poly, EnuPoint p);

// Distance to the closed region: 0 inside or on the boundary.
double region_distance(const Polygon& poly, EnuPoint p);

// Membership in the polygon dilated by buffer_m (Euclidean offset).
bool within_buffer(const Polygon& poly, EnuPoint p, double buffer_m);

// Batch point-in-polygon kernels; the serial variant is the reference.
std::vector<std::uint8_t> points_in_polygon_serial(std::span<const EnuPoint> pts,
                                                   const Polygon& poly);
std::vector<std::uint8_t> points_in_polygon(std::span<const EnuPoint> pts,
                                            const Polygon& poly,
                                            bool parallel = true);

}  // namespace geodragon::geom
