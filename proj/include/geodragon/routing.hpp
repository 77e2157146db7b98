#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "geodragon/geodesy.hpp"
#include "geodragon/kb.hpp"

namespace geodragon::routing {

using geodesy::EnuPoint;
using geodesy::HeadingBias;

// Road graph projected into the anchor ENU frame; edge weights are planar
// segment lengths so route lengths are consistent with waypoint geometry.
class EnuRoadGraph {
 public:
  struct Edge {
    int u = 0;
    int v = 0;
    double length = 0.0;
  };

  static EnuRoadGraph project(const kb::KnowledgeBase& kb);
  static EnuRoadGraph project(const kb::RoadGraph& graph, const kb::Wgs84Point& anchor);

  std::size_t node_count() const { return points_.size(); }
  const std::vector<EnuPoint>& points() const { return points_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<std::vector<std::pair<int, double>>>& adjacency() const { return adj_; }
  std::int64_t node_id(int idx) const { return node_ids_[idx]; }

  void add_node(std::int64_t id, EnuPoint p);
  void add_edge_between(std::int64_t id_u, std::int64_t id_v);

  // Copy with every edge whose segment passes within clearance_m of a blocked
  // probe point removed (used by the replanning skill).
  EnuRoadGraph without_blocked_edges(std::span<const EnuPoint> blocked,
                                     double clearance_m) const;

 private:
  std::vector<EnuPoint> points_;
  std::vector<std::int64_t> node_ids_;
  std::map<std::int64_t, int> index_of_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adj_;  // (edge idx, length)
};

struct GlobalRoute {
  std::vector<EnuPoint> node_points;  // exact start, snapped path, exact goal
  double total_length_m = 0.0;
  EnuPoint goal;
};

// Snaps both endpoints to the nearest point on the graph (edge interiors
// included), then runs uniform-cost search. Raises Errc::Unreachable with the
// two components when no path exists.
GlobalRoute plan_route(const EnuRoadGraph& graph, EnuPoint start, EnuPoint goal);

// Polygon targets project to the nearest contour point from the robot; point
// targets pass through.
EnuPoint project_goal(const kb::KnowledgeBase& kb, const kb::OsmEntity& entity,
                      EnuPoint robot);

struct SamplerConfig {
  double delta_fine_m = 3.0;
  double delta_coarse_m = 20.0;
  double kappa_thresh_rad_per_m = 0.1;
  // Length cap of the heading-change window: curvature is measured per unit
  // distance over at most this many meters of incident segment.
  double kappa_window_m = 10.0;
};

// |heading change at vertex i| divided by min(mean incident length, window).
double segment_curvature(std::span<const EnuPoint> points, std::size_t i,
                         double window_m = 10.0);

// Resamples each inter-vertex segment at the fine interval when either
// bounding vertex exceeds the curvature threshold, else at the coarse
// interval. Original vertices are always retained and the final point is the
// goal.
std::vector<EnuPoint> adaptive_sample(const GlobalRoute& route, const SamplerConfig& cfg);

// Element-wise rigid transform into the local navigation frame.
std::vector<EnuPoint> localize_waypoints(std::span<const EnuPoint> samples, EnuPoint p_end,
                                         HeadingBias bias);

std::string route_to_geojson(const GlobalRoute& route, const kb::KnowledgeBase& kb);
std::string waypoints_to_csv(std::span<const EnuPoint> waypoints);

}  // namespace geodragon::routing
