#include "geodragon/routing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <sstream>

#include <json.hpp>

#include "geodragon/geometry.hpp"

namespace geodragon::routing {

namespace {
constexpr double kTinyLen = 1e-9;
}

void EnuRoadGraph::add_node(std::int64_t id, EnuPoint p) {
  if (index_of_.count(id)) return;
  index_of_[id] = static_cast<int>(points_.size());
  points_.push_back(p);
  node_ids_.push_back(id);
  adj_.emplace_back();
}

void EnuRoadGraph::add_edge_between(std::int64_t id_u, std::int64_t id_v) {
  const int u = index_of_.at(id_u);
  const int v = index_of_.at(id_v);
  const double len = distance(points_[u], points_[v]);
  if (len <= kTinyLen) return;
  const int e = static_cast<int>(edges_.size());
  edges_.push_back({u, v, len});
  adj_[u].emplace_back(e, len);
  adj_[v].emplace_back(e, len);
}

EnuRoadGraph EnuRoadGraph::project(const kb::KnowledgeBase& kb) {
  return project(kb.road_graph(), kb.enu_anchor());
}

EnuRoadGraph EnuRoadGraph::project(const kb::RoadGraph& graph, const kb::Wgs84Point& anchor) {
  EnuRoadGraph g;
  for (const auto& [id, p] : graph.nodes) g.add_node(id, geodesy::wgs84_to_enu(anchor, p));
  for (const auto& e : graph.edges) g.add_edge_between(e.u, e.v);
  return g;
}

EnuRoadGraph EnuRoadGraph::without_blocked_edges(std::span<const EnuPoint> blocked,
                                                 double clearance_m) const {
  EnuRoadGraph g;
  g.points_ = points_;
  g.node_ids_ = node_ids_;
  g.index_of_ = index_of_;
  g.adj_.assign(points_.size(), {});
  for (const Edge& e : edges_) {
    bool keep = true;
    for (const EnuPoint& p : blocked) {
      const EnuPoint q = geom::closest_point_on_segment(points_[e.u], points_[e.v], p);
      if (distance(p, q) <= clearance_m) {
        keep = false;
        break;
      }
    }
    if (!keep) continue;
    const int idx = static_cast<int>(g.edges_.size());
    g.edges_.push_back(e);
    g.adj_[e.u].emplace_back(idx, e.length);
    g.adj_[e.v].emplace_back(idx, e.length);
  }
  return g;
}

namespace {

struct Snap {
  int edge = -1;      // snapped edge, or -1 when snapped exactly onto a node
  int node = -1;      // valid when edge == -1
  double t = 0.0;     // parameter along the edge (from u)
  EnuPoint point{};
};

Snap snap_to_graph(const EnuRoadGraph& g, EnuPoint p) {
  require(!g.edges().empty() || g.node_count() > 0, Errc::Unreachable,
          "road graph is empty");
  Snap best;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const auto& edge = g.edges()[e];
    const EnuPoint a = g.points()[edge.u];
    const EnuPoint b = g.points()[edge.v];
    const EnuPoint q = geom::closest_point_on_segment(a, b, p);
    const double d = distance(p, q);
    if (d < best_d) {
      best_d = d;
      best.edge = static_cast<int>(e);
      best.point = q;
      const double len = distance(a, b);
      best.t = len > 0 ? distance(a, q) / len : 0.0;
      best.node = -1;
    }
  }
  // Isolated nodes can still be the nearest feature.
  for (std::size_t n = 0; n < g.node_count(); ++n) {
    const double d = distance(p, g.points()[n]);
    if (d < best_d) {
      best_d = d;
      best.edge = -1;
      best.node = static_cast<int>(n);
      best.point = g.points()[n];
    }
  }
  if (best.edge >= 0) {
    // Collapse near-endpoint snaps onto the node itself.
    const auto& edge = g.edges()[best.edge];
    if (best.t * edge.length <= kTinyLen) {
      best.node = edge.u;
      best.edge = -1;
      best.point = g.points()[edge.u];
    } else if ((1.0 - best.t) * edge.length <= kTinyLen) {
      best.node = edge.v;
      best.edge = -1;
      best.point = g.points()[edge.v];
    }
  }
  return best;
}

std::vector<int> component_of(const EnuRoadGraph& g, int start) {
  std::vector<int> out;
  std::vector<bool> seen(g.node_count(), false);
  std::vector<int> stack{start};
  seen[start] = true;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    out.push_back(u);
    for (const auto& [e, len] : g.adjacency()[u]) {
      const auto& edge = g.edges()[e];
      const int v = edge.u == u ? edge.v : edge.u;
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

[[noreturn]] void raise_unreachable(const EnuRoadGraph& g, int a, int b) {
  auto describe = [&](int n) {
    const std::vector<int> comp = component_of(g, n);
    std::ostringstream os;
    os << "{size " << comp.size() << ", nodes";
    for (std::size_t i = 0; i < comp.size() && i < 5; ++i) os << " " << g.node_id(comp[i]);
    if (comp.size() > 5) os << " ...";
    os << "}";
    return os.str();
  };
  raise(Errc::Unreachable, "no route between components ", describe(a), " and ",
        describe(b));
}

}  // namespace

GlobalRoute plan_route(const EnuRoadGraph& graph, EnuPoint start, EnuPoint goal) {
  const Snap s = snap_to_graph(graph, start);
  const Snap t = snap_to_graph(graph, goal);

  // Virtual endpoints: seeds carry the partial-edge offsets.
  const std::size_t n = graph.node_count();
  std::vector<double> dist(n, std::numeric_limits<double>::infinity());
  std::vector<int> prev(n, -1);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;

  auto seed = [&](const Snap& snap) {
    if (snap.edge < 0) {
      if (dist[snap.node] > 0.0) {
        dist[snap.node] = 0.0;
        heap.emplace(0.0, snap.node);
      }
    } else {
      const auto& e = graph.edges()[snap.edge];
      const double du = snap.t * e.length;
      const double dv = (1.0 - snap.t) * e.length;
      if (du < dist[e.u]) {
        dist[e.u] = du;
        heap.emplace(du, e.u);
      }
      if (dv < dist[e.v]) {
        dist[e.v] = dv;
        heap.emplace(dv, e.v);
      }
    }
  };
  seed(s);

  std::vector<bool> settled(n, false);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (settled[u]) continue;
    settled[u] = true;
    for (const auto& [eidx, len] : graph.adjacency()[u]) {
      const auto& e = graph.edges()[eidx];
      const int v = e.u == u ? e.v : e.u;
      const double nd = d + len;
      if (nd < dist[v]) {
        dist[v] = nd;
        prev[v] = u;
        heap.emplace(nd, v);
      }
    }
  }

  // Best arrival through the goal's snapped feature.
  double best_total = std::numeric_limits<double>::infinity();
  int arrive_node = -1;
  if (t.edge < 0) {
    best_total = dist[t.node];
    arrive_node = t.node;
  } else {
    const auto& e = graph.edges()[t.edge];
    const double via_u = dist[e.u] + t.t * e.length;
    const double via_v = dist[e.v] + (1.0 - t.t) * e.length;
    if (via_u <= via_v) {
      best_total = via_u;
      arrive_node = e.u;
    } else {
      best_total = via_v;
      arrive_node = e.v;
    }
  }
  // Both endpoints snapped onto the same edge: the direct along-edge segment
  // competes with every path through the graph.
  bool direct_on_edge = false;
  if (s.edge >= 0 && s.edge == t.edge) {
    const double direct = std::abs(s.t - t.t) * graph.edges()[s.edge].length;
    if (direct <= best_total) {
      best_total = direct;
      direct_on_edge = true;
    }
  }
  if (!direct_on_edge && !std::isfinite(best_total)) {
    const int a = s.edge < 0 ? s.node : graph.edges()[s.edge].u;
    const int b = t.edge < 0 ? t.node : graph.edges()[t.edge].u;
    raise_unreachable(graph, a, b);
  }

  std::vector<EnuPoint> pts;
  pts.push_back(start);
  auto push_distinct = [&pts](EnuPoint p) {
    if (distance(pts.back(), p) > kTinyLen) pts.push_back(p);
  };
  push_distinct(s.point);
  if (!direct_on_edge) {
    std::vector<int> chain;
    for (int u = arrive_node; u != -1; u = prev[u]) chain.push_back(u);
    std::reverse(chain.begin(), chain.end());
    for (int u : chain) push_distinct(graph.points()[u]);
  }
  push_distinct(t.point);
  push_distinct(goal);
  if (pts.size() == 1) pts.push_back(goal);  // start == goal degenerate case

  GlobalRoute route;
  route.node_points = std::move(pts);
  route.goal = goal;
  for (std::size_t i = 0; i + 1 < route.node_points.size(); ++i)
    route.total_length_m += distance(route.node_points[i], route.node_points[i + 1]);
  return route;
}

EnuPoint project_goal(const kb::KnowledgeBase& kb, const kb::OsmEntity& entity,
                      EnuPoint robot) {
  if (entity.is_polygon())
    return geom::nearest_point_on_polygon(kb.entity_polygon_enu(entity), robot);
  return kb.entity_anchor_enu(entity);
}

double segment_curvature(std::span<const EnuPoint> points, std::size_t i,
                         double window_m) {
  require(points.size() >= 3 && i >= 1 && i + 1 < points.size(), Errc::ValidationError,
          "curvature index must name an interior vertex");
  const EnuPoint d1 = points[i] - points[i - 1];
  const EnuPoint d2 = points[i + 1] - points[i];
  const double l1 = d1.norm();
  const double l2 = d2.norm();
  require(l1 > kTinyLen && l2 > kTinyLen, Errc::DegenerateSegment,
          "zero-length segment incident to vertex ", i);
  const double dphi = geodesy::normalize_angle(std::atan2(d2.y_north, d2.x_east) -
                                               std::atan2(d1.y_north, d1.x_east));
  const double span = std::min(0.5 * (l1 + l2), window_m);
  return std::abs(dphi) / span;
}

std::vector<EnuPoint> adaptive_sample(const GlobalRoute& route, const SamplerConfig& cfg) {
  require(cfg.delta_fine_m > 0 && cfg.delta_fine_m < cfg.delta_coarse_m, Errc::ConfigError,
          "need 0 < delta_fine < delta_coarse");
  const std::vector<EnuPoint>& pts = route.node_points;
  if (pts.size() < 2) return pts;

  // Flag interior vertices above the curvature threshold.
  std::vector<bool> sharp(pts.size(), false);
  for (std::size_t i = 1; i + 1 < pts.size(); ++i)
    sharp[i] = segment_curvature(pts, i, cfg.kappa_window_m) > cfg.kappa_thresh_rad_per_m;

  std::vector<EnuPoint> out;
  out.push_back(pts.front());
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const EnuPoint a = pts[i];
    const EnuPoint b = pts[i + 1];
    const double len = distance(a, b);
    const double step = (sharp[i] || sharp[i + 1]) ? cfg.delta_fine_m : cfg.delta_coarse_m;
    // Interior points at multiples of the step; the epsilon keeps resampling
    // idempotent when the segment length is an exact multiple.
    for (double d = step; d < len - 1e-9; d += step) {
      const double t = d / len;
      out.push_back({a.x_east + t * (b.x_east - a.x_east),
                     a.y_north + t * (b.y_north - a.y_north)});
    }
    out.push_back(b);
  }
  return out;
}

std::vector<EnuPoint> localize_waypoints(std::span<const EnuPoint> samples, EnuPoint p_end,
                                         HeadingBias bias) {
  std::vector<EnuPoint> out;
  out.reserve(samples.size());
  for (const EnuPoint& p : samples)
    out.push_back(geodesy::global_to_local_waypoint(p, p_end, bias));
  return out;
}

std::string route_to_geojson(const GlobalRoute& route, const kb::KnowledgeBase& kb) {
  nlohmann::json coords = nlohmann::json::array();
  for (const EnuPoint& p : route.node_points) {
    const kb::Wgs84Point w = kb.to_wgs84(p);
    coords.push_back({w.lon, w.lat});
  }
  nlohmann::json doc = {
      {"type", "Feature"},
      {"properties", {{"total_length_m", route.total_length_m}}},
      {"geometry", {{"type", "LineString"}, {"coordinates", std::move(coords)}}},
  };
  return doc.dump(2) + "\n";
}

std::string waypoints_to_csv(std::span<const EnuPoint> waypoints) {
  std::ostringstream os;
  os << "x_east,y_north\n";
  os.precision(9);
  for (const EnuPoint& p : waypoints) os << p.x_east << "," << p.y_north << "\n";
  return os.str();
}

}  // namespace geodragon::routing
