#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "geodragon/geodesy.hpp"
#include "geodragon/geometry.hpp"

namespace geodragon::kb {

using geodesy::EnuPoint;
using geodesy::Wgs84Point;

// Open geodetic ring, CCW after normalization.
struct GeoRing {
  std::vector<Wgs84Point> ring;
};

using EntityGeometry = std::variant<Wgs84Point, GeoRing>;

struct OsmEntity {
  std::int64_t osm_id = 0;
  std::string name;
  std::string category;  // assigned by assign_entity_ids
  EntityGeometry geometry;
  std::map<std::string, std::string> tags;

  bool is_polygon() const { return std::holds_alternative<GeoRing>(geometry); }
};

// Hierarchical identifier "Category-Name"; both parts are stored in canonical
// token spelling so the rendered string round-trips through the tokenizer.
struct EntityId {
  std::string category_part;
  std::string name_part;

  std::string rendered() const { return category_part + "-" + name_part; }
};

struct RoadGraph {
  struct Edge {
    std::int64_t u = 0;
    std::int64_t v = 0;
    double length_m = 0.0;  // geodesic length of the segment
  };
  std::map<std::int64_t, Wgs84Point> nodes;
  std::vector<Edge> edges;
};

// Ordered tag-match rules; first match wins, unmatched entities fall back to
// "Place". An explicit `category` tag always wins.
struct CategoryRule {
  std::string key;
  std::string value;  // "*" matches any value
  std::string category;
};

class CategoryRules {
 public:
  static CategoryRules defaults();
  static CategoryRules from_json(std::string_view json_text);

  std::string categorize(const std::map<std::string, std::string>& tags) const;
  const std::vector<CategoryRule>& rules() const { return rules_; }

  explicit CategoryRules(std::vector<CategoryRule> rules) : rules_(std::move(rules)) {}

 private:
  std::vector<CategoryRule> rules_;
};

// Immutable store of named entities plus the routable road graph. Built in two
// steps (parse, then id assignment); treated as read-only afterwards and safe
// to share across threads.
class KnowledgeBase {
 public:
  const std::map<std::int64_t, OsmEntity>& entities() const { return entities_; }
  const std::map<std::string, std::int64_t>& id_index() const { return id_index_; }
  const RoadGraph& road_graph() const { return road_graph_; }
  const Wgs84Point& enu_anchor() const { return enu_anchor_; }
  bool indexed() const { return !id_index_.empty(); }

  const OsmEntity& entity(std::int64_t osm_id) const;
  const OsmEntity* find_by_rendered_id(std::string_view rendered) const;
  const std::string& rendered_id_of(std::int64_t osm_id) const;

  EnuPoint to_enu(const Wgs84Point& p) const { return geodesy::wgs84_to_enu(enu_anchor_, p); }
  Wgs84Point to_wgs84(const EnuPoint& p) const { return geodesy::enu_to_wgs84(enu_anchor_, p); }

  // Footprint of a polygon entity projected into the anchor ENU frame.
  geom::Polygon entity_polygon_enu(const OsmEntity& e) const;
  // Point entities map to their location; polygon entities to their footprint.
  EnuPoint entity_anchor_enu(const OsmEntity& e) const;

 private:
  friend KnowledgeBase parse_osm_extract(std::string_view);
  friend KnowledgeBase parse_osm_jsonl(std::string_view);
  friend std::vector<EntityId> assign_entity_ids(KnowledgeBase&, const CategoryRules&);
  friend KnowledgeBase kb_from_json(std::string_view);

  std::map<std::int64_t, OsmEntity> entities_;
  std::map<std::string, std::int64_t> id_index_;
  std::map<std::int64_t, std::string> rendered_by_osm_;
  RoadGraph road_graph_;
  Wgs84Point enu_anchor_{};
};

// Parses the documented OSM XML subset (node/way/tag/nd). Named building ways
// become polygon entities, highway ways contribute road edges, named nodes
// with at least one other tag become point entities.
KnowledgeBase parse_osm_extract(std::string_view xml_bytes);

// Line-delimited JSON alternative with identical semantics.
KnowledgeBase parse_osm_jsonl(std::string_view text);

// Assigns "Category-Name" identifiers, disambiguating duplicate rendered ids
// with a "#<osm_id>" suffix on the name part. Populates the id index.
std::vector<EntityId> assign_entity_ids(KnowledgeBase& kb, const CategoryRules& rules);

// Versioned snapshot (kb.json).
std::string kb_to_json(const KnowledgeBase& kb);
KnowledgeBase kb_from_json(std::string_view text);

}  // namespace geodragon::kb
