#include "geodragon/kb.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "geodragon/tokens.hpp"
#include "geodragon/xml.hpp"

namespace geodragon::kb {

using nlohmann::json;

namespace {

double haversine_m(const Wgs84Point& a, const Wgs84Point& b) {
  const double lat1 = a.lat * geodesy::kDegToRad;
  const double lat2 = b.lat * geodesy::kDegToRad;
  const double dlat = lat2 - lat1;
  const double dlon = (b.lon - a.lon) * geodesy::kDegToRad;
  const double s = std::sin(dlat / 2.0) * std::sin(dlat / 2.0) +
                   std::cos(lat1) * std::cos(lat2) * std::sin(dlon / 2.0) * std::sin(dlon / 2.0);
  return 2.0 * geodesy::kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(s)));
}

struct RawWay {
  std::int64_t id = 0;
  std::vector<std::int64_t> refs;
  std::map<std::string, std::string> tags;
};

struct RawExtract {
  std::map<std::int64_t, Wgs84Point> nodes;
  std::map<std::int64_t, std::map<std::string, std::string>> node_tags;
  std::vector<RawWay> ways;
};

// Normalizes a geodetic ring to CCW with the closing vertex dropped; validates
// shape in a ring-local ENU frame.
GeoRing normalize_ring(std::vector<Wgs84Point> ring, std::int64_t way_id) {
  if (ring.size() >= 2 && ring.front().lat == ring.back().lat &&
      ring.front().lon == ring.back().lon)
    ring.pop_back();
  require(ring.size() >= 3, Errc::GeometryError, "way ", way_id,
          " has fewer than 3 distinct vertices");

  const Wgs84Point local_anchor = ring.front();
  std::vector<EnuPoint> enu;
  enu.reserve(ring.size());
  for (const auto& p : ring) enu.push_back(geodesy::wgs84_to_enu(local_anchor, p));
  geom::Polygon poly;
  try {
    poly = geom::Polygon::make(enu);
  } catch (const Error& e) {
    raise(Errc::GeometryError, "way ", way_id, ": ", e.what());
  }

  // Shoelace in the local frame decides orientation of the source ring.
  double acc = 0.0;
  for (std::size_t i = 0; i < enu.size(); ++i) {
    const EnuPoint& p = enu[i];
    const EnuPoint& q = enu[(i + 1) % enu.size()];
    acc += p.x_east * q.y_north - q.x_east * p.y_north;
  }
  if (acc < 0.0) std::reverse(ring.begin(), ring.end());
  return GeoRing{std::move(ring)};
}

KnowledgeBase build_kb(RawExtract raw) {
  KnowledgeBase kb;
  require(!raw.nodes.empty(), Errc::EmptyCorpus, "extract contains no nodes");

  double lat_min = 90.0, lat_max = -90.0, lon_min = 180.0, lon_max = -180.0;
  for (const auto& [id, p] : raw.nodes) {
    lat_min = std::min(lat_min, p.lat);
    lat_max = std::max(lat_max, p.lat);
    lon_min = std::min(lon_min, p.lon);
    lon_max = std::max(lon_max, p.lon);
  }
  kb.enu_anchor_ = {(lat_min + lat_max) / 2.0, (lon_min + lon_max) / 2.0};

  std::size_t building_count = 0;
  for (const RawWay& way : raw.ways) {
    std::vector<Wgs84Point> pts;
    pts.reserve(way.refs.size());
    for (std::int64_t ref : way.refs) {
      auto it = raw.nodes.find(ref);
      require(it != raw.nodes.end(), Errc::ReferentialIntegrity, "way ", way.id,
              " references missing node ", ref);
      pts.push_back(it->second);
    }

    const auto building = way.tags.find("building");
    const auto name = way.tags.find("name");
    const auto highway = way.tags.find("highway");

    if (building != way.tags.end() && name != way.tags.end() && !name->second.empty()) {
      OsmEntity e;
      e.osm_id = way.id;
      e.name = name->second;
      e.geometry = normalize_ring(pts, way.id);
      e.tags = way.tags;
      require(kb.entities_.emplace(e.osm_id, std::move(e)).second, Errc::DuplicateId,
              "duplicate osm id ", way.id);
      ++building_count;
    }

    if (highway != way.tags.end()) {
      for (std::size_t i = 0; i + 1 < way.refs.size(); ++i) {
        const std::int64_t u = way.refs[i];
        const std::int64_t v = way.refs[i + 1];
        if (u == v) continue;
        const double len = haversine_m(raw.nodes.at(u), raw.nodes.at(v));
        if (len <= 0.0) continue;
        kb.road_graph_.nodes[u] = raw.nodes.at(u);
        kb.road_graph_.nodes[v] = raw.nodes.at(v);
        kb.road_graph_.edges.push_back({u, v, len});
      }
    }
  }

  // Named nodes with at least one non-name tag become point entities.
  for (const auto& [id, tags] : raw.node_tags) {
    const auto name = tags.find("name");
    if (name == tags.end() || name->second.empty() || tags.size() < 2) continue;
    if (kb.entities_.count(id)) continue;
    OsmEntity e;
    e.osm_id = id;
    e.name = name->second;
    e.geometry = raw.nodes.at(id);
    e.tags = tags;
    kb.entities_.emplace(id, std::move(e));
  }

  require(building_count > 0, Errc::EmptyCorpus, "extract contains no named buildings");
  return kb;
}

}  // namespace

KnowledgeBase parse_osm_extract(std::string_view xml_bytes) {
  const xml::Element root = xml::parse_document(xml_bytes);
  require(root.name == "osm", Errc::ParseError, "root element must be <osm>, got <",
          root.name, "> at ", root.location());

  RawExtract raw;
  auto parse_tags = [](const xml::Element& el) {
    std::map<std::string, std::string> tags;
    for (const xml::Element& child : el.children) {
      if (child.name != "tag") continue;
      const std::string* k = child.attr("k");
      const std::string* v = child.attr("v");
      require(k && v, Errc::ParseError, "<tag> missing k/v at ", child.location());
      tags[*k] = *v;
    }
    return tags;
  };

  for (const xml::Element& el : root.children) {
    if (el.name == "node") {
      const std::string* id = el.attr("id");
      const std::string* lat = el.attr("lat");
      const std::string* lon = el.attr("lon");
      require(id && lat && lon, Errc::ParseError, "<node> missing id/lat/lon at ",
              el.location());
      std::int64_t nid = 0;
      double plat = 0.0, plon = 0.0;
      try {
        nid = std::stoll(*id);
        plat = std::stod(*lat);
        plon = std::stod(*lon);
      } catch (const std::exception&) {
        raise(Errc::ParseError, "bad numeric attribute on <node> at ", el.location());
      }
      raw.nodes[nid] = Wgs84Point::checked(plat, plon);
      auto tags = parse_tags(el);
      if (!tags.empty()) raw.node_tags[nid] = std::move(tags);
    } else if (el.name == "way") {
      const std::string* id = el.attr("id");
      require(id, Errc::ParseError, "<way> missing id at ", el.location());
      RawWay way;
      try {
        way.id = std::stoll(*id);
      } catch (const std::exception&) {
        raise(Errc::ParseError, "bad way id at ", el.location());
      }
      for (const xml::Element& child : el.children) {
        if (child.name == "nd") {
          const std::string* ref = child.attr("ref");
          require(ref, Errc::ParseError, "<nd> missing ref at ", child.location());
          try {
            way.refs.push_back(std::stoll(*ref));
          } catch (const std::exception&) {
            raise(Errc::ParseError, "bad nd ref at ", child.location());
          }
        }
      }
      way.tags = parse_tags(el);
      raw.ways.push_back(std::move(way));
    }
    // Relations and anything else in the subset are ignored.
  }
  return build_kb(std::move(raw));
}

KnowledgeBase parse_osm_jsonl(std::string_view text) {
  RawExtract raw;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      raise(Errc::ParseError, "jsonl line ", line_no, ": ", e.what());
    }
    try {
      const std::string type = rec.at("type").get<std::string>();
      std::map<std::string, std::string> tags;
      if (rec.contains("tags"))
        tags = rec["tags"].get<std::map<std::string, std::string>>();
      if (type == "node") {
        const auto id = rec.at("id").get<std::int64_t>();
        raw.nodes[id] = Wgs84Point::checked(rec.at("lat").get<double>(),
                                            rec.at("lon").get<double>());
        if (!tags.empty()) raw.node_tags[id] = std::move(tags);
      } else if (type == "way") {
        RawWay way;
        way.id = rec.at("id").get<std::int64_t>();
        way.refs = rec.at("nodes").get<std::vector<std::int64_t>>();
        way.tags = std::move(tags);
        raw.ways.push_back(std::move(way));
      } else {
        raise(Errc::ParseError, "jsonl line ", line_no, ": unknown record type '", type, "'");
      }
    } catch (const json::exception& e) {
      raise(Errc::ParseError, "jsonl line ", line_no, ": ", e.what());
    }
  }
  return build_kb(std::move(raw));
}

CategoryRules CategoryRules::defaults() {
  return CategoryRules({
      {"amenity", "library", "Study Area"},
      {"amenity", "restaurant", "Dining"},
      {"amenity", "cafe", "Dining"},
      {"amenity", "food_court", "Dining"},
      {"amenity", "fast_food", "Dining"},
      {"amenity", "canteen", "Dining"},
      {"building", "university", "Teaching Area"},
      {"building", "school", "Teaching Area"},
      {"building", "college", "Teaching Area"},
      {"building", "dormitory", "Dormitory Area"},
      {"building", "residential", "Dormitory Area"},
      {"building", "sports_hall", "Sports Area"},
      {"leisure", "sports_centre", "Sports Area"},
      {"leisure", "stadium", "Sports Area"},
      {"amenity", "clinic", "Medical Area"},
      {"amenity", "hospital", "Medical Area"},
      {"building", "government", "Administrative Area"},
      {"office", "*", "Administrative Area"},
  });
}

CategoryRules CategoryRules::from_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::exception& e) {
    raise(Errc::ConfigError, "category rules: ", e.what());
  }
  std::vector<CategoryRule> rules;
  for (const json& r : doc.at("rules")) {
    rules.push_back({r.at("key").get<std::string>(), r.at("value").get<std::string>(),
                     r.at("category").get<std::string>()});
  }
  return CategoryRules(std::move(rules));
}

std::string CategoryRules::categorize(const std::map<std::string, std::string>& tags) const {
  // A curated `category` tag overrides the rule table.
  if (auto it = tags.find("category"); it != tags.end() && !it->second.empty())
    return it->second;
  for (const CategoryRule& rule : rules_) {
    auto it = tags.find(rule.key);
    if (it == tags.end()) continue;
    if (rule.value == "*" || rule.value == it->second) return rule.category;
  }
  return "Place";
}

std::vector<EntityId> assign_entity_ids(KnowledgeBase& kb, const CategoryRules& rules) {
  std::map<std::int64_t, EntityId> ids;
  std::map<std::string, std::vector<std::int64_t>> by_rendered;
  for (auto& [osm_id, entity] : kb.entities_) {
    require(!entity.name.empty(), Errc::ValidationError, "entity ", osm_id, " has no name");
    entity.category = rules.categorize(entity.tags);
    EntityId id{tokens::canonicalize(entity.category), tokens::canonicalize(entity.name)};
    by_rendered[id.rendered()].push_back(osm_id);
    ids.emplace(osm_id, std::move(id));
  }

  // Disambiguate rendered collisions with an osm-id suffix on the name part.
  for (const auto& [rendered, members] : by_rendered) {
    if (members.size() < 2) continue;
    for (std::int64_t osm_id : members)
      ids.at(osm_id).name_part += "#" + std::to_string(osm_id);
  }

  kb.id_index_.clear();
  kb.rendered_by_osm_.clear();
  std::vector<EntityId> out;
  out.reserve(ids.size());
  for (const auto& [osm_id, id] : ids) {
    const std::string rendered = id.rendered();
    require(kb.id_index_.emplace(rendered, osm_id).second, Errc::DuplicateId,
            "rendered id collision after disambiguation: ", rendered);
    kb.rendered_by_osm_.emplace(osm_id, rendered);
    out.push_back(id);
  }
  return out;
}

const OsmEntity& KnowledgeBase::entity(std::int64_t osm_id) const {
  auto it = entities_.find(osm_id);
  require(it != entities_.end(), Errc::ValidationError, "unknown osm id ", osm_id);
  return it->second;
}

const OsmEntity* KnowledgeBase::find_by_rendered_id(std::string_view rendered) const {
  auto it = id_index_.find(std::string(rendered));
  if (it == id_index_.end()) return nullptr;
  return &entities_.at(it->second);
}

const std::string& KnowledgeBase::rendered_id_of(std::int64_t osm_id) const {
  auto it = rendered_by_osm_.find(osm_id);
  require(it != rendered_by_osm_.end(), Errc::ValidationError,
          "entity ", osm_id, " has no assigned id (kb not indexed)");
  return it->second;
}

geom::Polygon KnowledgeBase::entity_polygon_enu(const OsmEntity& e) const {
  const GeoRing* ring = std::get_if<GeoRing>(&e.geometry);
  require(ring != nullptr, Errc::GeometryError, "entity ", e.osm_id, " is not a polygon");
  std::vector<EnuPoint> enu;
  enu.reserve(ring->ring.size());
  for (const auto& p : ring->ring) enu.push_back(to_enu(p));
  return geom::Polygon::make(std::move(enu));
}

EnuPoint KnowledgeBase::entity_anchor_enu(const OsmEntity& e) const {
  if (const Wgs84Point* p = std::get_if<Wgs84Point>(&e.geometry)) return to_enu(*p);
  return entity_polygon_enu(e).centroid();
}

std::string kb_to_json(const KnowledgeBase& kb) {
  json doc;
  doc["format_version"] = 1;
  doc["enu_anchor"] = {{"lat", kb.enu_anchor().lat}, {"lon", kb.enu_anchor().lon}};

  json entities = json::array();
  for (const auto& [osm_id, e] : kb.entities()) {
    json je;
    je["osm_id"] = osm_id;
    je["name"] = e.name;
    je["category"] = e.category;
    if (kb.indexed()) je["id"] = kb.rendered_id_of(osm_id);
    if (const Wgs84Point* p = std::get_if<Wgs84Point>(&e.geometry)) {
      je["geometry"] = {{"type", "point"}, {"lat", p->lat}, {"lon", p->lon}};
    } else {
      const GeoRing& ring = std::get<GeoRing>(e.geometry);
      json coords = json::array();
      for (const auto& p : ring.ring) coords.push_back({p.lat, p.lon});
      je["geometry"] = {{"type", "polygon"}, {"ring", std::move(coords)}};
    }
    je["tags"] = e.tags;
    entities.push_back(std::move(je));
  }
  doc["entities"] = std::move(entities);

  json nodes = json::array();
  for (const auto& [id, p] : kb.road_graph().nodes)
    nodes.push_back({{"id", id}, {"lat", p.lat}, {"lon", p.lon}});
  json edges = json::array();
  for (const auto& e : kb.road_graph().edges)
    edges.push_back({e.u, e.v, e.length_m});
  doc["road_graph"] = {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}};
  return doc.dump(2) + "\n";
}

KnowledgeBase kb_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    raise(Errc::ParseError, "kb snapshot: ", e.what());
  }
  try {
    require(doc.at("format_version").get<int>() == 1, Errc::ParseError,
            "unsupported kb format version");
    KnowledgeBase kb;
    kb.enu_anchor_ = Wgs84Point::checked(doc.at("enu_anchor").at("lat").get<double>(),
                                         doc.at("enu_anchor").at("lon").get<double>());
    for (const json& je : doc.at("entities")) {
      OsmEntity e;
      e.osm_id = je.at("osm_id").get<std::int64_t>();
      e.name = je.at("name").get<std::string>();
      e.category = je.value("category", "");
      const json& g = je.at("geometry");
      if (g.at("type") == "point") {
        e.geometry = Wgs84Point::checked(g.at("lat").get<double>(), g.at("lon").get<double>());
      } else {
        GeoRing ring;
        for (const json& c : g.at("ring"))
          ring.ring.push_back(Wgs84Point::checked(c.at(0).get<double>(), c.at(1).get<double>()));
        e.geometry = std::move(ring);
      }
      if (je.contains("tags"))
        e.tags = je["tags"].get<std::map<std::string, std::string>>();
      if (je.contains("id")) {
        const std::string rendered = je["id"].get<std::string>();
        require(kb.id_index_.emplace(rendered, e.osm_id).second, Errc::DuplicateId,
                "duplicate id in snapshot: ", rendered);
        kb.rendered_by_osm_.emplace(e.osm_id, rendered);
      }
      kb.entities_.emplace(e.osm_id, std::move(e));
    }
    const json& rg = doc.at("road_graph");
    for (const json& n : rg.at("nodes"))
      kb.road_graph_.nodes[n.at("id").get<std::int64_t>()] =
          Wgs84Point::checked(n.at("lat").get<double>(), n.at("lon").get<double>());
    for (const json& e : rg.at("edges"))
      kb.road_graph_.edges.push_back({e.at(0).get<std::int64_t>(),
                                      e.at(1).get<std::int64_t>(), e.at(2).get<double>()});
    return kb;
  } catch (const json::exception& e) {
    raise(Errc::ParseError, "kb snapshot: ", e.what());
  }
}

}  // namespace geodragon::kb
