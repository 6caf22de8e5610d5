#include "stp/osm_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "stp/errors.hpp"
#include "stp/io.hpp"
#include "stp/osm_reader.hpp"
#include "stp/parallel.hpp"
#include "stp/text.hpp"

namespace stp::osm {

bool is_street_highway(std::string_view highway) {
  static const std::set<std::string, std::less<>> excluded = {
      "proposed", "construction", "platform",  "bus_stop",      "elevator",        "raceway",
      "abandoned", "razed",       "corridor",  "escape",        "emergency_bay",   "rest_area",
      "services", "traffic_signals", "crossing", "street_lamp", "turning_circle", "stop"};
  return !highway.empty() && !excluded.count(highway);
}

namespace {

std::optional<EntityId> first_entity_id(const std::string* value) {
  if (!value) return std::nullopt;
  std::string_view v = *value;
  v = v.substr(0, v.find(';'));
  while (!v.empty() && text::is_space(v.front())) v.remove_prefix(1);
  while (!v.empty() && text::is_space(v.back())) v.remove_suffix(1);
  if (v.size() < 2 || v.front() != 'Q') return std::nullopt;
  return EntityId(v);
}

std::string region_hint_of(const Element& way) {
  for (const char* key : {"addr:city", "is_in:city", "is_in"}) {
    if (const std::string* v = way.tag(key)) {
      std::string_view s = *v;
      s = s.substr(0, s.find(','));
      std::string hint = text::collapse_whitespace(s);
      if (!hint.empty()) return hint;
    }
  }
  return {};
}

struct PendingStreet {
  StreetRecord record;
  std::int64_t mid_node = 0;
  bool has_node = false;
};

}  // namespace

std::vector<StreetRecord> extract_streets(const std::filesystem::path& extract, StreetStats* stats) {
  StreetStats local;
  StreetStats& s = stats ? *stats : local;

  std::vector<PendingStreet> pending;
  std::unordered_set<std::int64_t> needed;
  read_osm_xml(extract, ReadMask{false, true, false}, [&](const Element& way) {
    ++s.ways_seen;
    const std::string* highway = way.tag("highway");
    const std::string* name = way.tag("name");
    if (!highway || !is_street_highway(*highway) || !name) return;
    std::string clean = text::collapse_whitespace(*name);
    if (clean.empty()) return;
    ++s.named_highways;
    PendingStreet p;
    p.record.osm_id = "way/" + std::to_string(way.id);
    p.record.name = std::move(clean);
    p.record.etymology_person = first_entity_id(way.tag("name:etymology:wikidata"));
    p.record.wikidata = first_entity_id(way.tag("wikidata"));
    p.record.region_hint = region_hint_of(way);
    if (!way.node_refs.empty()) {
      p.mid_node = way.node_refs[way.node_refs.size() / 2];
      p.has_node = true;
      needed.insert(p.mid_node);
    }
    pending.push_back(std::move(p));
  });

  std::unordered_map<std::int64_t, GeoPoint> coords;
  coords.reserve(needed.size());
  read_osm_xml(extract, ReadMask{true, false, false}, [&](const Element& node) {
    if (needed.count(node.id)) coords.emplace(node.id, GeoPoint{node.lat, node.lon});
  });

  std::vector<StreetRecord> out;
  out.reserve(pending.size());
  for (auto& p : pending) {
    auto it = p.has_node ? coords.find(p.mid_node) : coords.end();
    if (it == coords.end()) {
      ++s.missing_coordinates;
      continue;
    }
    p.record.representative_point = it->second;
    out.push_back(std::move(p.record));
  }
  return out;
}

std::vector<std::vector<std::int64_t>> assemble_rings(std::vector<std::vector<std::int64_t>> ways,
                                                      std::size_t* open_segments) {
  std::vector<std::vector<std::int64_t>> rings;
  std::size_t open = 0;
  std::vector<bool> used(ways.size(), false);
  for (std::size_t start = 0; start < ways.size(); ++start) {
    if (used[start] || ways[start].size() < 2) {
      used[start] = true;
      continue;
    }
    used[start] = true;
    std::vector<std::int64_t> ring = ways[start];
    while (ring.front() != ring.back()) {
      bool extended = false;
      for (std::size_t i = 0; i < ways.size() && !extended; ++i) {
        if (used[i] || ways[i].size() < 2) continue;
        const auto& w = ways[i];
        if (w.front() == ring.back()) {
          ring.insert(ring.end(), w.begin() + 1, w.end());
        } else if (w.back() == ring.back()) {
          ring.insert(ring.end(), w.rbegin() + 1, w.rend());
        } else if (w.back() == ring.front()) {
          ring.insert(ring.begin(), w.begin(), w.end() - 1);
        } else if (w.front() == ring.front()) {
          ring.insert(ring.begin(), w.rbegin(), w.rend() - 1);
        } else {
          continue;
        }
        used[i] = true;
        extended = true;
      }
      if (!extended) break;
    }
    if (ring.front() == ring.back() && ring.size() >= 4) {
      rings.push_back(std::move(ring));
    } else {
      ++open;
    }
  }
  if (open_segments) *open_segments = open;
  return rings;
}

namespace {

std::optional<int> parse_level(const std::string* v) {
  if (!v) return std::nullopt;
  int level = 0;
  const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), level);
  if (ec != std::errc() || ptr != v->data() + v->size()) return std::nullopt;
  return level;
}

bool is_admin_boundary(const Element& e) {
  const std::string* b = e.tag("boundary");
  return b && *b == "administrative" && parse_level(e.tag("admin_level"));
}

struct PendingBoundary {
  AdminBoundary boundary;
  std::vector<std::int64_t> member_ways;
  std::vector<std::int64_t> closed_way;  // boundary mapped as a single closed way
};

}  // namespace

std::vector<AdminBoundary> extract_boundaries(const std::filesystem::path& extract, BoundaryStats* stats) {
  BoundaryStats local;
  BoundaryStats& s = stats ? *stats : local;

  std::vector<PendingBoundary> pending;
  std::unordered_set<std::int64_t> member_ways;
  read_osm_xml(extract, ReadMask{false, false, true}, [&](const Element& rel) {
    if (!is_admin_boundary(rel)) return;
    PendingBoundary p;
    p.boundary.osm_relation_id = rel.id;
    p.boundary.admin_level = *parse_level(rel.tag("admin_level"));
    p.boundary.wikidata_id = first_entity_id(rel.tag("wikidata"));
    for (const auto& m : rel.members)
      if (m.type == ElementType::way && (m.role == "outer" || m.role == "inner" || m.role.empty())) {
        p.member_ways.push_back(m.ref);
        member_ways.insert(m.ref);
      }
    pending.push_back(std::move(p));
  });

  std::unordered_map<std::int64_t, std::vector<std::int64_t>> way_nodes;
  std::unordered_set<std::int64_t> needed_nodes;
  read_osm_xml(extract, ReadMask{false, true, false}, [&](const Element& way) {
    const bool member = member_ways.count(way.id) > 0;
    const bool closed_boundary = is_admin_boundary(way) && way.node_refs.size() >= 4 &&
                                 way.node_refs.front() == way.node_refs.back();
    if (!member && !closed_boundary) return;
    needed_nodes.insert(way.node_refs.begin(), way.node_refs.end());
    if (member) way_nodes.emplace(way.id, way.node_refs);
    if (closed_boundary) {
      PendingBoundary p;
      p.boundary.osm_relation_id = -way.id;
      p.boundary.admin_level = *parse_level(way.tag("admin_level"));
      p.boundary.wikidata_id = first_entity_id(way.tag("wikidata"));
      p.closed_way = way.node_refs;
      pending.push_back(std::move(p));
    }
  });

  std::unordered_map<std::int64_t, GeoPoint> coords;
  coords.reserve(needed_nodes.size());
  read_osm_xml(extract, ReadMask{true, false, false}, [&](const Element& node) {
    if (needed_nodes.count(node.id)) coords.emplace(node.id, GeoPoint{node.lat, node.lon});
  });

  std::vector<AdminBoundary> out;
  for (auto& p : pending) {
    ++s.relations;
    std::vector<std::vector<std::int64_t>> rings;
    if (!p.closed_way.empty()) {
      rings.push_back(p.closed_way);
    } else {
      std::vector<std::vector<std::int64_t>> ways;
      for (auto id : p.member_ways)
        if (auto it = way_nodes.find(id); it != way_nodes.end()) ways.push_back(it->second);
      std::size_t open = 0;
      rings = assemble_rings(std::move(ways), &open);
      s.open_ring_segments += open;
    }
    for (const auto& ring_nodes : rings) {
      geo::Ring ring;
      ring.reserve(ring_nodes.size());
      bool complete = true;
      for (auto id : ring_nodes) {
        auto it = coords.find(id);
        if (it == coords.end()) {
          complete = false;
          break;
        }
        ring.push_back(it->second);
      }
      if (complete && geo::is_closed_ring(ring)) p.boundary.polygon.push_back(std::move(ring));
    }
    if (p.boundary.polygon.empty()) {
      ++s.without_rings;
      continue;
    }
    out.push_back(std::move(p.boundary));
  }
  std::sort(out.begin(), out.end(),
            [](const AdminBoundary& a, const AdminBoundary& b) { return a.osm_relation_id < b.osm_relation_id; });
  return out;
}

RegionMap load_region_map(const std::filesystem::path& path) {
  io::LineReader reader(path);
  RegionMap map;
  std::string line;
  while (reader.next(line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(reader.line_number()) + ": expected 'name<TAB>entity id'");
    std::string name = text::collapse_whitespace(std::string_view(line).substr(0, tab));
    std::string id = text::collapse_whitespace(std::string_view(line).substr(tab + 1));
    if (name.empty() || id.empty() || id.front() != 'Q')
      throw DataError(path.string() + ":" + std::to_string(reader.line_number()) + ": bad region mapping");
    map.insert_or_assign(std::move(name), std::move(id));
  }
  return map;
}

std::vector<StreetRecord> assign_chains(std::vector<StreetRecord> streets,
                                        std::span<const AdminBoundary> boundaries, const SpatialDag& dag,
                                        const RegionMap* region_map, ChainStats* stats, unsigned threads) {
  struct Indexed {
    const AdminBoundary* boundary;
    geo::BoundingBox box;
  };
  std::vector<Indexed> ordered;
  for (const auto& b : boundaries)
    if (b.wikidata_id && !b.polygon.empty()) ordered.push_back({&b, geo::bounding_box(b.polygon)});
  std::sort(ordered.begin(), ordered.end(), [](const Indexed& a, const Indexed& b) {
    if (a.boundary->admin_level != b.boundary->admin_level)
      return a.boundary->admin_level > b.boundary->admin_level;
    return a.boundary->osm_relation_id < b.boundary->osm_relation_id;
  });

  enum class How : std::uint8_t { polygon, region_map, none };
  std::vector<How> how(streets.size(), How::none);
  parallel_for(streets.size(), threads, [&](std::size_t i) {
    StreetRecord& s = streets[i];
    const EntityId* anchor = nullptr;
    for (const auto& b : ordered)
      if (b.box.contains(s.representative_point) &&
          geo::point_in_polygon(s.representative_point, b.boundary->polygon)) {
        anchor = &*b.boundary->wikidata_id;
        how[i] = How::polygon;
        break;
      }
    if (!anchor && region_map && !s.region_hint.empty()) {
      if (auto it = region_map->find(s.region_hint); it != region_map->end()) {
        anchor = &it->second;
        how[i] = How::region_map;
      }
    }
    s.chain.clear();
    s.chain.push_back(s.element_id());
    if (!anchor) {
      s.unresolved = true;
      return;
    }
    for (auto& id : dag.chain_of(*anchor))
      if (std::find(s.chain.begin(), s.chain.end(), id) == s.chain.end()) s.chain.push_back(std::move(id));
    s.unresolved = !dag.contains(*anchor);
  });

  if (stats) {
    for (std::size_t i = 0; i < streets.size(); ++i) {
      if (streets[i].unresolved)
        ++stats->unresolved;
      else
        ++stats->resolved;
      if (how[i] == How::region_map) ++stats->via_region_map;
    }
  }
  return streets;
}

void resolve_chain(StreetRecord& street, const SpatialDag& dag) {
  if (!street.chain.empty()) return;
  const std::string& element = street.element_id();
  if (dag.contains(element)) {
    street.chain = dag.chain_of(element);
    street.unresolved = false;
  } else {
    street.chain = {element};
    street.unresolved = true;
  }
}

std::vector<StreetPersonPair> harvest_etymology(std::span<const StreetRecord> streets, const IndexBundle& bundle,
                                                std::uint64_t* dropped) {
  std::vector<StreetPersonPair> pairs;
  std::uint64_t n_dropped = 0;
  for (const auto& s : streets) {
    if (!s.etymology_person) continue;
    if (bundle.has_person(*s.etymology_person)) {
      pairs.push_back({s.osm_id, *s.etymology_person});
    } else {
      ++n_dropped;
    }
  }
  if (dropped) *dropped = n_dropped;
  return pairs;
}

StreetCounts count_streets(std::span<const StreetRecord> streets) {
  std::set<std::pair<std::string, std::string>> merged;
  for (const auto& s : streets) merged.emplace(s.name, s.chain.size() > 1 ? s.chain[1] : std::string());
  return {streets.size(), merged.size()};
}

}  // namespace stp::osm
