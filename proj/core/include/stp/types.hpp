#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stp {

// Wikidata entity identifier ("Q64"). Street elements that have no entity
// use OSM-style identifiers ("way/123") in the same slot.
using EntityId = std::string;

// The five person-to-location relations used as spatial features.
enum class RelationKind : std::uint8_t {
  born,
  died,
  buried,
  educated_at,
  work_location,
};

inline constexpr std::size_t kRelationKindCount = 5;

inline constexpr std::array<RelationKind, kRelationKindCount> kRelationKinds{
    RelationKind::born, RelationKind::died, RelationKind::buried,
    RelationKind::educated_at, RelationKind::work_location};

std::string_view to_string(RelationKind kind);
std::optional<RelationKind> parse_relation_kind(std::string_view text);

inline std::size_t index_of(RelationKind kind) {
  return static_cast<std::size_t>(kind);
}

struct PersonLocation {
  RelationKind relation = RelationKind::born;
  EntityId location;

  bool operator==(const PersonLocation&) const = default;
};

struct PersonRecord {
  EntityId id;
  std::string full_name;
  std::vector<std::string> first_names;
  std::vector<std::string> last_names;
  std::vector<std::string> aliases;
  std::vector<EntityId> occupations;
  std::vector<PersonLocation> locations;
  std::uint64_t link_count = 0;

  bool operator==(const PersonRecord&) const = default;
};

// One node of the "located in" graph. `admin` marks administrative
// territorial entities; it drives the canonical-parent choice.
struct LocationNode {
  EntityId id;
  std::string label;
  std::vector<EntityId> parents;
  bool admin = false;

  bool operator==(const LocationNode&) const = default;
};

struct GeoPoint {
  double lat = 0.0;
  double lon = 0.0;

  bool operator==(const GeoPoint&) const = default;
};

struct StreetRecord {
  std::string osm_id;
  std::string name;
  GeoPoint representative_point;
  // Street element first, most general region last. Empty until assigned.
  std::vector<EntityId> chain;
  std::optional<EntityId> etymology_person;
  bool unresolved = false;
  // Entity id of the street itself when the source carries one.
  std::optional<EntityId> wikidata;
  // Free-text place hint (addr:city, is_in) for the region-map fallback.
  std::string region_hint;

  // The identifier used as the first chain element.
  const std::string& element_id() const {
    return wikidata ? *wikidata : osm_id;
  }

  bool operator==(const StreetRecord&) const = default;
};

// A (street, person) association: ground truth, etymology tag or output.
struct StreetPersonPair {
  std::string street_id;
  EntityId person;

  bool operator==(const StreetPersonPair&) const = default;
};

}  // namespace stp
