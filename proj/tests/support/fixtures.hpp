#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "stp/index_store.hpp"
#include "stp/name_truncation.hpp"
#include "stp/types.hpp"

namespace stp::testing {

namespace fs = std::filesystem;

// Ids used by the worked example.
inline const EntityId kGermany = "Q183";
inline const EntityId kBerlin = "Q64";
inline const EntityId kMitte = "Q2013767";
inline const EntityId kPotsdam = "Q1711";
inline const EntityId kPaulWilhelm = "Q2063346";
inline const EntityId kWilhelmBusch = "Q44403";
inline const EntityId kFriedrichWilhelm = "Q151330";

PersonRecord make_person(EntityId id, std::string full_name, std::vector<EntityId> occupations,
                         std::vector<PersonLocation> locations, std::uint64_t link_count);

struct World {
  std::vector<LocationNode> locations;
  std::vector<PersonRecord> persons;
  // Labelled streets with chains.
  std::vector<StreetRecord> training;
  // Unlabelled streets to link.
  std::vector<StreetRecord> targets;
};

// Germany with a handful of states and cities, the three "Wilhelm" persons
// and labelled training streets whose true person lives in the street's
// region while same-name distractors do not.
World sample_world();
StreetRecord wilhelmstrasse();

IndexBundle build_bundle(const World& world);

AffixSet shipped_affixes();
fs::path shipped_affix_dir();

// Fresh empty directory under the system temp dir.
fs::path scratch_dir(std::string_view name);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, std::string_view content);

// ---- source-format writers for end-to-end runs ----

struct DumpClaim {
  std::string property;
  std::string value;  // entity id
};

struct DumpEntity {
  EntityId id;
  std::string label;
  std::vector<DumpClaim> claims;
  std::vector<std::string> aliases;
  std::string label_language = "de";
};

std::string wikidata_json(const DumpEntity& e);

// One JSON array dump with persons, locations and Wikidata street items
// (P138 named after) for every training street.
std::string wikidata_dump(const World& world);
std::string link_count_tsv(const World& world);

struct OsmWay {
  std::int64_t id = 0;
  std::vector<GeoPoint> points;
  std::vector<std::pair<std::string, std::string>> tags;
};

struct OsmBoundary {
  std::int64_t relation_id = 0;
  int admin_level = 0;
  EntityId wikidata;
  // Axis-aligned box: south, west, north, east.
  double south = 0, west = 0, north = 0, east = 0;
};

std::string osm_xml(const std::vector<OsmWay>& streets, const std::vector<OsmBoundary>& boundaries);

// Germany / Berlin / Mitte boundaries and a street extract with the
// Wilhelmstraße inside Mitte.
std::string sample_osm_extract();

}  // namespace stp::testing
