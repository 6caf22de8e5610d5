#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stp/geometry.hpp"
#include "stp/index_store.hpp"
#include "stp/types.hpp"

namespace stp::osm {

struct AdminBoundary {
  std::int64_t osm_relation_id = 0;
  int admin_level = 0;
  std::vector<geo::Ring> polygon;
  std::optional<EntityId> wikidata_id;
};

struct StreetStats {
  std::uint64_t ways_seen = 0;
  std::uint64_t named_highways = 0;
  std::uint64_t missing_coordinates = 0;
};

// Highway values that are not streets (platforms, proposals, ...).
bool is_street_highway(std::string_view highway);

// One record per named highway way; representative point = the middle node
// of the way's node list. Chains are left empty.
std::vector<StreetRecord> extract_streets(const std::filesystem::path& extract,
                                          StreetStats* stats = nullptr);

struct BoundaryStats {
  std::uint64_t relations = 0;
  std::uint64_t without_rings = 0;
  std::uint64_t open_ring_segments = 0;
};

// Joins member ways of boundary=administrative relations into closed rings.
std::vector<AdminBoundary> extract_boundaries(const std::filesystem::path& extract,
                                              BoundaryStats* stats = nullptr);

// Joins way node sequences end-to-end into closed rings. Returns the rings;
// `open_segments` receives the number of chains that could not be closed.
std::vector<std::vector<std::int64_t>> assemble_rings(std::vector<std::vector<std::int64_t>> ways,
                                                      std::size_t* open_segments = nullptr);

// Region name -> entity id, used when no boundary polygon contains a street.
using RegionMap = std::map<std::string, EntityId, std::less<>>;
RegionMap load_region_map(const std::filesystem::path& path);

struct ChainStats {
  std::uint64_t resolved = 0;
  std::uint64_t unresolved = 0;
  std::uint64_t via_region_map = 0;
};

// Anchors each street in the innermost containing boundary that has a
// wikidata id (descending admin_level, ties by relation id), then sets
// chain = [street element, anchor, ...ancestors of anchor].
std::vector<StreetRecord> assign_chains(std::vector<StreetRecord> streets,
                                        std::span<const AdminBoundary> boundaries,
                                        const SpatialDag& dag, const RegionMap* region_map = nullptr,
                                        ChainStats* stats = nullptr, unsigned threads = 1);

// Fills an empty chain from the DAG when the street element is a DAG node
// (ground-truth streets from the knowledge graph); else [element], unresolved.
void resolve_chain(StreetRecord& street, const SpatialDag& dag);

// (street, person) pairs from etymology tags whose target is a known person.
std::vector<StreetPersonPair> harvest_etymology(std::span<const StreetRecord> streets,
                                                const IndexBundle& bundle,
                                                std::uint64_t* dropped = nullptr);

// Raw way count and the number of distinct (name, innermost region) pairs.
struct StreetCounts {
  std::uint64_t ways = 0;
  std::uint64_t merged = 0;
};
StreetCounts count_streets(std::span<const StreetRecord> streets);

}  // namespace stp::osm
