#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "stp/types.hpp"

namespace stp {

// Exact-term inverted index: normalized name variant -> sorted person ids.
class PersonNameIndex {
 public:
  void add(std::string_view term, const EntityId& person);
  // Sorts and deduplicates posting lists. Called once after the last add().
  void finalize();

  // `term` is normalized before lookup; unknown terms give an empty list.
  const std::vector<EntityId>& lookup(std::string_view term) const;

  std::size_t term_count() const { return entries_.size(); }
  const std::unordered_map<std::string, std::vector<EntityId>>& entries() const {
    return entries_;
  }

 private:
  friend class IndexBundle;
  std::unordered_map<std::string, std::vector<EntityId>> entries_;
};

// All normalized terms under which a person is indexed: full name, every
// given and family name token, every alias and every "given family" pair.
std::vector<std::string> indexed_variants(const PersonRecord& person);

// The "located in" graph after dangling-parent removal and cycle breaking.
class SpatialDag {
 public:
  const LocationNode* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  std::size_t size() const { return nodes_.size(); }
  const std::map<EntityId, LocationNode, std::less<>>& nodes() const { return nodes_; }

  // Parent followed by chain_of; null for roots and unknown ids.
  const EntityId* canonical_parent(std::string_view id) const;

  // [id, parent, grandparent, ...] along canonical parents. Unknown ids give
  // the singleton [id].
  std::vector<EntityId> chain_of(std::string_view id) const;

  struct BuildStats {
    std::size_t dangling_parents = 0;
    std::size_t duplicate_parents = 0;
    std::size_t self_loops = 0;
    std::vector<std::pair<EntityId, EntityId>> broken_edges;
  };

  // Later duplicates of an id replace earlier ones.
  static SpatialDag build(std::vector<LocationNode> locations, BuildStats* stats = nullptr);

 private:
  void compute_canonical_parents();

  std::map<EntityId, LocationNode, std::less<>> nodes_;
  std::unordered_map<EntityId, EntityId> canonical_;
};

struct BuildReport {
  std::size_t persons = 0;
  std::size_t duplicate_persons = 0;
  std::size_t locations = 0;
  std::size_t terms = 0;
  std::size_t dangling_parents = 0;
  std::size_t cycles_broken = 0;
  std::vector<std::pair<EntityId, EntityId>> broken_edges;

  std::string to_text() const;
};

// Person store, name index, occupation index, location index and spatial
// DAG as one immutable, loadable unit. Safe for concurrent readers.
class IndexBundle {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  IndexBundle() = default;

  static IndexBundle build(std::vector<PersonRecord> persons, std::vector<LocationNode> locations,
                           BuildReport* report = nullptr);

  // Sorted ids of persons indexed under normalize(term).
  const std::vector<EntityId>& lookup(std::string_view term) const {
    return name_index_.lookup(term);
  }

  const PersonRecord* person(std::string_view id) const;
  bool has_person(std::string_view id) const { return person(id) != nullptr; }
  std::uint64_t link_count(std::string_view id) const;

  // Occupation and location indexes, keyed by person id. Empty spans for
  // unknown persons.
  std::span<const EntityId> occupations_of(std::string_view id) const;
  std::span<const PersonLocation> locations_of(std::string_view id) const;

  const std::map<EntityId, PersonRecord, std::less<>>& persons() const { return persons_; }
  const PersonNameIndex& name_index() const { return name_index_; }
  const SpatialDag& dag() const { return dag_; }

  // Binary layout, little endian:
  //   magic "STPBNDL\0" | u32 version | u64 payload size | payload | u32 crc32
  // payload = persons, locations (post-build), name index.
  void save(const std::filesystem::path& path) const;
  std::string serialize() const;
  static IndexBundle load(const std::filesystem::path& path);
  static IndexBundle deserialize(std::string_view bytes);

 private:
  std::map<EntityId, PersonRecord, std::less<>> persons_;
  PersonNameIndex name_index_;
  SpatialDag dag_;
};

// Free-function spellings of the bundle queries.
inline const std::vector<EntityId>& lookup_persons(const IndexBundle& bundle, std::string_view term) {
  return bundle.lookup(term);
}

inline std::vector<EntityId> chain_of(const SpatialDag& dag, std::string_view id) {
  return dag.chain_of(id);
}

}  // namespace stp
