#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stp/io.hpp"
#include "stp/types.hpp"

namespace stp::kg {

// One entity document from a Wikidata JSON dump, reduced to the parts the
// pipeline reads. Claim values are target entity ids for item-valued
// properties and a literal rendering otherwise ("lat,lon" for coordinates).
struct RawEntity {
  EntityId id;
  std::map<std::string, std::string> labels;
  std::map<std::string, std::vector<std::string>> aliases;
  std::map<std::string, std::vector<std::string>> claims;
  std::map<std::string, std::string> sitelink_titles;

  // Null when the property is absent.
  const std::vector<std::string>* claim(std::string_view property) const;
  bool has_claim_value(std::string_view property, std::string_view value) const;
};

// Property ids and entity classes the extractors look at. Loaded from
// kg_config.json so the relation mapping can be audited and changed.
struct KgConfig {
  std::string instance_of = "P31";
  std::string human = "Q5";
  std::string located_in = "P131";
  std::string given_name = "P735";
  std::string family_name = "P734";
  std::string named_after = "P138";
  std::string country = "P17";
  std::string coordinates = "P625";
  std::vector<std::string> occupation_properties{"P106", "P39"};
  // Indexed by RelationKind.
  std::array<std::string, kRelationKindCount> relation_properties{
      "P19", "P20", "P119", "P69", "P937"};
  std::set<std::string> admin_classes;
  std::set<std::string> geo_classes;
  std::set<std::string> street_classes;
  std::set<std::string> name_classes;

  static KgConfig defaults();
  static KgConfig load(const std::filesystem::path& path);
};

// Parses a single dump line (trailing comma allowed). Returns nullopt for
// structural lines ("[", "]", blank) and for non-item entities; throws
// DataError for malformed documents.
std::optional<RawEntity> parse_entity_line(std::string_view line);

// Streams entities from a newline-delimited dump, one line at a time.
// Malformed lines are skipped and counted.
class EntityStream {
 public:
  explicit EntityStream(const std::filesystem::path& path);
  explicit EntityStream(std::istream& in);

  std::optional<RawEntity> next();

  std::uint64_t skipped() const { return skipped_; }
  std::uint64_t non_items() const { return non_items_; }
  std::uint64_t lines() const { return reader_.line_number(); }
  std::size_t longest_line() const { return longest_line_; }
  std::size_t buffer_capacity() const { return line_.capacity(); }

 private:
  io::LineReader reader_;
  std::string line_;
  std::uint64_t skipped_ = 0;
  std::uint64_t non_items_ = 0;
  std::size_t longest_line_ = 0;
};

// Convenience over EntityStream for small inputs.
std::vector<RawEntity> stream_entities(std::istream& in, std::uint64_t* skipped = nullptr);

// Labels of given-name / family-name entities, for resolving name claims.
using NameLabels = std::unordered_map<EntityId, std::string>;

std::string label_in(const RawEntity& raw, std::string_view language);

// Splits a full name into given and family name tokens. The first token is a
// given name, the last non-particle token a family name, and middle tokens
// are extra given names. Particles and regnal numerals ("von", "II.") never
// become names.
void split_person_name(std::string_view full_name, std::vector<std::string>& first_names,
                       std::vector<std::string>& last_names);

bool is_name_particle(std::string_view token);

std::optional<PersonRecord> extract_person(const RawEntity& raw, std::string_view language,
                                           const KgConfig& config = KgConfig::defaults(),
                                           const NameLabels* name_labels = nullptr);

// Replaces split-derived names with the labels of the given/family name
// claims, wherever at least one claim resolves.
void apply_name_claims(PersonRecord& person, const std::vector<EntityId>& given,
                       const std::vector<EntityId>& family, const NameLabels& labels);

std::optional<LocationNode> extract_location(const RawEntity& raw,
                                             const KgConfig& config = KgConfig::defaults(),
                                             std::string_view language = "de");

// True for entities whose instance-of includes a given/family name class.
bool is_name_entity(const RawEntity& raw, const KgConfig& config = KgConfig::defaults());

// A street item carrying "named after" claims. Whether the target is a
// person is decided once the person store is complete.
struct NamedStreet {
  EntityId id;
  std::string label;
  std::vector<EntityId> named_after;
  std::vector<EntityId> countries;
  std::optional<GeoPoint> coordinates;
};

std::optional<NamedStreet> extract_named_street(const RawEntity& raw, std::string_view language,
                                                const KgConfig& config = KgConfig::defaults());

struct LinkCountTable {
  std::unordered_map<EntityId, std::uint64_t> counts;
  std::uint64_t skipped = 0;
};

// Two-column TSV (entity id, count). Duplicate ids keep the maximum.
LinkCountTable load_link_counts(std::istream& in);
LinkCountTable load_link_counts(const std::filesystem::path& path);

}  // namespace stp::kg
