#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stp/index_store.hpp"
#include "stp/name_truncation.hpp"
#include "stp/types.hpp"

namespace stp {

inline constexpr std::size_t kOccupationSlots = 20;
inline constexpr std::size_t kNameFeatures = 4;
inline constexpr std::size_t kFeatureCount = 1 + kNameFeatures + kOccupationSlots + kRelationKindCount;
static_assert(kFeatureCount == 30);

// Flattened order: link_count, name_full, name_first, name_last, name_alias,
// occupation_0..occupation_19, spatial_born, spatial_died, spatial_buried,
// spatial_educated, spatial_work.
struct FeatureVector {
  double link_count = 0.0;
  std::array<double, kNameFeatures> name{};  // full, first, last, alias
  std::array<double, kOccupationSlots> occupations{};
  std::array<double, kRelationKindCount> spatial{};  // indexed by RelationKind

  std::array<double, kFeatureCount> values() const;
  static FeatureVector from_values(std::span<const double> values);
  static const std::array<std::string, kFeatureCount>& column_names();

  bool operator==(const FeatureVector&) const = default;
};

enum NameFeature : std::size_t { name_full = 0, name_first = 1, name_last = 2, name_alias = 3 };

// The 20 occupations with one binary feature each. Order is fixed at
// creation and persisted with the model.
class OccupationVocabulary {
 public:
  OccupationVocabulary() = default;
  explicit OccupationVocabulary(std::array<EntityId, kOccupationSlots> occupations);

  const std::array<EntityId, kOccupationSlots>& occupations() const { return occupations_; }
  // Slot of `occupation`, or -1.
  int slot_of(std::string_view occupation) const;

  bool operator==(const OccupationVocabulary&) const = default;

 private:
  std::array<EntityId, kOccupationSlots> occupations_;
};

struct VocabularyReport {
  std::size_t distinct_from_positives = 0;
  std::size_t padded_from_global = 0;
  std::size_t padded_placeholders = 0;
};

// Most frequent occupations among the distinct persons of the positives,
// ties by id. Short lists are padded with the globally most frequent
// occupations, then with placeholder ids that match nobody.
OccupationVocabulary top_occupations(std::span<const StreetPersonPair> positives,
                                     const IndexBundle& bundle, VocabularyReport* report = nullptr);

// |chain_of(location) ∩ street_chain| / |street_chain|. 1 when the location
// is the street element itself, 0 for unknown locations or disjoint chains.
double containment_score(std::span<const EntityId> street_chain, std::string_view location,
                         const SpatialDag& dag);

// Per relation kind, the best containment score over the person's locations.
std::array<double, kRelationKindCount> spatial_features(std::span<const EntityId> street_chain,
                                                        const PersonRecord& person,
                                                        const SpatialDag& dag);

// Whether the full name, a given name, a family name or an alias occurs in
// the street name at word boundaries (hyphens separate words). A final
// variant word may also be glued to one of `affixes`' suffixes
// ("Wilhelm" in "Wilhelmstraße").
std::array<double, kNameFeatures> name_match_features(const PersonRecord& person,
                                                      std::string_view street_name,
                                                      const AffixSet& affixes);

// Throws DataError when the person is not in the bundle.
FeatureVector extract_features(const StreetRecord& street, std::string_view person_id,
                               const IndexBundle& bundle, const OccupationVocabulary& vocab,
                               const AffixSet& affixes);

// street id, person id, then the 30 features in flattened order.
std::string feature_tsv_header();
std::string feature_tsv_row(std::string_view street_id, std::string_view person_id,
                            const FeatureVector& features);

}  // namespace stp
