#include "stp/features.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <set>

#include "stp/errors.hpp"
#include "stp/text.hpp"

namespace stp {

std::array<double, kFeatureCount> FeatureVector::values() const {
  std::array<double, kFeatureCount> v{};
  std::size_t i = 0;
  v[i++] = link_count;
  for (double x : name) v[i++] = x;
  for (double x : occupations) v[i++] = x;
  for (double x : spatial) v[i++] = x;
  return v;
}

FeatureVector FeatureVector::from_values(std::span<const double> values) {
  if (values.size() != kFeatureCount) throw PreconditionError("feature vector needs 30 values");
  FeatureVector f;
  std::size_t i = 0;
  f.link_count = values[i++];
  for (double& x : f.name) x = values[i++];
  for (double& x : f.occupations) x = values[i++];
  for (double& x : f.spatial) x = values[i++];
  return f;
}

const std::array<std::string, kFeatureCount>& FeatureVector::column_names() {
  static const std::array<std::string, kFeatureCount> names = [] {
    std::array<std::string, kFeatureCount> n;
    std::size_t i = 0;
    n[i++] = "link_count";
    for (const char* s : {"name_full", "name_first", "name_last", "name_alias"}) n[i++] = s;
    for (std::size_t k = 0; k < kOccupationSlots; ++k) n[i++] = "occupation_" + std::to_string(k);
    for (const char* s : {"spatial_born", "spatial_died", "spatial_buried", "spatial_educated", "spatial_work"})
      n[i++] = s;
    return n;
  }();
  return names;
}

OccupationVocabulary::OccupationVocabulary(std::array<EntityId, kOccupationSlots> occupations)
    : occupations_(std::move(occupations)) {
  std::set<EntityId> seen(occupations_.begin(), occupations_.end());
  if (seen.size() != kOccupationSlots) throw PreconditionError("occupation vocabulary entries must be distinct");
}

int OccupationVocabulary::slot_of(std::string_view occupation) const {
  for (std::size_t i = 0; i < kOccupationSlots; ++i)
    if (occupations_[i] == occupation) return static_cast<int>(i);
  return -1;
}

namespace {

std::vector<EntityId> ranked(const std::map<EntityId, std::size_t>& counts) {
  std::vector<std::pair<EntityId, std::size_t>> v(counts.begin(), counts.end());
  std::stable_sort(v.begin(), v.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<EntityId> ids;
  for (auto& [id, n] : v) ids.push_back(id);
  return ids;
}

}  // namespace

OccupationVocabulary top_occupations(std::span<const StreetPersonPair> positives, const IndexBundle& bundle,
                                     VocabularyReport* report) {
  if (positives.empty()) throw PreconditionError("top_occupations needs at least one positive pair");
  std::set<EntityId> persons;
  for (const auto& p : positives) persons.insert(p.person);

  std::map<EntityId, std::size_t> counts;
  for (const auto& id : persons)
    for (const auto& occ : bundle.occupations_of(id)) ++counts[occ];

  std::array<EntityId, kOccupationSlots> slots;
  std::set<EntityId> chosen;
  std::size_t filled = 0;
  for (const auto& id : ranked(counts)) {
    if (filled == kOccupationSlots) break;
    slots[filled++] = id;
    chosen.insert(id);
  }
  VocabularyReport r;
  r.distinct_from_positives = filled;
  if (filled < kOccupationSlots) {
    std::map<EntityId, std::size_t> global;
    for (const auto& [id, person] : bundle.persons())
      for (const auto& occ : person.occupations) ++global[occ];
    for (const auto& id : ranked(global)) {
      if (filled == kOccupationSlots) break;
      if (chosen.insert(id).second) {
        slots[filled++] = id;
        ++r.padded_from_global;
      }
    }
  }
  for (std::size_t k = 0; filled < kOccupationSlots; ++k) {
    slots[filled++] = "~unused-" + std::to_string(k);
    ++r.padded_placeholders;
  }
  if (report) *report = r;
  return OccupationVocabulary(std::move(slots));
}

double containment_score(std::span<const EntityId> street_chain, std::string_view location, const SpatialDag& dag) {
  if (street_chain.empty()) return 0.0;
  if (street_chain.front() == location) return 1.0;
  if (!dag.contains(location)) return 0.0;
  std::size_t shared = 0;
  for (const auto& id : dag.chain_of(location))
    if (std::find(street_chain.begin(), street_chain.end(), id) != street_chain.end()) ++shared;
  return static_cast<double>(shared) / static_cast<double>(street_chain.size());
}

std::array<double, kRelationKindCount> spatial_features(std::span<const EntityId> street_chain,
                                                        const PersonRecord& person, const SpatialDag& dag) {
  std::array<double, kRelationKindCount> best{};
  for (const auto& loc : person.locations) {
    double& slot = best[index_of(loc.relation)];
    slot = std::max(slot, containment_score(street_chain, loc.location, dag));
  }
  return best;
}

namespace {

bool occurs(const std::vector<std::string>& street, const std::vector<std::string>& variant,
            const AffixSet& affixes) {
  const std::size_t m = variant.size();
  if (m == 0 || m > street.size()) return false;
  for (std::size_t i = 0; i + m <= street.size(); ++i) {
    bool prefix_equal = true;
    for (std::size_t k = 0; k + 1 < m && prefix_equal; ++k) prefix_equal = street[i + k] == variant[k];
    if (!prefix_equal) continue;
    const std::string& word = street[i + m - 1];
    const std::string& last = variant[m - 1];
    if (word == last) return true;
    if (word.size() > last.size() && word.compare(0, last.size(), last) == 0) {
      const std::string_view rest = std::string_view(word).substr(last.size());
      const auto& suffixes = affixes.folded_suffixes();
      if (std::find(suffixes.begin(), suffixes.end(), rest) != suffixes.end()) return true;
    }
  }
  return false;
}

std::vector<std::string> words(std::string_view s) { return text::split_words(text::fold_case(s)); }

bool any_occurs(const std::vector<std::string>& street, const std::vector<std::string>& names,
                const AffixSet& affixes, bool tokens_too) {
  for (const auto& n : names) {
    const auto w = words(n);
    if (occurs(street, w, affixes)) return true;
    if (tokens_too)
      for (const auto& token : w)
        if (occurs(street, {token}, affixes)) return true;
  }
  return false;
}

}  // namespace

std::array<double, kNameFeatures> name_match_features(const PersonRecord& person, std::string_view street_name,
                                                      const AffixSet& affixes) {
  const auto street = words(street_name);
  std::array<double, kNameFeatures> f{};
  f[name_full] = occurs(street, words(person.full_name), affixes) ? 1.0 : 0.0;
  f[name_first] = any_occurs(street, person.first_names, affixes, true) ? 1.0 : 0.0;
  f[name_last] = any_occurs(street, person.last_names, affixes, true) ? 1.0 : 0.0;
  f[name_alias] = any_occurs(street, person.aliases, affixes, false) ? 1.0 : 0.0;
  return f;
}

FeatureVector extract_features(const StreetRecord& street, std::string_view person_id, const IndexBundle& bundle,
                               const OccupationVocabulary& vocab, const AffixSet& affixes) {
  const PersonRecord* person = bundle.person(person_id);
  if (!person) throw DataError("unknown person " + std::string(person_id));
  FeatureVector f;
  f.link_count = static_cast<double>(person->link_count);
  f.name = name_match_features(*person, street.name, affixes);
  for (const auto& occ : person->occupations)
    if (const int slot = vocab.slot_of(occ); slot >= 0) f.occupations[static_cast<std::size_t>(slot)] = 1.0;
  if (street.chain.empty()) {
    const std::vector<EntityId> own{street.element_id()};
    f.spatial = spatial_features(own, *person, bundle.dag());
  } else {
    f.spatial = spatial_features(street.chain, *person, bundle.dag());
  }
  return f;
}

std::string feature_tsv_header() {
  std::string h = "street_id\tperson_id";
  for (const auto& n : FeatureVector::column_names()) h += "\t" + n;
  return h;
}

std::string feature_tsv_row(std::string_view street_id, std::string_view person_id, const FeatureVector& features) {
  std::string row(street_id);
  row += '\t';
  row += person_id;
  char buf[64];
  for (double v : features.values()) {
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    row += '\t';
    row.append(buf, ptr);
  }
  return row;
}

}  // namespace stp
