#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "stp/config.hpp"
#include "stp/errors.hpp"
#include "stp/kg_ingest.hpp"

using namespace stp;
using namespace stp::kg;
using namespace stp::testing;

namespace {

std::string human(const std::string& id, const std::string& label, const std::string& lang = "de") {
  DumpEntity e{id, label, {{"P31", "Q5"}}, {}, lang};
  return wikidata_json(e);
}

}  // namespace

TEST(StreamEntities, EmptyStream) {
  std::istringstream in("");
  std::uint64_t skipped = 99;
  EXPECT_TRUE(stream_entities(in, &skipped).empty());
  EXPECT_EQ(skipped, 0u);
}

TEST(StreamEntities, ThreeLinesInOrder) {
  std::istringstream in("[\n" + human("Q1", "A") + ",\n" + human("Q2", "B") + ",\n" + human("Q3", "C") + "\n]\n");
  const auto entities = stream_entities(in);
  ASSERT_EQ(entities.size(), 3u);
  EXPECT_EQ(entities[0].id, "Q1");
  EXPECT_EQ(entities[2].id, "Q3");
}

TEST(StreamEntities, TruncatedLineIsSkippedAndCounted) {
  const std::string good = human("Q1", "A");
  const std::string bad = human("Q2", "B").substr(0, 30);
  std::istringstream in(good + "\n" + bad + "\n");
  std::uint64_t skipped = 0;
  const auto entities = stream_entities(in, &skipped);
  EXPECT_EQ(entities.size(), 1u);
  EXPECT_EQ(skipped, 1u);
}

TEST(StreamEntities, SkipCountMatchesInjectedFaults) {
  std::string dump = "[\n";
  for (int i = 0; i < 40; ++i) dump += (i % 7 == 3 ? "{\"id\": \"Q" : human("Q" + std::to_string(i + 1), "X")) + ",\n";
  dump += "]\n";
  std::istringstream in(dump);
  std::uint64_t skipped = 0;
  const auto entities = stream_entities(in, &skipped);
  EXPECT_EQ(skipped, 6u);
  EXPECT_EQ(entities.size(), 34u);
}

TEST(StreamEntities, PropertyEntitiesAreNotItems) {
  std::istringstream in(R"({"id":"P31","type":"property","labels":{}})" "\n" + human("Q1", "A") + "\n");
  EntityStream s(in);
  int n = 0;
  while (s.next()) ++n;
  EXPECT_EQ(n, 1);
  EXPECT_EQ(s.non_items(), 1u);
}

TEST(StreamEntities, BufferTracksLongestLine) {
  std::string dump;
  for (int i = 0; i < 2000; ++i) dump += human("Q" + std::to_string(i + 1), "Person " + std::to_string(i)) + "\n";
  dump += human("Q99999", std::string(5000, 'x')) + "\n";
  std::istringstream in(dump);
  EntityStream s(in);
  while (s.next()) {
  }
  EXPECT_LE(s.buffer_capacity(), 4 * s.longest_line());
}

TEST(ExtractPerson, WilhelmBusch) {
  const auto raw = parse_entity_line(human("Q44403", "Wilhelm Busch"));
  ASSERT_TRUE(raw);
  const auto p = extract_person(*raw, "de");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->full_name, "Wilhelm Busch");
  EXPECT_EQ(p->first_names, std::vector<std::string>{"Wilhelm"});
  EXPECT_EQ(p->last_names, std::vector<std::string>{"Busch"});
  EXPECT_EQ(p->link_count, 0u);
}

TEST(ExtractPerson, CityIsNotAPerson) {
  const auto raw = parse_entity_line(wikidata_json({"Q64", "Berlin", {{"P31", "Q515"}}}));
  EXPECT_FALSE(extract_person(*raw, "de"));
}

TEST(ExtractPerson, FallsBackToEnglishLabel) {
  const auto raw = parse_entity_line(human("Q7", "Jane Doe", "en"));
  const auto p = extract_person(*raw, "de");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->full_name, "Jane Doe");
}

TEST(ExtractPerson, RelationsAndOccupations) {
  DumpEntity e{"Q151330", "Friedrich Wilhelm I.", {{"P31", "Q5"}, {"P106", "Q116"}, {"P39", "Q12097"},
                                                   {"P19", "Q64"}, {"P20", "Q1711"}, {"P119", "Q1711"},
                                                   {"P119", "Q64"}, {"P69", "Q1"}, {"P937", "Q2"}, {"P27", "Q3"}}};
  const auto p = extract_person(*parse_entity_line(wikidata_json(e)), "de");
  ASSERT_TRUE(p);
  EXPECT_EQ(p->occupations, (std::vector<EntityId>{"Q116", "Q12097"}));
  EXPECT_EQ(p->locations.size(), 6u);
  std::set<RelationKind> kinds;
  for (const auto& l : p->locations) kinds.insert(l.relation);
  EXPECT_EQ(kinds.size(), 5u);
  EXPECT_EQ(p->first_names, (std::vector<std::string>{"Friedrich", "Wilhelm"}));
  EXPECT_TRUE(p->last_names.empty());
}

TEST(ExtractPerson, Deterministic) {
  const auto raw = parse_entity_line(human("Q44403", "Wilhelm Busch"));
  EXPECT_EQ(extract_person(*raw, "de"), extract_person(*raw, "de"));
}

TEST(SplitName, ParticlesAndNumerals) {
  std::vector<std::string> first, last;
  split_person_name("Otto von Bismarck", first, last);
  EXPECT_EQ(first, std::vector<std::string>{"Otto"});
  EXPECT_EQ(last, std::vector<std::string>{"Bismarck"});
  first.clear();
  last.clear();
  split_person_name("Goethe", first, last);
  EXPECT_EQ(first, std::vector<std::string>{"Goethe"});
  EXPECT_EQ(last, std::vector<std::string>{"Goethe"});
  EXPECT_TRUE(is_name_particle("II."));
  EXPECT_TRUE(is_name_particle("van"));
  EXPECT_FALSE(is_name_particle("Ida"));
}

TEST(ApplyNameClaims, ResolvedLabelsReplaceSplit) {
  PersonRecord p;
  p.full_name = "Maria Sibylla Merian";
  split_person_name(p.full_name, p.first_names, p.last_names);
  NameLabels labels{{"Q1", "Maria"}, {"Q2", "Sibylla"}, {"Q3", "Merian"}};
  apply_name_claims(p, {"Q1", "Q2"}, {"Q404"}, labels);
  EXPECT_EQ(p.first_names, (std::vector<std::string>{"Maria", "Sibylla"}));
  EXPECT_EQ(p.last_names, std::vector<std::string>{"Merian"});
}

TEST(ExtractLocation, BerlinInGermany) {
  const auto raw = parse_entity_line(wikidata_json({"Q64", "Berlin", {{"P31", "Q515"}, {"P131", "Q183"}}}));
  const auto n = extract_location(*raw);
  ASSERT_TRUE(n);
  EXPECT_EQ(n->parents, std::vector<EntityId>{"Q183"});
  EXPECT_TRUE(n->admin);
}

TEST(ExtractLocation, NonGeographicWithoutParentsIsAbsent) {
  const auto raw = parse_entity_line(wikidata_json({"Q11424", "Film", {{"P31", "Q11424"}}}));
  EXPECT_FALSE(extract_location(*raw));
}

TEST(ExtractLocation, DuplicateParentsCollapse) {
  const auto raw = parse_entity_line(
      wikidata_json({"Q64", "Berlin", {{"P31", "Q515"}, {"P131", "Q183"}, {"P131", "Q183"}, {"P131", "Q64"}}}));
  EXPECT_EQ(extract_location(*raw)->parents, std::vector<EntityId>{"Q183"});
}

TEST(ParseEntity, SkipsDeprecatedAndNoValueSnaks) {
  const std::string line =
      R"({"id":"Q1","labels":{"de":{"value":"X"}},"claims":{"P19":[)"
      R"({"mainsnak":{"snaktype":"value","datavalue":{"type":"wikibase-entityid","value":{"id":"Q64"}}},"rank":"deprecated"},)"
      R"({"mainsnak":{"snaktype":"novalue"},"rank":"normal"},)"
      R"({"mainsnak":{"snaktype":"value","datavalue":{"type":"wikibase-entityid","value":{"numeric-id":1711}}},"rank":"normal"}]}})";
  const auto raw = parse_entity_line(line);
  ASSERT_TRUE(raw);
  EXPECT_EQ(*raw->claim("P19"), std::vector<std::string>{"Q1711"});
  EXPECT_FALSE(parse_entity_line("["));
  EXPECT_THROW(parse_entity_line("{not json"), DataError);
}

TEST(LinkCounts, ParseAndMaxWins) {
  std::istringstream one("Q123\t500\n");
  EXPECT_EQ(load_link_counts(one).counts.at("Q123"), 500u);
  std::istringstream empty("");
  EXPECT_TRUE(load_link_counts(empty).counts.empty());
  std::istringstream dup("Q1\t3\nQ1\t7\nQ1\t5\n");
  EXPECT_EQ(load_link_counts(dup).counts.at("Q1"), 7u);
  std::istringstream junk("Q1\t-4\nQ2\tabc\nQ3\n");
  const auto t = load_link_counts(junk);
  EXPECT_TRUE(t.counts.empty());
  EXPECT_EQ(t.skipped, 3u);
}

TEST(KgConfig, ShippedFileMatchesDefaults) {
  const auto shipped = KgConfig::load(fs::path(STP_SOURCE_DATA_DIR) / "kg_config.json");
  const auto d = KgConfig::defaults();
  EXPECT_EQ(shipped.relation_properties, d.relation_properties);
  EXPECT_EQ(shipped.occupation_properties, d.occupation_properties);
  EXPECT_EQ(shipped.admin_classes, d.admin_classes);
  EXPECT_EQ(shipped.geo_classes, d.geo_classes);
  EXPECT_EQ(shipped.street_classes, d.street_classes);
  EXPECT_EQ(shipped.name_classes, d.name_classes);
  EXPECT_EQ(shipped.instance_of, d.instance_of);
  EXPECT_EQ(shipped.named_after, d.named_after);
}

TEST(NamedStreet, ExtractsTargetsAndCountry) {
  const auto raw = parse_entity_line(
      wikidata_json({"Q900", "Wilhelmstraße", {{"P31", "Q79007"}, {"P138", "Q151330"}, {"P17", "Q183"}}}));
  const auto s = extract_named_street(*raw, "de");
  ASSERT_TRUE(s);
  EXPECT_EQ(s->named_after, std::vector<EntityId>{"Q151330"});
  EXPECT_EQ(s->countries, std::vector<EntityId>{"Q183"});
}
