#include "fixtures.hpp"

#include <unistd.h>

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "stp/config.hpp"
#include "stp/kg_ingest.hpp"

namespace stp::testing {

namespace {

struct Place {
  EntityId id;
  std::string label;
  EntityId parent;
};

const std::vector<Place>& places() {
  static const std::vector<Place> p = {
      {kGermany, "Deutschland", ""},
      {"Q64", "Berlin", kGermany},
      {"Q2013767", "Mitte", "Q64"},
      {"Q1208", "Brandenburg", kGermany},
      {"Q1711", "Potsdam", "Q1208"},
      {"Q1202", "Sachsen", kGermany},
      {"Q1731", "Dresden", "Q1202"},
      {"Q2079", "Leipzig", "Q1202"},
      {"Q980", "Bayern", kGermany},
      {"Q1726", "München", "Q980"},
      {"Q2090", "Nürnberg", "Q980"},
      {"Q131371", "Schwabing", "Q1726"},
      {"Q1197", "Niedersachsen", kGermany},
      {"Q1715", "Hannover", "Q1197"},
      {"Q552542", "Wiedensahl", "Q1197"},
      {"Q1055", "Hamburg", kGermany},
      {"Q985", "Baden-Württemberg", kGermany},
      {"Q1022", "Stuttgart", "Q985"},
      {"Q1198", "Nordrhein-Westfalen", kGermany},
      {"Q365", "Köln", "Q1198"},
      {"Q1718", "Düsseldorf", "Q1198"},
      {"Q1199", "Hessen", kGermany},
      {"Q1794", "Frankfurt am Main", "Q1199"},
      {"Q448577", "Frankfurt-Altstadt", "Q1794"},
  };
  return p;
}

const Place& place(const EntityId& id) {
  for (const auto& p : places())
    if (p.id == id) return p;
  throw std::logic_error("unknown fixture place " + id);
}

std::vector<EntityId> chain_from(const EntityId& anchor) {
  std::vector<EntityId> chain;
  for (EntityId id = anchor; !id.empty(); id = place(id).parent) chain.push_back(id);
  return chain;
}

EntityId state_of(const EntityId& id) {
  const auto chain = chain_from(id);
  return chain.size() >= 2 ? chain[chain.size() - 2] : id;
}

struct TrainingRow {
  std::string term;
  std::string street;
  EntityId anchor;
  std::string given;
  RelationKind relation;
  EntityId location;
  std::uint64_t link_count;
  EntityId occupation;
};

const std::vector<TrainingRow>& training_rows() {
  using R = RelationKind;
  static const std::vector<TrainingRow> rows = {
      {"Lessing", "Lessingstraße", "Q1794", "Gotthold", R::born, "Q1794", 120, "Q36180"},
      {"Kant", "Kantstraße", "Q2013767", "Immanuel", R::born, "Q64", 200, "Q4964182"},
      {"Fontane", "Fontaneweg", "Q1711", "Theodor", R::work_location, "Q1711", 150, "Q36180"},
      {"Brahms", "Brahmsallee", "Q1055", "Johannes", R::born, "Q1055", 180, "Q36834"},
      {"Händel", "Händelplatz", "Q2079", "Georg", R::died, "Q2079", 90, "Q36834"},
      {"Dürer", "Dürerstraße", "Q2090", "Albrecht", R::born, "Q2090", 110, "Q1028181"},
      {"Humboldt", "Humboldtstraße", "Q2013767", "Alexander", R::born, "Q64", 160, "Q169470"},
      {"Heine", "Heinestraße", "Q1718", "Heinrich", R::born, "Q1718", 140, "Q36180"},
      {"Schiller", "Schillerplatz", "Q1022", "Friedrich", R::educated_at, "Q1022", 170, "Q36180"},
      {"Goethe", "Goethestraße", "Q448577", "Johann", R::born, "Q1794", 190, "Q36180"},
      {"Bach", "Bachgasse", "Q2079", "Johann", R::work_location, "Q2079", 130, "Q36834"},
      {"Mozart", "Mozartweg", "Q1726", "Wolfgang", R::work_location, "Q1726", 100, "Q36834"},
      {"Luther", "Lutherstraße", "Q1731", "Martin", R::buried, "Q1731", 80, "Q4964182"},
      {"Gutenberg", "Gutenbergplatz", "Q365", "Johannes", R::born, "Q365", 70, "Q1028181"},
      {"Hegel", "Hegelplatz", "Q2013767", "Georg", R::died, "Q64", 150, "Q4964182"},
      {"Leibniz", "Leibnizufer", "Q1715", "Gottfried", R::died, "Q1715", 95, "Q169470"},
      {"Planck", "Planckstraße", "Q131371", "Max", R::born, "Q1726", 130, "Q169470"},
      {"Eichendorff", "Eichendorffring", "Q1022", "Joseph", R::born, "Q1022", 60, "Q36180"},
  };
  return rows;
}

EntityId far_city(const EntityId& anchor, std::size_t salt) {
  static const std::vector<EntityId> cities = {"Q1726", "Q1055", "Q365", "Q1731", "Q1715", "Q1022"};
  const EntityId state = state_of(anchor);
  for (std::size_t k = 0; k < cities.size(); ++k) {
    const EntityId& c = cities[(salt + k) % cities.size()];
    if (state_of(c) != state) return c;
  }
  throw std::logic_error("no far city");
}

}  // namespace

PersonRecord make_person(EntityId id, std::string full_name, std::vector<EntityId> occupations,
                         std::vector<PersonLocation> locations, std::uint64_t link_count) {
  PersonRecord p;
  p.id = std::move(id);
  p.full_name = std::move(full_name);
  kg::split_person_name(p.full_name, p.first_names, p.last_names);
  p.occupations = std::move(occupations);
  p.locations = std::move(locations);
  p.link_count = link_count;
  return p;
}

StreetRecord wilhelmstrasse() {
  StreetRecord s;
  s.osm_id = "way/1001";
  s.name = "Wilhelmstraße";
  s.representative_point = {52.512, 13.383};
  s.chain = {"way/1001", kMitte, kBerlin, kGermany};
  return s;
}

World sample_world() {
  using R = RelationKind;
  World w;
  for (const auto& p : places()) {
    LocationNode n;
    n.id = p.id;
    n.label = p.label;
    n.admin = true;
    if (!p.parent.empty()) n.parents = {p.parent};
    w.locations.push_back(std::move(n));
  }

  w.persons.push_back(make_person(kPaulWilhelm, "Paul Wilhelm", {"Q1028181"}, {{R::born, "Q1731"}}, 35));
  w.persons.push_back(make_person(kWilhelmBusch, "Wilhelm Busch", {"Q49757", "Q1028181"},
                                  {{R::born, "Q552542"}, {R::died, "Q1715"}}, 900));
  w.persons.push_back(make_person(kFriedrichWilhelm, "Friedrich Wilhelm I.", {"Q116"},
                                  {{R::born, kBerlin}, {R::died, kPotsdam}, {R::buried, kPotsdam}}, 600));

  int next = 1;
  auto fresh = [&] { return "Q" + std::to_string(7000000 + next++); };
  for (std::size_t i = 0; i < training_rows().size(); ++i) {
    const auto& row = training_rows()[i];
    const EntityId truth = fresh();
    w.persons.push_back(make_person(truth, row.given + " " + row.term, {row.occupation},
                                    {{row.relation, row.location}}, row.link_count));
    w.persons.push_back(make_person(fresh(), "Karl " + row.term, {row.occupation},
                                    {{R::born, far_city(row.anchor, i)}}, row.link_count * 5));
    w.persons.push_back(make_person(fresh(), "Maria " + row.term, {"Q82955"},
                                    {{R::died, far_city(row.anchor, i + 2)}}, row.link_count / 3));
    w.persons.push_back(make_person(fresh(), "Otto " + row.term, {"Q937857"}, {}, row.link_count * 2));

    StreetRecord s;
    s.osm_id = "Q" + std::to_string(9000000 + i);
    s.wikidata = s.osm_id;
    s.name = row.street;
    s.chain = chain_from(row.anchor);
    s.chain.insert(s.chain.begin(), s.osm_id);
    s.etymology_person = truth;
    w.training.push_back(std::move(s));
  }

  w.targets.push_back(wilhelmstrasse());
  StreetRecord kant;
  kant.osm_id = "way/1002";
  kant.name = "Kantstraße";
  kant.representative_point = {52.521, 13.401};
  kant.chain = {"way/1002", kMitte, kBerlin, kGermany};
  w.targets.push_back(kant);
  StreetRecord nobody;
  nobody.osm_id = "way/1003";
  nobody.name = "Am Markt";
  nobody.representative_point = {52.45, 13.2};
  nobody.chain = {"way/1003", kBerlin, kGermany};
  w.targets.push_back(nobody);
  return w;
}

IndexBundle build_bundle(const World& world) { return IndexBundle::build(world.persons, world.locations); }

fs::path shipped_affix_dir() { return fs::path(STP_SOURCE_DATA_DIR) / "affixes"; }

AffixSet shipped_affixes() { return AffixSet::load(shipped_affix_dir()); }

fs::path scratch_dir(std::string_view name) {
  const fs::path dir = fs::temp_directory_path() / ("stp-" + std::string(name) + "-" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string wikidata_json(const DumpEntity& e) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["type"] = "item";
  j["id"] = e.id;
  j["labels"][e.label_language] = {{"language", e.label_language}, {"value", e.label}};
  if (!e.aliases.empty()) {
    ordered_json list = ordered_json::array();
    for (const auto& a : e.aliases) list.push_back({{"language", e.label_language}, {"value", a}});
    j["aliases"][e.label_language] = list;
  } else {
    j["aliases"] = ordered_json::object();
  }
  ordered_json claims = ordered_json::object();
  for (const auto& c : e.claims) {
    ordered_json value = {{"entity-type", "item"}, {"id", c.value}};
    ordered_json statement = {
        {"mainsnak",
         {{"snaktype", "value"},
          {"property", c.property},
          {"datavalue", {{"value", value}, {"type", "wikibase-entityid"}}}}},
        {"type", "statement"},
        {"rank", "normal"}};
    claims[c.property].push_back(statement);
  }
  j["claims"] = claims;
  return j.dump();
}

std::string wikidata_dump(const World& world) {
  const kg::KgConfig cfg = kg::KgConfig::defaults();
  std::vector<std::string> lines;
  for (const auto& n : world.locations) {
    DumpEntity e{n.id, n.label, {}, {}};
    e.claims.push_back({cfg.instance_of, n.admin ? "Q56061" : "Q486972"});
    for (const auto& p : n.parents) e.claims.push_back({cfg.located_in, p});
    lines.push_back(wikidata_json(e));
  }
  for (const auto& p : world.persons) {
    DumpEntity e{p.id, p.full_name, {{cfg.instance_of, cfg.human}}, p.aliases};
    for (const auto& o : p.occupations) e.claims.push_back({"P106", o});
    for (const auto& l : p.locations)
      e.claims.push_back({cfg.relation_properties[index_of(l.relation)], l.location});
    lines.push_back(wikidata_json(e));
  }
  for (const auto& s : world.training) {
    DumpEntity e{*s.wikidata, s.name, {{cfg.instance_of, "Q79007"}}, {}};
    e.claims.push_back({cfg.named_after, *s.etymology_person});
    e.claims.push_back({cfg.country, kGermany});
    e.claims.push_back({cfg.located_in, s.chain.at(1)});
    lines.push_back(wikidata_json(e));
  }
  std::string out = "[\n";
  for (std::size_t i = 0; i < lines.size(); ++i) out += lines[i] + (i + 1 < lines.size() ? ",\n" : "\n");
  out += "]\n";
  return out;
}

std::string link_count_tsv(const World& world) {
  std::string out;
  for (const auto& p : world.persons) out += p.id + "\t" + std::to_string(p.link_count) + "\n";
  return out;
}

std::string osm_xml(const std::vector<OsmWay>& streets, const std::vector<OsmBoundary>& boundaries) {
  std::ostringstream nodes, ways, relations;
  nodes.precision(9);
  std::int64_t next_node = 1;
  std::int64_t next_way = 900000;
  auto node = [&](double lat, double lon) {
    const std::int64_t id = next_node++;
    nodes << "  <node id=\"" << id << "\" lat=\"" << lat << "\" lon=\"" << lon << "\"/>\n";
    return id;
  };
  for (const auto& w : streets) {
    std::vector<std::int64_t> refs;
    for (const auto& p : w.points) refs.push_back(node(p.lat, p.lon));
    ways << "  <way id=\"" << w.id << "\">\n";
    for (auto r : refs) ways << "    <nd ref=\"" << r << "\"/>\n";
    for (const auto& [k, v] : w.tags) ways << "    <tag k=\"" << k << "\" v=\"" << v << "\"/>\n";
    ways << "  </way>\n";
  }
  for (const auto& b : boundaries) {
    const std::int64_t sw = node(b.south, b.west);
    const std::int64_t se = node(b.south, b.east);
    const std::int64_t ne = node(b.north, b.east);
    const std::int64_t nw = node(b.north, b.west);
    const std::int64_t way_id = next_way++;
    ways << "  <way id=\"" << way_id << "\">\n";
    for (auto r : {sw, se, ne, nw, sw}) ways << "    <nd ref=\"" << r << "\"/>\n";
    ways << "  </way>\n";
    relations << "  <relation id=\"" << b.relation_id << "\">\n"
              << "    <member type=\"way\" ref=\"" << way_id << "\" role=\"outer\"/>\n"
              << "    <tag k=\"type\" v=\"boundary\"/>\n"
              << "    <tag k=\"boundary\" v=\"administrative\"/>\n"
              << "    <tag k=\"admin_level\" v=\"" << b.admin_level << "\"/>\n"
              << "    <tag k=\"wikidata\" v=\"" << b.wikidata << "\"/>\n"
              << "  </relation>\n";
  }
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<osm version=\"0.6\" generator=\"fixture\">\n" +
         nodes.str() + ways.str() + relations.str() + "</osm>\n";
}

std::string sample_osm_extract() {
  std::vector<OsmWay> streets = {
      {1001, {{52.511, 13.382}, {52.512, 13.383}, {52.513, 13.384}},
       {{"highway", "residential"}, {"name", "Wilhelmstraße"}}},
      {1002, {{52.520, 13.400}, {52.521, 13.401}, {52.522, 13.402}},
       {{"highway", "residential"}, {"name", "Kantstraße"}}},
      {1003, {{52.45, 13.20}, {52.45, 13.21}}, {{"highway", "pedestrian"}, {"name", "Am Markt"}}},
      {1004, {{52.46, 13.30}, {52.47, 13.31}}, {{"highway", "platform"}, {"name", "Bahnsteig 1"}}},
  };
  std::vector<OsmBoundary> boundaries = {
      {51477, 2, kGermany, 47.2, 5.8, 55.1, 15.1},
      {62422, 4, kBerlin, 52.33, 13.08, 52.68, 13.77},
      {16347, 9, kMitte, 52.50, 13.35, 52.54, 13.43},
  };
  return osm_xml(streets, boundaries);
}

}  // namespace stp::testing
