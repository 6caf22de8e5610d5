#include "stp/records_io.hpp"

#include <json.hpp>

#include "stp/errors.hpp"
#include "stp/io.hpp"

namespace stp::records {

using nlohmann::json;
using nlohmann::ordered_json;

std::string to_json_line(const PersonRecord& p) {
  ordered_json j;
  j["id"] = p.id;
  j["full_name"] = p.full_name;
  j["first_names"] = p.first_names;
  j["last_names"] = p.last_names;
  j["aliases"] = p.aliases;
  j["occupations"] = p.occupations;
  ordered_json locs = ordered_json::array();
  for (const auto& l : p.locations) locs.push_back({std::string(to_string(l.relation)), l.location});
  j["locations"] = std::move(locs);
  j["link_count"] = p.link_count;
  return j.dump();
}

std::string to_json_line(const LocationNode& n) {
  ordered_json j;
  j["id"] = n.id;
  j["label"] = n.label;
  j["parents"] = n.parents;
  j["admin"] = n.admin;
  return j.dump();
}

std::string to_json_line(const StreetRecord& s) {
  ordered_json j;
  j["osm_id"] = s.osm_id;
  j["name"] = s.name;
  j["representative_point"] = {s.representative_point.lat, s.representative_point.lon};
  j["chain"] = s.chain;
  j["etymology_person"] = s.etymology_person ? json(*s.etymology_person) : json(nullptr);
  j["unresolved"] = s.unresolved;
  j["wikidata"] = s.wikidata ? json(*s.wikidata) : json(nullptr);
  j["region_hint"] = s.region_hint;
  return j.dump();
}

namespace {

json parse(std::string_view line, const char* what) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError(std::string("malformed ") + what + " record");
  return j;
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

template <typename Fn>
auto read_all(const std::filesystem::path& path, Fn parse_line) {
  std::vector<decltype(parse_line(std::string_view{}))> out;
  io::LineReader reader(path);
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    try {
      out.push_back(parse_line(line));
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(reader.line_number()) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

PersonRecord person_from_json(std::string_view line) {
  const json j = parse(line, "person");
  try {
    PersonRecord p;
    p.id = j.at("id").get<std::string>();
    p.full_name = j.at("full_name").get<std::string>();
    p.first_names = get_or<std::vector<std::string>>(j, "first_names", {});
    p.last_names = get_or<std::vector<std::string>>(j, "last_names", {});
    p.aliases = get_or<std::vector<std::string>>(j, "aliases", {});
    p.occupations = get_or<std::vector<std::string>>(j, "occupations", {});
    if (auto it = j.find("locations"); it != j.end()) {
      for (const auto& pair : *it) {
        const auto kind = parse_relation_kind(pair.at(0).get<std::string>());
        if (!kind) throw DataError("unknown relation kind " + pair.at(0).dump());
        p.locations.push_back({*kind, pair.at(1).get<std::string>()});
      }
    }
    p.link_count = get_or<std::uint64_t>(j, "link_count", 0);
    if (p.id.empty() || p.full_name.empty()) throw DataError("person without id or full_name");
    return p;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed person record: ") + e.what());
  }
}

LocationNode location_from_json(std::string_view line) {
  const json j = parse(line, "location");
  try {
    LocationNode n;
    n.id = j.at("id").get<std::string>();
    n.label = get_or<std::string>(j, "label", "");
    n.parents = get_or<std::vector<std::string>>(j, "parents", {});
    n.admin = get_or<bool>(j, "admin", false);
    if (n.id.empty()) throw DataError("location without id");
    return n;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed location record: ") + e.what());
  }
}

StreetRecord street_from_json(std::string_view line) {
  const json j = parse(line, "street");
  try {
    StreetRecord s;
    s.osm_id = j.at("osm_id").get<std::string>();
    s.name = j.at("name").get<std::string>();
    if (auto it = j.find("representative_point"); it != j.end() && it->is_array() && it->size() == 2)
      s.representative_point = {(*it)[0].get<double>(), (*it)[1].get<double>()};
    s.chain = get_or<std::vector<std::string>>(j, "chain", {});
    if (auto it = j.find("etymology_person"); it != j.end() && !it->is_null())
      s.etymology_person = it->get<std::string>();
    s.unresolved = get_or<bool>(j, "unresolved", false);
    if (auto it = j.find("wikidata"); it != j.end() && !it->is_null()) s.wikidata = it->get<std::string>();
    s.region_hint = get_or<std::string>(j, "region_hint", "");
    if (s.osm_id.empty() || s.name.empty()) throw DataError("street without osm_id or name");
    return s;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed street record: ") + e.what());
  }
}

std::vector<PersonRecord> read_persons(const std::filesystem::path& path) {
  return read_all(path, person_from_json);
}

std::vector<LocationNode> read_locations(const std::filesystem::path& path) {
  return read_all(path, location_from_json);
}

std::vector<StreetRecord> read_streets(const std::filesystem::path& path) {
  return read_all(path, street_from_json);
}

}  // namespace stp::records
