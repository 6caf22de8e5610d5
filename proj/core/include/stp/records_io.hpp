#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "stp/types.hpp"

namespace stp::records {

// Newline-delimited JSON encodings. Field names follow the record structs:
//
//   person:   {"id","full_name","first_names","last_names","aliases",
//              "occupations","locations":[["born","Q64"],...],"link_count"}
//   location: {"id","label","parents","admin"}
//   street:   {"osm_id","name","representative_point":[lat,lon],"chain",
//              "etymology_person","unresolved","wikidata","region_hint"}

std::string to_json_line(const PersonRecord& p);
std::string to_json_line(const LocationNode& n);
std::string to_json_line(const StreetRecord& s);

// Throw DataError on malformed input.
PersonRecord person_from_json(std::string_view line);
LocationNode location_from_json(std::string_view line);
StreetRecord street_from_json(std::string_view line);

std::vector<PersonRecord> read_persons(const std::filesystem::path& path);
std::vector<LocationNode> read_locations(const std::filesystem::path& path);
std::vector<StreetRecord> read_streets(const std::filesystem::path& path);

template <typename Record>
void write_jsonl(std::ostream& out, const std::vector<Record>& records) {
  for (const auto& r : records) out << to_json_line(r) << '\n';
}

}  // namespace stp::records
