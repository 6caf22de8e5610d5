#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace stp::osm {

enum class ElementType : std::uint8_t { node, way, relation };

struct Member {
  ElementType type = ElementType::way;
  std::int64_t ref = 0;
  std::string role;
};

struct Element {
  ElementType type = ElementType::node;
  std::int64_t id = 0;
  double lat = 0.0;
  double lon = 0.0;
  std::vector<std::pair<std::string, std::string>> tags;
  std::vector<std::int64_t> node_refs;
  std::vector<Member> members;

  const std::string* tag(std::string_view key) const;
};

// Which element types the handler wants; others are parsed but not built.
struct ReadMask {
  bool nodes = true;
  bool ways = true;
  bool relations = true;
};

// Streams an OSM XML extract (.osm or .osm.gz) through expat. PBF input is
// rejected with a DataError naming the conversion to perform.
void read_osm_xml(const std::filesystem::path& path, ReadMask mask,
                  const std::function<void(const Element&)>& handler);

}  // namespace stp::osm
