#include "stp/osm_reader.hpp"

#include <expat.h>

#include <array>
#include <charconv>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>

#include "stp/errors.hpp"
#include "stp/io.hpp"

namespace stp::osm {

const std::string* Element::tag(std::string_view key) const {
  for (const auto& [k, v] : tags)
    if (k == key) return &v;
  return nullptr;
}

namespace {

struct ParseState {
  ReadMask mask;
  const std::function<void(const Element&)>* handler = nullptr;
  Element current;
  bool active = false;  // inside a wanted top-level element
  bool wanted = false;
  std::exception_ptr error;
  XML_Parser parser = nullptr;
};

std::int64_t to_int(const char* s) {
  std::int64_t v = 0;
  std::from_chars(s, s + std::strlen(s), v);
  return v;
}

void on_start(void* data, const XML_Char* name, const XML_Char** attrs) {
  auto& st = *static_cast<ParseState*>(data);
  auto attr = [&](const char* key) -> const char* {
    for (int i = 0; attrs[i]; i += 2)
      if (std::strcmp(attrs[i], key) == 0) return attrs[i + 1];
    return nullptr;
  };

  if (std::strcmp(name, "node") == 0 || std::strcmp(name, "way") == 0 ||
      std::strcmp(name, "relation") == 0) {
    ElementType type = name[0] == 'n' ? ElementType::node : name[0] == 'w' ? ElementType::way : ElementType::relation;
    st.active = true;
    st.wanted = (type == ElementType::node && st.mask.nodes) || (type == ElementType::way && st.mask.ways) ||
                (type == ElementType::relation && st.mask.relations);
    if (!st.wanted) return;
    st.current.type = type;
    st.current.tags.clear();
    st.current.node_refs.clear();
    st.current.members.clear();
    const char* id = attr("id");
    st.current.id = id ? to_int(id) : 0;
    if (type == ElementType::node) {
      const char* lat = attr("lat");
      const char* lon = attr("lon");
      st.current.lat = lat ? std::strtod(lat, nullptr) : 0.0;
      st.current.lon = lon ? std::strtod(lon, nullptr) : 0.0;
    }
    return;
  }
  if (!st.active || !st.wanted) return;
  if (std::strcmp(name, "tag") == 0) {
    const char* k = attr("k");
    const char* v = attr("v");
    if (k && v) st.current.tags.emplace_back(k, v);
  } else if (std::strcmp(name, "nd") == 0) {
    if (const char* ref = attr("ref")) st.current.node_refs.push_back(to_int(ref));
  } else if (std::strcmp(name, "member") == 0) {
    Member m;
    const char* type = attr("type");
    const char* ref = attr("ref");
    const char* role = attr("role");
    if (!type || !ref) return;
    m.type = type[0] == 'n' ? ElementType::node : type[0] == 'w' ? ElementType::way : ElementType::relation;
    m.ref = to_int(ref);
    m.role = role ? role : "";
    st.current.members.push_back(std::move(m));
  }
}

void on_end(void* data, const XML_Char* name) {
  auto& st = *static_cast<ParseState*>(data);
  if (std::strcmp(name, "node") != 0 && std::strcmp(name, "way") != 0 && std::strcmp(name, "relation") != 0)
    return;
  if (st.active && st.wanted && !st.error) {
    // Exceptions must not unwind through expat's C frames.
    try {
      (*st.handler)(st.current);
    } catch (...) {
      st.error = std::current_exception();
      XML_StopParser(st.parser, XML_FALSE);
    }
  }
  st.active = false;
  st.wanted = false;
}

}  // namespace

void read_osm_xml(const std::filesystem::path& path, ReadMask mask,
                  const std::function<void(const Element&)>& handler) {
  const std::string ext = path.extension().string();
  if (ext == ".pbf")
    throw DataError(path.string() + ": PBF extracts are not supported; convert with `osmium cat in.osm.pbf -o out.osm.gz`");

  io::ChunkReader reader(path);
  std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreate(nullptr),
                                                                      &XML_ParserFree);
  if (!parser) throw Error("cannot create XML parser");
  ParseState st;
  st.mask = mask;
  st.handler = &handler;
  st.parser = parser.get();
  XML_SetUserData(parser.get(), &st);
  XML_SetElementHandler(parser.get(), on_start, on_end);

  std::array<char, 1 << 16> buf{};
  for (;;) {
    const std::size_t n = reader.read(buf.data(), buf.size());
    const bool last = n == 0;
    const auto status = XML_Parse(parser.get(), buf.data(), static_cast<int>(n), last);
    if (st.error) std::rethrow_exception(st.error);
    if (status == XML_STATUS_ERROR)
      throw DataError(path.string() + ":" + std::to_string(XML_GetCurrentLineNumber(parser.get())) +
                      ": XML error: " + XML_ErrorString(XML_GetErrorCode(parser.get())));
    if (last) break;
  }
}

}  // namespace stp::osm
