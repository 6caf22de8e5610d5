#include "stp/index_store.hpp"

#include <zlib.h>

#include <algorithm>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "stp/errors.hpp"
#include "stp/io.hpp"
#include "stp/text.hpp"

namespace stp {

// ---------------------------------------------------------------------------
// PersonNameIndex

void PersonNameIndex::add(std::string_view term, const EntityId& person) {
  std::string key = text::normalize_term(term);
  if (key.empty()) return;
  entries_[std::move(key)].push_back(person);
}

void PersonNameIndex::finalize() {
  for (auto& [term, ids] : entries_) {
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  }
}

const std::vector<EntityId>& PersonNameIndex::lookup(std::string_view term) const {
  static const std::vector<EntityId> empty;
  auto it = entries_.find(text::normalize_term(term));
  return it == entries_.end() ? empty : it->second;
}

std::vector<std::string> indexed_variants(const PersonRecord& person) {
  std::vector<std::string> terms;
  auto add = [&](std::string_view t) {
    std::string n = text::normalize_term(t);
    if (n.empty()) return;
    std::string dehyphenated = text::collapse_whitespace(text::replace_hyphens(n));
    terms.push_back(std::move(n));
    if (!dehyphenated.empty()) terms.push_back(std::move(dehyphenated));
  };
  auto tokens_of = [](const std::vector<std::string>& names) {
    std::vector<std::string> tokens;
    for (const auto& n : names)
      for (auto& t : text::split_whitespace(n)) tokens.push_back(std::move(t));
    return tokens;
  };

  add(person.full_name);
  const auto first = tokens_of(person.first_names);
  const auto last = tokens_of(person.last_names);
  for (const auto& n : person.first_names) add(n);
  for (const auto& n : person.last_names) add(n);
  for (const auto& t : first) add(t);
  for (const auto& t : last) add(t);
  for (const auto& a : person.aliases) add(a);
  for (const auto& f : first)
    for (const auto& l : person.last_names) add(f + " " + l);

  std::sort(terms.begin(), terms.end());
  terms.erase(std::unique(terms.begin(), terms.end()), terms.end());
  return terms;
}

// ---------------------------------------------------------------------------
// SpatialDag

const LocationNode* SpatialDag::find(std::string_view id) const {
  auto it = nodes_.find(id);
  return it == nodes_.end() ? nullptr : &it->second;
}

const EntityId* SpatialDag::canonical_parent(std::string_view id) const {
  auto it = canonical_.find(std::string(id));
  return it == canonical_.end() ? nullptr : &it->second;
}

std::vector<EntityId> SpatialDag::chain_of(std::string_view id) const {
  std::vector<EntityId> chain{EntityId(id)};
  if (!contains(id)) return chain;
  std::unordered_set<std::string_view> seen{chain.front()};
  const EntityId* parent = canonical_parent(id);
  while (parent && seen.insert(*parent).second) {
    chain.push_back(*parent);
    parent = canonical_parent(*parent);
  }
  return chain;
}

namespace {

using NodeMap = std::map<EntityId, LocationNode, std::less<>>;

// Deterministic DFS over nodes in id order, parents in id order. Returns the
// first cycle found as a node sequence c0 -> c1 -> ... -> c0.
std::vector<EntityId> find_cycle(const NodeMap& nodes) {
  enum class Color : std::uint8_t { white, gray, black };
  std::unordered_map<std::string_view, Color> color;
  color.reserve(nodes.size());

  struct Frame {
    const LocationNode* node;
    std::vector<std::string_view> parents;
    std::size_t next = 0;
  };
  auto make_frame = [](const LocationNode& n) {
    Frame f{&n, {n.parents.begin(), n.parents.end()}, 0};
    std::sort(f.parents.begin(), f.parents.end());
    return f;
  };

  for (const auto& [root_id, root] : nodes) {
    if (color[root_id] != Color::white) continue;
    std::vector<Frame> stack;
    stack.push_back(make_frame(root));
    color[root_id] = Color::gray;
    while (!stack.empty()) {
      Frame& top = stack.back();
      if (top.next == top.parents.size()) {
        color[top.node->id] = Color::black;
        stack.pop_back();
        continue;
      }
      const std::string_view parent = top.parents[top.next++];
      const Color c = color[parent];
      if (c == Color::gray) {
        std::vector<EntityId> cycle;
        auto start = std::find_if(stack.begin(), stack.end(),
                                  [&](const Frame& f) { return f.node->id == parent; });
        for (auto it = start; it != stack.end(); ++it) cycle.push_back(it->node->id);
        return cycle;
      }
      if (c == Color::white) {
        auto it = nodes.find(parent);
        color[parent] = Color::gray;
        stack.push_back(make_frame(it->second));
      }
    }
  }
  return {};
}

}  // namespace

SpatialDag SpatialDag::build(std::vector<LocationNode> locations, BuildStats* stats) {
  BuildStats local;
  BuildStats& s = stats ? *stats : local;
  SpatialDag dag;
  for (auto& n : locations) {
    EntityId id = n.id;
    dag.nodes_.insert_or_assign(std::move(id), std::move(n));
  }
  for (auto& [id, node] : dag.nodes_) {
    std::vector<EntityId> kept;
    for (auto& p : node.parents) {
      if (p == id) {
        ++s.self_loops;
      } else if (std::find(kept.begin(), kept.end(), p) != kept.end()) {
        ++s.duplicate_parents;
      } else if (!dag.nodes_.count(p)) {
        ++s.dangling_parents;
      } else {
        kept.push_back(std::move(p));
      }
    }
    node.parents = std::move(kept);
  }
  for (;;) {
    const auto cycle = find_cycle(dag.nodes_);
    if (cycle.empty()) break;
    const auto max_it = std::max_element(cycle.begin(), cycle.end());
    const std::size_t i = static_cast<std::size_t>(max_it - cycle.begin());
    const EntityId& source = cycle[i];
    const EntityId& target = cycle[(i + 1) % cycle.size()];
    auto& parents = dag.nodes_.find(source)->second.parents;
    parents.erase(std::find(parents.begin(), parents.end(), target));
    s.broken_edges.emplace_back(source, target);
  }
  dag.compute_canonical_parents();
  return dag;
}

void SpatialDag::compute_canonical_parents() {
  canonical_.clear();
  for (const auto& [id, node] : nodes_) {
    if (node.parents.empty()) continue;
    const EntityId* admin_parent = nullptr;
    std::size_t admin_count = 0;
    for (const auto& p : node.parents) {
      const LocationNode* pn = find(p);
      if (pn && pn->admin) {
        ++admin_count;
        admin_parent = &p;
      }
    }
    if (admin_count == 1) {
      canonical_.emplace(id, *admin_parent);
    } else {
      canonical_.emplace(id, *std::min_element(node.parents.begin(), node.parents.end()));
    }
  }
}

// ---------------------------------------------------------------------------
// IndexBundle

std::string BuildReport::to_text() const {
  std::ostringstream os;
  os << "persons\t" << persons << '\n'
     << "duplicate_persons\t" << duplicate_persons << '\n'
     << "locations\t" << locations << '\n'
     << "terms\t" << terms << '\n'
     << "dangling_parents\t" << dangling_parents << '\n'
     << "cycles_broken\t" << cycles_broken << '\n';
  for (const auto& [from, to] : broken_edges) os << "broken_edge\t" << from << '\t' << to << '\n';
  return os.str();
}

IndexBundle IndexBundle::build(std::vector<PersonRecord> persons, std::vector<LocationNode> locations,
                               BuildReport* report) {
  IndexBundle b;
  std::size_t duplicates = 0;
  for (auto& p : persons) {
    EntityId id = p.id;
    if (!b.persons_.insert_or_assign(std::move(id), std::move(p)).second) ++duplicates;
  }
  for (const auto& [id, p] : b.persons_)
    for (const auto& term : indexed_variants(p)) b.name_index_.entries_[term].push_back(id);
  b.name_index_.finalize();

  SpatialDag::BuildStats stats;
  b.dag_ = SpatialDag::build(std::move(locations), &stats);

  if (report) {
    report->persons = b.persons_.size();
    report->duplicate_persons = duplicates;
    report->locations = b.dag_.size();
    report->terms = b.name_index_.term_count();
    report->dangling_parents = stats.dangling_parents;
    report->cycles_broken = stats.broken_edges.size();
    report->broken_edges = stats.broken_edges;
  }
  return b;
}

const PersonRecord* IndexBundle::person(std::string_view id) const {
  auto it = persons_.find(id);
  return it == persons_.end() ? nullptr : &it->second;
}

std::uint64_t IndexBundle::link_count(std::string_view id) const {
  const PersonRecord* p = person(id);
  return p ? p->link_count : 0;
}

std::span<const EntityId> IndexBundle::occupations_of(std::string_view id) const {
  const PersonRecord* p = person(id);
  return p ? std::span<const EntityId>(p->occupations) : std::span<const EntityId>();
}

std::span<const PersonLocation> IndexBundle::locations_of(std::string_view id) const {
  const PersonRecord* p = person(id);
  return p ? std::span<const PersonLocation>(p->locations) : std::span<const PersonLocation>();
}

namespace {

constexpr char kMagic[8] = {'S', 'T', 'P', 'B', 'N', 'D', 'L', '\0'};

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    buf_.append(s);
  }
  void strings(const std::vector<std::string>& v) {
    u32(static_cast<std::uint32_t>(v.size()));
    for (const auto& s : v) str(s);
  }
  std::string& buffer() { return buf_; }

 private:
  std::string buf_;
};

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(take(1)[0]); }
  std::uint32_t u32() {
    auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= std::uint64_t(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }
  std::string str() {
    const std::uint32_t n = u32();
    return std::string(take(n));
  }
  std::vector<std::string> strings() {
    const std::uint32_t n = count();
    std::vector<std::string> v;
    v.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) v.push_back(str());
    return v;
  }
  // Element counts can never exceed the remaining bytes.
  std::uint32_t count() {
    const std::uint32_t n = u32();
    if (n > data_.size() - pos_) corrupt();
    return n;
  }
  bool done() const { return pos_ == data_.size(); }

  [[noreturn]] static void corrupt() {
    throw FormatError("corrupt index bundle (expected format version " +
                      std::to_string(IndexBundle::kFormatVersion) + ")");
  }

 private:
  std::string_view take(std::size_t n) {
    if (n > data_.size() - pos_) corrupt();
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::string_view data_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::string_view data) {
  uLong crc = crc32(0L, Z_NULL, 0);
  crc = crc32(crc, reinterpret_cast<const Bytef*>(data.data()), static_cast<uInt>(data.size()));
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::string IndexBundle::serialize() const {
  Writer payload;
  payload.u32(static_cast<std::uint32_t>(persons_.size()));
  for (const auto& [id, p] : persons_) {
    payload.str(p.id);
    payload.str(p.full_name);
    payload.strings(p.first_names);
    payload.strings(p.last_names);
    payload.strings(p.aliases);
    payload.strings(p.occupations);
    payload.u32(static_cast<std::uint32_t>(p.locations.size()));
    for (const auto& l : p.locations) {
      payload.u8(static_cast<std::uint8_t>(l.relation));
      payload.str(l.location);
    }
    payload.u64(p.link_count);
  }
  payload.u32(static_cast<std::uint32_t>(dag_.size()));
  for (const auto& [id, n] : dag_.nodes()) {
    payload.str(n.id);
    payload.str(n.label);
    payload.u8(n.admin ? 1 : 0);
    payload.strings(n.parents);
  }
  std::vector<const std::pair<const std::string, std::vector<EntityId>>*> terms;
  terms.reserve(name_index_.entries().size());
  for (const auto& e : name_index_.entries()) terms.push_back(&e);
  std::sort(terms.begin(), terms.end(), [](auto* a, auto* b) { return a->first < b->first; });
  payload.u32(static_cast<std::uint32_t>(terms.size()));
  for (const auto* e : terms) {
    payload.str(e->first);
    payload.strings(e->second);
  }

  Writer out;
  out.buffer().append(kMagic, sizeof(kMagic));
  out.u32(kFormatVersion);
  out.u64(payload.buffer().size());
  out.buffer().append(payload.buffer());
  out.u32(crc_of(out.buffer()));
  return std::move(out.buffer());
}

IndexBundle IndexBundle::deserialize(std::string_view bytes) {
  if (bytes.size() < sizeof(kMagic) + 4 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0)
    throw FormatError("not an index bundle (expected format version " + std::to_string(kFormatVersion) + ")");
  Reader header(bytes.substr(sizeof(kMagic)));
  const std::uint32_t version = header.u32();
  if (version != kFormatVersion)
    throw FormatError("index bundle format version " + std::to_string(version) + ", expected " +
                      std::to_string(kFormatVersion));
  const std::uint64_t payload_size = header.u64();
  const std::size_t header_size = sizeof(kMagic) + 4 + 8;
  if (bytes.size() != header_size + payload_size + 4) Reader::corrupt();
  Reader trailer(bytes.substr(header_size + payload_size));
  if (trailer.u32() != crc_of(bytes.substr(0, header_size + payload_size))) Reader::corrupt();

  Reader r(bytes.substr(header_size, payload_size));
  std::vector<PersonRecord> persons(r.count());
  for (auto& p : persons) {
    p.id = r.str();
    p.full_name = r.str();
    p.first_names = r.strings();
    p.last_names = r.strings();
    p.aliases = r.strings();
    p.occupations = r.strings();
    p.locations.resize(r.count());
    for (auto& l : p.locations) {
      const std::uint8_t kind = r.u8();
      if (kind >= kRelationKindCount) Reader::corrupt();
      l.relation = static_cast<RelationKind>(kind);
      l.location = r.str();
    }
    p.link_count = r.u64();
  }
  std::vector<LocationNode> locations(r.count());
  for (auto& n : locations) {
    n.id = r.str();
    n.label = r.str();
    n.admin = r.u8() != 0;
    n.parents = r.strings();
  }

  IndexBundle b;
  const std::uint32_t term_count = r.count();
  b.name_index_.entries_.reserve(term_count);
  for (std::uint32_t i = 0; i < term_count; ++i) {
    std::string term = r.str();
    b.name_index_.entries_.emplace(std::move(term), r.strings());
  }
  if (!r.done()) Reader::corrupt();

  for (auto& p : persons) {
    EntityId id = p.id;
    b.persons_.emplace(std::move(id), std::move(p));
  }
  b.dag_ = SpatialDag::build(std::move(locations));
  return b;
}

void IndexBundle::save(const std::filesystem::path& path) const { io::write_file_atomic(path, serialize()); }

IndexBundle IndexBundle::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read index bundle " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

}  // namespace stp
