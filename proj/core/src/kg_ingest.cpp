#include "stp/kg_ingest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "stp/errors.hpp"
#include "stp/text.hpp"

namespace stp::kg {

using nlohmann::json;

const std::vector<std::string>* RawEntity::claim(std::string_view property) const {
  auto it = claims.find(std::string(property));
  return it == claims.end() ? nullptr : &it->second;
}

bool RawEntity::has_claim_value(std::string_view property, std::string_view value) const {
  const auto* values = claim(property);
  return values && std::find(values->begin(), values->end(), value) != values->end();
}

KgConfig KgConfig::defaults() {
  KgConfig c;
  c.admin_classes = {"Q56061",    "Q6256",     "Q3624078",  "Q107390", "Q1221156",
                     "Q262166",   "Q42744322", "Q22865",    "Q106658", "Q15284",
                     "Q1549591",  "Q515",      "Q10864048", "Q13220204", "Q13221722"};
  c.geo_classes = {"Q486972", "Q532", "Q3957", "Q123705", "Q2983893", "Q82794", "Q5107"};
  c.street_classes = {"Q79007", "Q34442", "Q174782", "Q207934", "Q54114", "Q7543083"};
  c.name_classes = {"Q202444", "Q12308941", "Q11879590", "Q3409032", "Q101352", "Q29042997"};
  return c;
}

KgConfig KgConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read kg config " + path.string());
  const json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError("malformed kg config " + path.string());
  KgConfig c = defaults();
  try {
    auto str = [&](const char* key, std::string& dst) {
      if (j.contains(key)) dst = j.at(key).get<std::string>();
    };
    auto set = [&](const char* key, std::set<std::string>& dst) {
      if (j.contains(key)) dst = j.at(key).get<std::set<std::string>>();
    };
    str("instance_of", c.instance_of);
    str("human", c.human);
    str("located_in", c.located_in);
    str("given_name", c.given_name);
    str("family_name", c.family_name);
    str("named_after", c.named_after);
    str("country", c.country);
    str("coordinates", c.coordinates);
    if (j.contains("occupation_properties"))
      c.occupation_properties = j.at("occupation_properties").get<std::vector<std::string>>();
    if (j.contains("relations")) {
      const auto& rel = j.at("relations");
      for (RelationKind kind : kRelationKinds) {
        const std::string name(to_string(kind));
        if (!rel.contains(name)) throw DataError("kg config lacks relation '" + name + "'");
        c.relation_properties[index_of(kind)] = rel.at(name).get<std::string>();
      }
    }
    set("admin_classes", c.admin_classes);
    set("geo_classes", c.geo_classes);
    set("street_classes", c.street_classes);
    set("name_classes", c.name_classes);
  } catch (const json::exception& e) {
    throw DataError("malformed kg config " + path.string() + ": " + e.what());
  }
  return c;
}

namespace {

enum class LineStatus { entity, structural, non_item };

std::string_view trim_line(std::string_view s) {
  while (!s.empty() && text::is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && (text::is_space(s.back()) || s.back() == ',')) s.remove_suffix(1);
  return s;
}

std::optional<std::string> render_value(const json& datavalue) {
  const auto type_it = datavalue.find("type");
  const auto value_it = datavalue.find("value");
  if (type_it == datavalue.end() || value_it == datavalue.end()) return std::nullopt;
  const std::string type = type_it->get<std::string>();
  const json& v = *value_it;
  if (type == "wikibase-entityid") {
    if (v.contains("id")) return v.at("id").get<std::string>();
    if (v.contains("numeric-id")) return "Q" + std::to_string(v.at("numeric-id").get<long long>());
    return std::nullopt;
  }
  if (type == "string") return v.get<std::string>();
  if (type == "monolingualtext") return v.at("text").get<std::string>();
  if (type == "time") return v.at("time").get<std::string>();
  if (type == "quantity") return v.at("amount").get<std::string>();
  if (type == "globecoordinate") {
    std::ostringstream os;
    os.precision(10);
    os << v.at("latitude").get<double>() << ',' << v.at("longitude").get<double>();
    return os.str();
  }
  return v.dump();
}

LineStatus parse_line(std::string_view line, RawEntity& out) {
  line = trim_line(line);
  if (line.empty() || line == "[" || line == "]") return LineStatus::structural;
  const json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw DataError("malformed entity document");
  const auto id_it = j.find("id");
  if (id_it == j.end() || !id_it->is_string() || id_it->get_ref<const std::string&>().empty())
    throw DataError("entity document without id");
  const std::string& id = id_it->get_ref<const std::string&>();
  if (id.front() != 'Q') return LineStatus::non_item;

  try {
    RawEntity e;
    e.id = id;
    if (auto it = j.find("labels"); it != j.end() && it->is_object())
      for (const auto& [lang, label] : it->items())
        if (label.contains("value")) e.labels[lang] = label.at("value").get<std::string>();
    if (auto it = j.find("aliases"); it != j.end() && it->is_object())
      for (const auto& [lang, list] : it->items()) {
        std::vector<std::string> values;
        for (const auto& a : list)
          if (a.contains("value")) values.push_back(a.at("value").get<std::string>());
        if (!values.empty()) e.aliases[lang] = std::move(values);
      }
    if (auto it = j.find("claims"); it != j.end() && it->is_object())
      for (const auto& [property, statements] : it->items()) {
        std::vector<std::string> values;
        for (const auto& st : statements) {
          if (st.value("rank", "normal") == "deprecated") continue;
          const auto snak = st.find("mainsnak");
          if (snak == st.end() || snak->value("snaktype", "") != "value") continue;
          const auto dv = snak->find("datavalue");
          if (dv == snak->end()) continue;
          if (auto v = render_value(*dv)) values.push_back(std::move(*v));
        }
        if (!values.empty()) e.claims[property] = std::move(values);
      }
    if (auto it = j.find("sitelinks"); it != j.end() && it->is_object())
      for (const auto& [site, link] : it->items())
        if (link.contains("title")) e.sitelink_titles[site] = link.at("title").get<std::string>();
    out = std::move(e);
  } catch (const json::exception& ex) {
    throw DataError(std::string("malformed entity document: ") + ex.what());
  }
  return LineStatus::entity;
}

template <typename T>
void push_unique(std::vector<T>& v, T value) {
  if (std::find(v.begin(), v.end(), value) == v.end()) v.push_back(std::move(value));
}

bool has_any_class(const RawEntity& raw, const KgConfig& config, const std::set<std::string>& classes) {
  const auto* types = raw.claim(config.instance_of);
  if (!types) return false;
  return std::any_of(types->begin(), types->end(), [&](const std::string& t) { return classes.count(t) > 0; });
}

bool is_roman_numeral(std::string_view t) {
  if (!t.empty() && t.back() == '.') t.remove_suffix(1);
  if (t.empty()) return false;
  return std::all_of(t.begin(), t.end(), [](char c) {
    return c == 'I' || c == 'V' || c == 'X' || c == 'L' || c == 'C' || c == 'D' || c == 'M';
  });
}

}  // namespace

std::optional<RawEntity> parse_entity_line(std::string_view line) {
  RawEntity e;
  if (parse_line(line, e) != LineStatus::entity) return std::nullopt;
  return e;
}

EntityStream::EntityStream(const std::filesystem::path& path) : reader_(path) {}
EntityStream::EntityStream(std::istream& in) : reader_(in) {}

std::optional<RawEntity> EntityStream::next() {
  while (reader_.next(line_)) {
    longest_line_ = std::max(longest_line_, line_.size());
    RawEntity e;
    try {
      switch (parse_line(line_, e)) {
        case LineStatus::entity: return e;
        case LineStatus::non_item: ++non_items_; break;
        case LineStatus::structural: break;
      }
    } catch (const DataError&) {
      ++skipped_;
    }
  }
  return std::nullopt;
}

std::vector<RawEntity> stream_entities(std::istream& in, std::uint64_t* skipped) {
  EntityStream stream(in);
  std::vector<RawEntity> out;
  while (auto e = stream.next()) out.push_back(std::move(*e));
  if (skipped) *skipped = stream.skipped();
  return out;
}

std::string label_in(const RawEntity& raw, std::string_view language) {
  if (auto it = raw.labels.find(std::string(language)); it != raw.labels.end()) return it->second;
  if (auto it = raw.labels.find("en"); it != raw.labels.end()) return it->second;
  return {};
}

bool is_name_particle(std::string_view token) {
  static const std::set<std::string, std::less<>> particles = {
      "von", "van", "vom", "zu", "zur", "zum", "der", "den", "de", "du", "da", "di", "del",
      "della", "la", "le", "ten", "ter", "y", "of", "jr.", "sr.", "jun.", "sen."};
  if (is_roman_numeral(token)) return true;
  return particles.count(text::fold_case(token)) > 0;
}

void split_person_name(std::string_view full_name, std::vector<std::string>& first_names,
                       std::vector<std::string>& last_names) {
  const auto tokens = text::split_whitespace(full_name);
  if (tokens.empty()) return;
  if (!is_name_particle(tokens.front())) push_unique(first_names, tokens.front());
  if (tokens.size() == 1) {
    if (!is_name_particle(tokens.front())) push_unique(last_names, tokens.front());
    return;
  }
  for (std::size_t i = 1; i + 1 < tokens.size(); ++i)
    if (!is_name_particle(tokens[i])) push_unique(first_names, tokens[i]);
  if (!is_name_particle(tokens.back())) push_unique(last_names, tokens.back());
}

void apply_name_claims(PersonRecord& person, const std::vector<EntityId>& given,
                       const std::vector<EntityId>& family, const NameLabels& labels) {
  auto resolve = [&](const std::vector<EntityId>& ids) {
    std::vector<std::string> names;
    for (const auto& id : ids)
      if (auto it = labels.find(id); it != labels.end() && !it->second.empty())
        push_unique(names, it->second);
    return names;
  };
  if (auto names = resolve(given); !names.empty()) person.first_names = std::move(names);
  if (auto names = resolve(family); !names.empty()) person.last_names = std::move(names);
}

std::optional<PersonRecord> extract_person(const RawEntity& raw, std::string_view language,
                                           const KgConfig& config, const NameLabels* name_labels) {
  if (!raw.has_claim_value(config.instance_of, config.human)) return std::nullopt;
  PersonRecord p;
  p.id = raw.id;
  p.full_name = text::collapse_whitespace(label_in(raw, language));
  if (p.full_name.empty()) return std::nullopt;

  if (auto it = raw.aliases.find(std::string(language)); it != raw.aliases.end())
    for (const auto& a : it->second) push_unique(p.aliases, text::collapse_whitespace(a));
  for (const auto& prop : config.occupation_properties)
    if (const auto* values = raw.claim(prop))
      for (const auto& v : *values) push_unique(p.occupations, v);
  for (RelationKind kind : kRelationKinds)
    if (const auto* values = raw.claim(config.relation_properties[index_of(kind)]))
      for (const auto& v : *values) push_unique(p.locations, PersonLocation{kind, v});

  split_person_name(p.full_name, p.first_names, p.last_names);
  if (name_labels) {
    static const std::vector<EntityId> none;
    const auto* given = raw.claim(config.given_name);
    const auto* family = raw.claim(config.family_name);
    apply_name_claims(p, given ? *given : none, family ? *family : none, *name_labels);
  }
  return p;
}

std::optional<LocationNode> extract_location(const RawEntity& raw, const KgConfig& config,
                                             std::string_view language) {
  const auto* parents = raw.claim(config.located_in);
  const bool admin = has_any_class(raw, config, config.admin_classes);
  if (!parents && !admin && !has_any_class(raw, config, config.geo_classes)) return std::nullopt;
  LocationNode n;
  n.id = raw.id;
  n.label = label_in(raw, language);
  n.admin = admin;
  if (parents)
    for (const auto& p : *parents)
      if (p != raw.id) push_unique(n.parents, p);
  return n;
}

bool is_name_entity(const RawEntity& raw, const KgConfig& config) {
  return has_any_class(raw, config, config.name_classes);
}

std::optional<NamedStreet> extract_named_street(const RawEntity& raw, std::string_view language,
                                                const KgConfig& config) {
  if (!has_any_class(raw, config, config.street_classes)) return std::nullopt;
  const auto* targets = raw.claim(config.named_after);
  if (!targets) return std::nullopt;
  NamedStreet s;
  s.id = raw.id;
  s.label = label_in(raw, language);
  if (s.label.empty()) return std::nullopt;
  s.named_after = *targets;
  if (const auto* c = raw.claim(config.country)) s.countries = *c;
  if (const auto* coords = raw.claim(config.coordinates); coords && !coords->empty()) {
    const std::string& v = coords->front();
    const auto comma = v.find(',');
    if (comma != std::string::npos) {
      try {
        s.coordinates = GeoPoint{std::stod(v.substr(0, comma)), std::stod(v.substr(comma + 1))};
      } catch (const std::exception&) {
      }
    }
  }
  return s;
}

LinkCountTable load_link_counts(std::istream& in) {
  LinkCountTable table;
  io::LineReader reader(in);
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      ++table.skipped;
      continue;
    }
    std::string_view id(line.data(), tab);
    std::string_view count(line.data() + tab + 1, line.size() - tab - 1);
    while (!count.empty() && text::is_space(count.back())) count.remove_suffix(1);
    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(count.data(), count.data() + count.size(), value);
    if (ec != std::errc() || ptr != count.data() + count.size() || count.empty()) {
      ++table.skipped;
      continue;
    }
    auto [it, inserted] = table.counts.try_emplace(std::string(id), value);
    if (!inserted) it->second = std::max(it->second, value);
  }
  return table;
}

LinkCountTable load_link_counts(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read link-count table " + path.string());
  return load_link_counts(in);
}

}  // namespace stp::kg
