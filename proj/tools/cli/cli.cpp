#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include <CLI11.hpp>
#include <json.hpp>

#include "stp/candidate_retrieval.hpp"
#include "stp/config.hpp"
#include "stp/errors.hpp"
#include "stp/evaluation.hpp"
#include "stp/features.hpp"
#include "stp/index_store.hpp"
#include "stp/io.hpp"
#include "stp/kg_ingest.hpp"
#include "stp/linker_model.hpp"
#include "stp/name_truncation.hpp"
#include "stp/osm_ingest.hpp"
#include "stp/parallel.hpp"
#include "stp/records_io.hpp"

namespace stp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  fs::path data_dir;
  fs::path affix_dir;
  std::string language = "de";
  std::uint64_t seed = 42;
  double threshold = 0.5;
  Hyperparameters hyperparameters;
  std::vector<EntityId> regions;
  unsigned threads = 1;
  bool quiet = false;
  RetrievalOptions retrieval;
};

struct Log {
  std::ostream& out;
  std::string stage;
  bool quiet = false;

  template <typename... T>
  void info(const T&... parts) const {
    if (quiet) return;
    out << "stp " << stage << ": ";
    (out << ... << parts);
    out << '\n';
  }
};

// Raw flag values plus the options they came from, so unset flags can fall
// back to the environment and the config file.
struct Flags {
  std::string config;
  std::string data_dir;
  std::string affix_dir;
  std::string language = "de";
  std::uint64_t seed = 42;
  double threshold = 0.5;
  double learning_rate = 0.1;
  double l2 = 1e-4;
  int epochs = 500;
  std::vector<std::string> regions;
  unsigned threads = 1;
  bool quiet = false;
  bool union_terms = false;
  std::size_t cap = 0;

  std::vector<CLI::Option*> data_dir_opts, affix_dir_opts, language_opts, seed_opts, threshold_opts, lr_opts,
      l2_opts, epochs_opts, regions_opts, threads_opts, cap_opts;
};

bool given(const std::vector<CLI::Option*>& opts) {
  return std::any_of(opts.begin(), opts.end(), [](const CLI::Option* o) { return o->count() > 0; });
}

fs::path builtin_data_dir() {
  const fs::path source = STP_SOURCE_DATA_DIR;
  if (fs::exists(source / "affixes")) return source;
  return STP_INSTALL_DATA_DIR;
}

template <typename T>
T pick(const std::vector<CLI::Option*>& opts, const T& flag, const json& file, const char* key, const T& fallback) {
  if (given(opts)) return flag;
  if (file.contains(key)) {
    try {
      return file.at(key).get<T>();
    } catch (const json::exception& e) {
      throw DataError(std::string("config key '") + key + "': " + e.what());
    }
  }
  return fallback;
}

RunConfig resolve_config(const Flags& f) {
  json file = json::object();
  if (!f.config.empty()) {
    std::ifstream in(f.config);
    if (!in) throw UsageError("cannot read config " + f.config);
    file = json::parse(in, nullptr, false);
    if (file.is_discarded() || !file.is_object()) throw DataError("malformed config " + f.config);
  }
  RunConfig c;
  if (given(f.data_dir_opts))
    c.data_dir = f.data_dir;
  else if (const char* env = std::getenv("STP_DATA_DIR"); env && *env)
    c.data_dir = env;
  else
    c.data_dir = pick<std::string>({}, "", file, "data_dir", builtin_data_dir().string());
  c.affix_dir = pick<std::string>(f.affix_dir_opts, f.affix_dir, file, "affix_dir", (c.data_dir / "affixes").string());
  c.language = pick(f.language_opts, f.language, file, "language", f.language);
  c.seed = pick(f.seed_opts, f.seed, file, "seed", f.seed);
  c.threshold = pick(f.threshold_opts, f.threshold, file, "threshold", f.threshold);
  c.hyperparameters.learning_rate = pick(f.lr_opts, f.learning_rate, file, "learning_rate", f.learning_rate);
  c.hyperparameters.l2 = pick(f.l2_opts, f.l2, file, "l2", f.l2);
  c.hyperparameters.epochs = pick(f.epochs_opts, f.epochs, file, "epochs", f.epochs);
  c.hyperparameters.seed = c.seed;
  c.regions = pick(f.regions_opts, f.regions, file, "regions", f.regions);
  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  c.threads = std::max(1u, pick(f.threads_opts, f.threads, file, "threads", hw));
  c.quiet = f.quiet;
  c.retrieval.union_terms = f.union_terms;
  const std::size_t cap = pick(f.cap_opts, f.cap, file, "candidate_cap", std::size_t{0});
  if (cap > 0) c.retrieval.cap = cap;
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw UsageError("threshold must lie in (0,1)");
  return c;
}

void require_file(const std::string& what, const fs::path& p) {
  if (p.empty()) throw UsageError("missing " + what);
  if (!fs::is_regular_file(p)) throw UsageError(what + " does not exist: " + p.string());
}

template <typename Fn>
auto with_input(const fs::path& input, Fn&& fn) {
  try {
    return fn();
  } catch (const FormatError& e) {
    throw FormatError(input.string() + ": " + e.what());
  } catch (const DataError& e) {
    const std::string msg = e.what();
    if (msg.find(input.string()) != std::string::npos) throw;
    throw DataError(input.string() + ": " + msg);
  }
}

IndexBundle load_bundle(const fs::path& p) {
  return with_input(p, [&] { return IndexBundle::load(p); });
}

Model load_model(const fs::path& p) {
  return with_input(p, [&] { return Model::load(p); });
}

AffixSet load_affixes(const RunConfig& c) {
  if (!fs::is_directory(c.affix_dir)) throw UsageError("affix directory does not exist: " + c.affix_dir.string());
  return AffixSet::load(c.affix_dir);
}

std::vector<StreetRecord> load_streets(const fs::path& p, const IndexBundle* bundle) {
  auto streets = records::read_streets(p);
  if (bundle)
    for (auto& s : streets) osm::resolve_chain(s, bundle->dag());
  return streets;
}

std::string tsv_field(std::string s) {
  std::replace_if(s.begin(), s.end(), [](char ch) { return ch == '\t' || ch == '\n' || ch == '\r'; }, ' ');
  return s;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

io::Manifest manifest(const std::string& stage, const std::vector<fs::path>& inputs, const RunConfig& c) {
  io::Manifest m;
  m.stage = stage;
  for (const auto& i : inputs) m.inputs.push_back(io::digest(i));
  m.parameters["version"] = STP_VERSION;
  m.parameters["language"] = c.language;
  return m;
}

void add_affix_inputs(io::Manifest& m, const RunConfig& c) {
  m.inputs.push_back(io::digest(c.affix_dir / "prefixes.txt"));
  m.inputs.push_back(io::digest(c.affix_dir / "suffixes.txt"));
}

void add_model_parameters(io::Manifest& m, const RunConfig& c) {
  m.parameters["seed"] = std::to_string(c.seed);
  m.parameters["threshold"] = fixed(c.threshold);
  m.parameters["learning_rate"] = fixed(c.hyperparameters.learning_rate, 8);
  m.parameters["l2"] = fixed(c.hyperparameters.l2, 8);
  m.parameters["epochs"] = std::to_string(c.hyperparameters.epochs);
  m.parameters["union_terms"] = c.retrieval.union_terms ? "true" : "false";
  m.parameters["candidate_cap"] = c.retrieval.cap ? std::to_string(*c.retrieval.cap) : "none";
}

template <typename Record>
void write_records(const fs::path& path, const std::vector<Record>& records) {
  io::AtomicFile f(path);
  records::write_jsonl(f.stream(), records);
  f.commit();
}

// ---- ingest-kg -------------------------------------------------------------

struct IngestKgArgs {
  std::string dump, link_counts, out, kg_config, country;
};

int ingest_kg(const RunConfig& c, const IngestKgArgs& a, const Log& log) {
  require_file("--dump", a.dump);
  require_file("--link-counts", a.link_counts);
  if (a.out.empty()) throw UsageError("missing --out");

  std::vector<fs::path> inputs{a.dump, a.link_counts};
  kg::KgConfig kcfg = kg::KgConfig::defaults();
  fs::path kcfg_path = a.kg_config;
  if (kcfg_path.empty() && fs::exists(c.data_dir / "kg_config.json")) kcfg_path = c.data_dir / "kg_config.json";
  if (!kcfg_path.empty()) {
    require_file("--kg-config", kcfg_path);
    kcfg = kg::KgConfig::load(kcfg_path);
    inputs.push_back(kcfg_path);
  }

  const auto counts = with_input(a.link_counts, [&] { return kg::load_link_counts(fs::path(a.link_counts)); });

  std::vector<PersonRecord> persons;
  std::vector<LocationNode> locations;
  std::vector<kg::NamedStreet> named;
  std::unordered_map<EntityId, std::pair<std::vector<EntityId>, std::vector<EntityId>>> name_claims;
  kg::NameLabels labels;

  kg::EntityStream stream{fs::path(a.dump)};
  std::uint64_t entities = 0;
  while (auto raw = stream.next()) {
    ++entities;
    if (kg::is_name_entity(*raw, kcfg)) {
      labels[raw->id] = kg::label_in(*raw, c.language);
      continue;
    }
    if (auto p = kg::extract_person(*raw, c.language, kcfg)) {
      if (auto it = counts.counts.find(p->id); it != counts.counts.end()) p->link_count = it->second;
      const auto* g = raw->claim(kcfg.given_name);
      const auto* f = raw->claim(kcfg.family_name);
      if (g || f)
        name_claims[p->id] = {g ? *g : std::vector<EntityId>{}, f ? *f : std::vector<EntityId>{}};
      persons.push_back(std::move(*p));
      continue;
    }
    if (auto s = kg::extract_named_street(*raw, c.language, kcfg)) named.push_back(std::move(*s));
    if (auto n = kg::extract_location(*raw, kcfg, c.language)) locations.push_back(std::move(*n));
  }

  for (auto& p : persons)
    if (auto it = name_claims.find(p.id); it != name_claims.end())
      kg::apply_name_claims(p, it->second.first, it->second.second, labels);

  std::unordered_set<EntityId> person_ids;
  for (const auto& p : persons) person_ids.insert(p.id);
  std::vector<StreetRecord> ground_truth;
  std::uint64_t other_country = 0;
  std::uint64_t not_person = 0;
  for (const auto& s : named) {
    if (!a.country.empty() && std::find(s.countries.begin(), s.countries.end(), a.country) == s.countries.end()) {
      ++other_country;
      continue;
    }
    const auto target = std::find_if(s.named_after.begin(), s.named_after.end(),
                                     [&](const EntityId& t) { return person_ids.count(t) > 0; });
    if (target == s.named_after.end()) {
      ++not_person;
      continue;
    }
    StreetRecord r;
    r.osm_id = s.id;
    r.name = s.label;
    r.representative_point = s.coordinates.value_or(GeoPoint{});
    r.etymology_person = *target;
    r.wikidata = s.id;
    ground_truth.push_back(std::move(r));
  }

  const fs::path dir = a.out;
  fs::create_directories(dir);
  const fs::path persons_path = dir / "persons.jsonl";
  const fs::path locations_path = dir / "locations.jsonl";
  const fs::path truth_path = dir / "ground_truth.jsonl";
  write_records(persons_path, persons);
  write_records(locations_path, locations);
  write_records(truth_path, ground_truth);

  auto m = manifest("ingest-kg", inputs, c);
  m.parameters["country"] = a.country.empty() ? "any" : a.country;
  m.counts = {{"entities", entities},
              {"lines", stream.lines()},
              {"malformed_lines", stream.skipped()},
              {"non_item_entities", stream.non_items()},
              {"persons", persons.size()},
              {"locations", locations.size()},
              {"name_entities", labels.size()},
              {"ground_truth_streets", ground_truth.size()},
              {"named_streets_other_country", other_country},
              {"named_streets_not_person", not_person},
              {"link_count_rows_skipped", counts.skipped}};
  io::write_manifests(m, {persons_path, locations_path, truth_path});

  log.info(persons.size(), " persons, ", locations.size(), " locations, ", ground_truth.size(),
           " ground-truth streets (", stream.skipped(), " malformed lines skipped)");
  return ok;
}

// ---- ingest-osm ------------------------------------------------------------

struct IngestOsmArgs {
  std::string extract, boundaries = "auto", bundle, out, region_map;
};

int ingest_osm(const RunConfig& c, const IngestOsmArgs& a, const Log& log) {
  require_file("--extract", a.extract);
  require_file("--bundle", a.bundle);
  if (a.out.empty()) throw UsageError("missing --out");
  const fs::path boundaries_path = a.boundaries == "auto" ? fs::path(a.extract) : fs::path(a.boundaries);
  require_file("--boundaries", boundaries_path);
  if (!a.region_map.empty()) require_file("--region-map", a.region_map);

  const IndexBundle bundle = load_bundle(a.bundle);
  osm::StreetStats ss;
  auto streets = osm::extract_streets(a.extract, &ss);
  osm::BoundaryStats bs;
  const auto boundaries = osm::extract_boundaries(boundaries_path, &bs);
  std::optional<osm::RegionMap> region_map;
  if (!a.region_map.empty()) region_map = osm::load_region_map(a.region_map);

  osm::ChainStats cs;
  streets = osm::assign_chains(std::move(streets), boundaries, bundle.dag(), region_map ? &*region_map : nullptr,
                               &cs, c.threads);
  const auto counts = osm::count_streets(streets);
  std::uint64_t dropped = 0;
  const auto etymology = osm::harvest_etymology(streets, bundle, &dropped);

  write_records(a.out, streets);

  std::vector<fs::path> inputs{a.extract, a.bundle};
  if (boundaries_path != fs::path(a.extract)) inputs.push_back(boundaries_path);
  if (!a.region_map.empty()) inputs.push_back(a.region_map);
  auto m = manifest("ingest-osm", inputs, c);
  m.counts = {{"ways_seen", ss.ways_seen},
              {"named_highways", ss.named_highways},
              {"missing_coordinates", ss.missing_coordinates},
              {"boundary_relations", bs.relations},
              {"boundaries_without_rings", bs.without_rings},
              {"open_ring_segments", bs.open_ring_segments},
              {"boundaries", boundaries.size()},
              {"chains_resolved", cs.resolved},
              {"chains_unresolved", cs.unresolved},
              {"chains_via_region_map", cs.via_region_map},
              {"street_ways", counts.ways},
              {"streets_merged", counts.merged},
              {"etymology_pairs", etymology.size()},
              {"etymology_dropped", dropped}};
  io::write_manifests(m, {a.out});

  log.info(counts.ways, " street ways, ", counts.merged, " distinct (name, region) streets, ", cs.resolved,
           " with a region chain, ", cs.unresolved, " unresolved, ", etymology.size(), " etymology links");
  return ok;
}

// ---- build-index -----------------------------------------------------------

struct BuildIndexArgs {
  std::string persons, locations, out;
};

int build_index(const RunConfig& c, const BuildIndexArgs& a, const Log& log) {
  require_file("--persons", a.persons);
  require_file("--locations", a.locations);
  if (a.out.empty()) throw UsageError("missing --out");

  BuildReport report;
  const IndexBundle bundle =
      IndexBundle::build(records::read_persons(a.persons), records::read_locations(a.locations), &report);
  bundle.save(a.out);
  fs::path report_path = a.out;
  report_path += ".report.txt";
  io::write_file_atomic(report_path, report.to_text());

  auto m = manifest("build-index", {a.persons, a.locations}, c);
  m.counts = {{"persons", report.persons},
              {"duplicate_persons", report.duplicate_persons},
              {"locations", report.locations},
              {"terms", report.terms},
              {"dangling_parents", report.dangling_parents},
              {"cycles_broken", report.cycles_broken}};
  io::write_manifests(m, {a.out, report_path});
  if (!log.quiet) log.out << report.to_text();
  return ok;
}

// ---- train -----------------------------------------------------------------

struct TrainArgs {
  std::string ground_truth, bundle, out, features_out;
  std::size_t negatives = 50;
};

int train_cmd(const RunConfig& c, const TrainArgs& a, const Log& log) {
  require_file("--ground-truth", a.ground_truth);
  require_file("--bundle", a.bundle);
  if (a.out.empty()) throw UsageError("missing --out");

  const IndexBundle bundle = load_bundle(a.bundle);
  const AffixSet affixes = load_affixes(c);
  const auto truth = load_streets(a.ground_truth, &bundle);

  std::vector<StreetPersonPair> positives;
  for (const auto& s : truth)
    if (s.etymology_person && bundle.has_person(*s.etymology_person))
      positives.push_back({s.osm_id, *s.etymology_person});
  if (positives.empty()) throw DataError(a.ground_truth + ": no ground-truth street names a person in the bundle");

  VocabularyReport vr;
  const auto vocab = top_occupations(positives, bundle, &vr);
  TrainingSetReport tr;
  const auto pairs = assemble_training_set(truth, bundle, affixes, vocab, a.negatives, &tr, c.retrieval);
  Model model;
  try {
    model = train(pairs, vocab, c.hyperparameters, c.threshold);
  } catch (const PreconditionError& e) {
    throw DataError(a.ground_truth + ": " + e.what());
  }
  model.save(a.out);

  std::vector<fs::path> outputs{a.out};
  if (!a.features_out.empty()) {
    io::AtomicFile f(a.features_out);
    f.stream() << feature_tsv_header() << "\tlabel\n";
    for (const auto& p : pairs) f.stream() << feature_tsv_row(p.street_id, p.person, p.features) << '\t' << p.label << '\n';
    f.commit();
    outputs.push_back(a.features_out);
  }

  auto m = manifest("train", {a.ground_truth, a.bundle}, c);
  add_affix_inputs(m, c);
  add_model_parameters(m, c);
  m.parameters["negatives_per_street"] = std::to_string(a.negatives);
  m.counts = {{"ground_truth_streets", truth.size()},
              {"streets_used", tr.streets_used},
              {"excluded_empty_candidates", tr.excluded_empty_candidates},
              {"excluded_unknown_person", tr.excluded_unknown_person},
              {"excluded_no_label", tr.excluded_no_label},
              {"positives_not_retrieved", tr.positives_not_retrieved},
              {"negatives", tr.negatives},
              {"pairs", pairs.size()},
              {"vocabulary_padded_global", vr.padded_from_global},
              {"vocabulary_padded_placeholders", vr.padded_placeholders}};
  io::write_manifests(m, outputs);

  log.info(tr.streets_used, " streets, ", pairs.size(), " pairs (", tr.negatives, " negatives); excluded: ",
           tr.excluded_empty_candidates, " without candidates, ", tr.excluded_unknown_person, " unknown person; ",
           tr.positives_not_retrieved, " positives not retrieved");
  return ok;
}

// ---- link ------------------------------------------------------------------

struct LinkArgs {
  std::string streets, model, bundle, out, features_out;
};

int link_cmd(const RunConfig& c, const LinkArgs& a, const Log& log) {
  require_file("--streets", a.streets);
  require_file("--model", a.model);
  require_file("--bundle", a.bundle);
  if (a.out.empty()) throw UsageError("missing --out");

  const Model model = load_model(a.model);
  const IndexBundle bundle = load_bundle(a.bundle);
  const AffixSet affixes = load_affixes(c);
  const auto streets = load_streets(a.streets, nullptr);

  std::vector<std::optional<LinkDecision>> decisions(streets.size());
  parallel_for(streets.size(), c.threads,
               [&](std::size_t i) { decisions[i] = link_street(streets[i], model, bundle, affixes, c.retrieval); });

  io::AtomicFile f(a.out);
  f.stream() << "osm_id\tstreet_name\tperson_id\tperson_label\tprobability\n";
  std::uint64_t linked = 0;
  for (std::size_t i = 0; i < streets.size(); ++i) {
    if (!decisions[i]) continue;
    ++linked;
    const PersonRecord* p = bundle.person(decisions[i]->person);
    f.stream() << tsv_field(streets[i].osm_id) << '\t' << tsv_field(streets[i].name) << '\t' << decisions[i]->person
               << '\t' << tsv_field(p ? p->full_name : std::string()) << '\t' << fixed(decisions[i]->probability)
               << '\n';
  }
  f.commit();

  std::vector<fs::path> outputs{a.out};
  if (!a.features_out.empty()) {
    std::vector<std::string> blocks(streets.size());
    parallel_for(streets.size(), c.threads, [&](std::size_t i) {
      const auto cs = retrieve(streets[i], bundle, affixes, c.retrieval);
      for (const auto& person : cs.candidates)
        blocks[i] += feature_tsv_row(streets[i].osm_id, person,
                                     extract_features(streets[i], person, bundle, model.vocab, affixes)) +
                     '\n';
    });
    io::AtomicFile ff(a.features_out);
    ff.stream() << feature_tsv_header() << '\n';
    for (const auto& b : blocks) ff.stream() << b;
    ff.commit();
    outputs.push_back(a.features_out);
  }

  auto m = manifest("link", {a.streets, a.model, a.bundle}, c);
  add_affix_inputs(m, c);
  m.parameters["threshold"] = fixed(model.threshold);
  m.counts = {{"streets", streets.size()}, {"linked", linked}};
  io::write_manifests(m, outputs);

  log.info(linked, " of ", streets.size(), " streets linked");
  return ok;
}

// ---- evaluate --------------------------------------------------------------

struct EvaluateArgs {
  std::string ground_truth, bundle, baseline, report, model;
  int folds = 10;
  std::size_t negatives = 50;
};

struct TsvRow {
  std::string method, scope, aggregate, fold;
  eval::Metrics m;
};

fs::path tsv_twin(const fs::path& report) {
  fs::path t = report;
  t.replace_extension(".tsv");
  if (t == report) t += ".tsv";
  return t;
}

int evaluate_cmd(const RunConfig& c, const EvaluateArgs& a, const Log& log) {
  require_file("--ground-truth", a.ground_truth);
  require_file("--bundle", a.bundle);
  if (a.report.empty()) throw UsageError("missing --report");
  if (!a.baseline.empty() && a.baseline != "poprank") throw UsageError("unknown baseline: " + a.baseline);
  if (!a.model.empty()) require_file("--model", a.model);
  const bool with_baseline = !a.baseline.empty();

  const IndexBundle bundle = load_bundle(a.bundle);
  const AffixSet affixes = load_affixes(c);
  auto truth = load_streets(a.ground_truth, &bundle);
  std::vector<StreetRecord> labelled;
  std::vector<StreetRecord> known;
  for (auto& s : truth) {
    if (!s.etymology_person) continue;
    if (bundle.has_person(*s.etymology_person)) known.push_back(s);
    labelled.push_back(std::move(s));
  }
  if (labelled.empty()) throw DataError(a.ground_truth + ": no labelled ground-truth streets");

  std::vector<std::pair<std::string, eval::Metrics>> table;
  std::vector<TsvRow> tsv;
  std::ostringstream text;
  text << "street-to-person evaluation\n";
  text << "ground-truth streets: " << labelled.size() << " (person in store: " << known.size() << ")\n";
  text << "abstentions count against recall only; wrong links count against precision and recall\n";

  io::Manifest m;
  if (!a.model.empty()) {
    const Model model = load_model(a.model);
    text << "mode: held-out model " << fs::path(a.model).filename().string() << "\n\n";
    auto score = [&](const std::string& method, auto&& decide) {
      std::vector<std::optional<LinkDecision>> d(labelled.size());
      parallel_for(labelled.size(), c.threads, [&](std::size_t i) { d[i] = decide(labelled[i]); });
      eval::Predictions all_p, known_p;
      eval::Gold all_g, known_g;
      for (std::size_t i = 0; i < labelled.size(); ++i) {
        const auto& s = labelled[i];
        const std::optional<EntityId> pred = d[i] ? std::optional<EntityId>(d[i]->person) : std::nullopt;
        all_p[s.osm_id] = pred;
        all_g[s.osm_id] = *s.etymology_person;
        if (bundle.has_person(*s.etymology_person)) {
          known_p[s.osm_id] = pred;
          known_g[s.osm_id] = *s.etymology_person;
        }
      }
      const auto all_m = eval::score_predictions(all_p, all_g);
      table.emplace_back(method + " / all etymology streets", all_m);
      tsv.push_back({method, "all", "micro", "", all_m});
      if (!known_g.empty()) {
        const auto known_m = eval::score_predictions(known_p, known_g);
        table.emplace_back(method + " / person in store", known_m);
        tsv.push_back({method, "person_in_store", "micro", "", known_m});
      }
    };
    score("classifier", [&](const StreetRecord& s) { return link_street(s, model, bundle, affixes, c.retrieval); });
    if (with_baseline)
      score("poprank", [&](const StreetRecord& s) { return eval::pop_rank(s, bundle, affixes, c.retrieval); });
    text << eval::format_metrics_table(table);
    m = manifest("evaluate", {a.ground_truth, a.bundle, a.model}, c);
  } else {
    text << "mode: " << a.folds << "-fold cross-validation, seed " << c.seed << "\n\n";
    eval::CvOptions opt;
    opt.folds = a.folds;
    opt.seed = c.seed;
    opt.hyperparameters = c.hyperparameters;
    opt.threshold = c.threshold;
    opt.negatives_per_street = a.negatives;
    opt.retrieval = c.retrieval;
    opt.threads = c.threads;
    std::vector<std::pair<std::string, eval::EvalReport>> reports;
    auto run_cv = [&](const std::string& method, eval::Method kind) {
      opt.method = kind;
      const auto r = eval::kfold_cv(known, bundle, affixes, opt);
      table.emplace_back(method, r.report.micro);
      table.emplace_back(method + " (macro)", r.report.macro);
      tsv.push_back({method, "person_in_store", "micro", "", r.report.micro});
      tsv.push_back({method, "person_in_store", "macro", "", r.report.macro});
      for (std::size_t f = 0; f < r.report.folds.size(); ++f)
        tsv.push_back({method, "person_in_store", "fold", std::to_string(f), r.report.folds[f]});
      reports.emplace_back(method, r.report);
    };
    run_cv("classifier", eval::Method::classifier);
    if (with_baseline) run_cv("poprank", eval::Method::pop_rank);
    text << eval::format_metrics_table(table);
    for (const auto& [method, r] : reports) {
      std::vector<std::pair<std::string, eval::Metrics>> folds;
      for (std::size_t f = 0; f < r.folds.size(); ++f) folds.emplace_back("fold " + std::to_string(f), r.folds[f]);
      text << "\nper fold (" << method << ")\n" << eval::format_metrics_table(folds);
    }
    m = manifest("evaluate", {a.ground_truth, a.bundle}, c);
    m.parameters["folds"] = std::to_string(a.folds);
    m.parameters["negatives_per_street"] = std::to_string(a.negatives);
  }

  const fs::path twin = tsv_twin(a.report);
  io::write_file_atomic(a.report, text.str());
  std::ostringstream t;
  t << "method\tscope\taggregate\tfold\tprecision\trecall\tf1\tgold\tpredicted\tcorrect\n";
  for (const auto& r : tsv)
    t << r.method << '\t' << r.scope << '\t' << r.aggregate << '\t' << r.fold << '\t' << fixed(r.m.precision) << '\t'
      << fixed(r.m.recall) << '\t' << fixed(r.m.f1) << '\t' << r.m.gold << '\t' << r.m.predicted << '\t'
      << r.m.correct << '\n';
  io::write_file_atomic(twin, t.str());

  add_affix_inputs(m, c);
  add_model_parameters(m, c);
  m.parameters["baseline"] = with_baseline ? a.baseline : "none";
  m.counts = {{"ground_truth_streets", labelled.size()}, {"person_in_store", known.size()}};
  io::write_manifests(m, {a.report, twin});
  if (!log.quiet) log.out << text.str();
  return ok;
}

// ---- stats -----------------------------------------------------------------

struct StatsArgs {
  std::string streets, bundle, links, out;
};

std::set<std::string> read_linked_ids(const fs::path& links) {
  std::set<std::string> ids;
  io::LineReader reader(links);
  std::string line;
  bool header = true;
  while (reader.next(line)) {
    if (header) {
      header = false;
      if (line.rfind("osm_id\t", 0) != 0) throw DataError(links.string() + ": not a links table");
      continue;
    }
    if (line.empty()) continue;
    ids.insert(line.substr(0, line.find('\t')));
  }
  return ids;
}

int stats_cmd(const RunConfig& c, const StatsArgs& a, const Log& log) {
  require_file("--streets", a.streets);
  require_file("--bundle", a.bundle);
  require_file("--links", a.links);
  if (a.out.empty()) throw UsageError("missing --out");

  const IndexBundle bundle = load_bundle(a.bundle);
  const AffixSet affixes = load_affixes(c);
  const auto streets = load_streets(a.streets, &bundle);
  const auto linked = read_linked_ids(a.links);

  std::vector<eval::StreetSummary> summaries(streets.size());
  parallel_for(streets.size(), c.threads, [&](std::size_t i) {
    summaries[i].chain = streets[i].chain;
    summaries[i].candidates = retrieve(streets[i], bundle, affixes, c.retrieval).candidates.size();
    summaries[i].linked = linked.count(streets[i].osm_id) > 0;
  });

  std::vector<EntityId> regions = c.regions;
  if (regions.empty()) {
    std::set<EntityId> roots;
    for (const auto& s : summaries)
      if (s.chain.size() > 1) roots.insert(s.chain.back());
    regions.assign(roots.begin(), roots.end());
  }
  const auto rows = eval::region_stats(summaries, regions);

  std::ostringstream t;
  t << "region\tlabel\tstreets\tstreets_with_candidates\tcandidate_persons\tstreet_person_relations\n";
  for (const auto& r : rows) {
    const LocationNode* n = bundle.dag().find(r.region);
    t << r.region << '\t' << tsv_field(n ? n->label : std::string()) << '\t' << r.streets << '\t'
      << r.with_candidates << '\t' << r.candidate_persons << '\t' << r.relations << '\n';
  }
  io::write_file_atomic(a.out, t.str());

  const auto counts = osm::count_streets(streets);
  auto m = manifest("stats", {a.streets, a.bundle, a.links}, c);
  add_affix_inputs(m, c);
  m.counts = {{"street_ways", counts.ways}, {"streets_merged", counts.merged}, {"regions", rows.size()}};
  io::write_manifests(m, {a.out});

  if (!log.quiet) log.out << t.str();
  log.info(counts.ways, " street ways, ", counts.merged, " distinct (name, region) streets");
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"stp: link named streets to the persons they were named after", "stp"};
  app.set_version_flag("--version", STP_VERSION);
  app.require_subcommand(1);
  app.footer(
      "Settings resolve as: command-line flag, then the STP_DATA_DIR environment variable (data directory "
      "only), then the --config JSON file, then built-in defaults.");

  Flags flags;
  app.add_option("--config", flags.config, "JSON config file (data_dir, affix_dir, language, seed, ...)");
  flags.data_dir_opts.push_back(app.add_option("--data-dir", flags.data_dir, "Data directory (affixes, kg_config.json)"));
  flags.affix_dir_opts.push_back(app.add_option("--affix-dir", flags.affix_dir, "Directory with prefixes.txt and suffixes.txt"));
  flags.threads_opts.push_back(app.add_option("--threads", flags.threads, "Worker threads")->check(CLI::PositiveNumber));
  app.add_flag("--quiet", flags.quiet, "Suppress progress output");

  auto retrieval_flags = [&](CLI::App* sub) {
    sub->add_flag("--union-terms", flags.union_terms, "Union lookups over all truncation candidates");
    flags.cap_opts.push_back(sub->add_option("--cap", flags.cap, "Keep at most N candidates per street"));
  };
  auto model_flags = [&](CLI::App* sub) {
    flags.seed_opts.push_back(sub->add_option("--seed", flags.seed, "Random seed"));
    flags.threshold_opts.push_back(sub->add_option("--threshold", flags.threshold, "Decision threshold"));
    flags.lr_opts.push_back(sub->add_option("--learning-rate", flags.learning_rate, "Gradient descent step size"));
    flags.l2_opts.push_back(sub->add_option("--l2", flags.l2, "L2 regularization strength"));
    flags.epochs_opts.push_back(sub->add_option("--epochs", flags.epochs, "Gradient descent epochs"));
  };

  IngestKgArgs kg_args;
  auto* kg_cmd = app.add_subcommand("ingest-kg", "Stream a Wikidata dump into person, location and ground-truth records");
  kg_cmd->add_option("--dump", kg_args.dump, "Wikidata JSON dump (.json or .json.gz)")->required();
  kg_cmd->add_option("--link-counts", kg_args.link_counts, "TSV of entity id and link count")->required();
  kg_cmd->add_option("--out", kg_args.out, "Output directory")->required();
  flags.language_opts.push_back(kg_cmd->add_option("--language", flags.language, "Label language"));
  kg_cmd->add_option("--kg-config", kg_args.kg_config, "Property/class mapping (default: <data-dir>/kg_config.json)");
  kg_cmd->add_option("--country", kg_args.country, "Keep ground-truth streets in this country (e.g. Q183)");

  IngestOsmArgs osm_args;
  auto* osm_cmd = app.add_subcommand("ingest-osm", "Extract named streets and assign region chains");
  osm_cmd->add_option("--extract", osm_args.extract, "OSM XML extract (.osm or .osm.gz)")->required();
  osm_cmd->add_option("--boundaries", osm_args.boundaries, "Boundary extract, or 'auto' to reuse --extract");
  osm_cmd->add_option("--bundle", osm_args.bundle, "Index bundle")->required();
  osm_cmd->add_option("--out", osm_args.out, "Output streets.jsonl")->required();
  osm_cmd->add_option("--region-map", osm_args.region_map, "TSV of region name and entity id");

  BuildIndexArgs bi_args;
  auto* bi_cmd = app.add_subcommand("build-index", "Build the person and location index bundle");
  bi_cmd->add_option("--persons", bi_args.persons, "persons.jsonl")->required();
  bi_cmd->add_option("--locations", bi_args.locations, "locations.jsonl")->required();
  bi_cmd->add_option("--out", bi_args.out, "Output bundle")->required();

  TrainArgs tr_args;
  auto* tr_cmd = app.add_subcommand("train", "Train the street-to-person classifier");
  tr_cmd->add_option("--ground-truth", tr_args.ground_truth, "Ground-truth streets (jsonl)")->required();
  tr_cmd->add_option("--bundle", tr_args.bundle, "Index bundle")->required();
  tr_cmd->add_option("--out", tr_args.out, "Output model")->required();
  tr_cmd->add_option("--negatives", tr_args.negatives, "Negatives per street")->check(CLI::PositiveNumber);
  tr_cmd->add_option("--features-out", tr_args.features_out, "Write the training pairs as TSV");
  model_flags(tr_cmd);
  retrieval_flags(tr_cmd);

  LinkArgs ln_args;
  auto* ln_cmd = app.add_subcommand("link", "Link streets to persons with a trained model");
  ln_cmd->add_option("--streets", ln_args.streets, "Streets (jsonl)")->required();
  ln_cmd->add_option("--model", ln_args.model, "Trained model")->required();
  ln_cmd->add_option("--bundle", ln_args.bundle, "Index bundle")->required();
  ln_cmd->add_option("--out", ln_args.out, "Output links.tsv")->required();
  ln_cmd->add_option("--features-out", ln_args.features_out, "Write candidate features as TSV");
  retrieval_flags(ln_cmd);

  EvaluateArgs ev_args;
  auto* ev_cmd = app.add_subcommand("evaluate", "Cross-validate the classifier or score a trained model");
  ev_cmd->add_option("--ground-truth", ev_args.ground_truth, "Ground-truth streets (jsonl)")->required();
  ev_cmd->add_option("--bundle", ev_args.bundle, "Index bundle")->required();
  ev_cmd->add_option("--baseline", ev_args.baseline, "Also evaluate a baseline")->check(CLI::IsMember({"poprank"}));
  ev_cmd->add_option("--folds", ev_args.folds, "Cross-validation folds")->check(CLI::Range(2, 1000));
  ev_cmd->add_option("--report", ev_args.report, "Plain-text report; a .tsv twin is written alongside")->required();
  ev_cmd->add_option("--model", ev_args.model, "Score this model on the ground truth instead of cross-validating");
  ev_cmd->add_option("--negatives", ev_args.negatives, "Negatives per street")->check(CLI::PositiveNumber);
  model_flags(ev_cmd);
  retrieval_flags(ev_cmd);

  StatsArgs st_args;
  auto* st_cmd = app.add_subcommand("stats", "Per-region street and link counts");
  st_cmd->add_option("--streets", st_args.streets, "Streets (jsonl)")->required();
  st_cmd->add_option("--bundle", st_args.bundle, "Index bundle")->required();
  st_cmd->add_option("--links", st_args.links, "links.tsv from the link command")->required();
  st_cmd->add_option("--out", st_args.out, "Output TSV")->required();
  flags.regions_opts.push_back(
      st_cmd->add_option("--regions", flags.regions, "Region ids (default: chain roots)")->delimiter(','));
  retrieval_flags(st_cmd);

  std::string stage = "cli";
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
    const CLI::App* sub = app.get_subcommands().front();
    stage = sub->get_name();
    const RunConfig config = resolve_config(flags);
    const Log log{out, stage, config.quiet};
    if (sub == kg_cmd) return ingest_kg(config, kg_args, log);
    if (sub == osm_cmd) return ingest_osm(config, osm_args, log);
    if (sub == bi_cmd) return build_index(config, bi_args, log);
    if (sub == tr_cmd) return train_cmd(config, tr_args, log);
    if (sub == ln_cmd) return link_cmd(config, ln_args, log);
    if (sub == ev_cmd) return evaluate_cmd(config, ev_args, log);
    return stats_cmd(config, st_args, log);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return usage;
  } catch (const UsageError& e) {
    err << "stp " << stage << ": usage error: " << e.what() << "\n";
    return usage;
  } catch (const DataError& e) {
    err << "stp " << stage << ": data error: " << e.what() << "\n";
    return data;
  } catch (const PreconditionError& e) {
    err << "stp " << stage << ": data error: " << e.what() << "\n";
    return data;
  } catch (const std::exception& e) {
    err << "stp " << stage << ": internal error: " << e.what() << "\n";
    return internal;
  }
}

}  // namespace stp::cli
