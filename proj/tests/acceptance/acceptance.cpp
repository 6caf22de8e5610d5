// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "cli.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "stp/candidate_retrieval.hpp"
#include "stp/evaluation.hpp"
#include "stp/features.hpp"
#include "stp/linker_model.hpp"
#include "stp/name_truncation.hpp"
#include "synthetic.hpp"

namespace {

using namespace stp;
using namespace stp::testing;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

unsigned worker_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

std::string fmt(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Outcome worked_example() {
  const World w = sample_world();
  const IndexBundle bundle = build_bundle(w);
  const AffixSet affixes = shipped_affixes();
  const StreetRecord street = wilhelmstrasse();

  const auto heads = truncate(street.name, affixes);
  if (heads.empty() || heads.front() != "Wilhelm") return {false, "truncation head is not 'Wilhelm'"};

  const auto cs = retrieve(street, bundle, affixes);
  std::vector<EntityId> expected{kPaulWilhelm, kWilhelmBusch, kFriedrichWilhelm};
  std::sort(expected.begin(), expected.end());
  if (cs.candidates != expected) return {false, std::to_string(cs.candidates.size()) + " candidates retrieved"};

  const double born =
      spatial_features(street.chain, *bundle.person(kFriedrichWilhelm), bundle.dag())[index_of(RelationKind::born)];
  if (born != 0.5) return {false, "spatial_born = " + fmt(born, 17)};

  std::vector<StreetPersonPair> positives;
  for (const auto& s : w.training) positives.push_back({s.osm_id, *s.etymology_person});
  const auto vocab = top_occupations(positives, bundle);
  const auto pairs = assemble_training_set(w.training, bundle, affixes, vocab);
  const Model model = train(pairs, vocab);
  const auto decision = link_street(street, model, bundle, affixes);
  if (!decision) return {false, "no candidate cleared the threshold"};
  if (decision->person != kFriedrichWilhelm) return {false, "selected " + decision->person};
  return {true, "head 'Wilhelm', 3 candidates, spatial_born 0.5, selected Friedrich Wilhelm I. (p=" +
                    fmt(decision->probability) + ")"};
}

Outcome containment_oracle() {
  std::mt19937_64 rng(20240601);
  for (int i = 0; i < 1000; ++i) {
    const DagCase c = random_dag_case(rng, 50);
    const SpatialDag dag = SpatialDag::build(c.nodes);
    const double got = containment_score(c.street_chain, c.location, dag);
    const double want = oracle_containment(c);
    if (got != want) return {false, "case " + std::to_string(i) + ": " + fmt(got, 17) + " vs " + fmt(want, 17)};
  }
  return {true, "1000 random DAG/chain instances equal"};
}

Outcome synthetic_separation() {
  const World w = synthetic_world();
  const IndexBundle bundle = build_bundle(w);
  const AffixSet affixes = shipped_affixes();
  if (w.training.size() != 300 || bundle.persons().size() != 1000)
    return {false, "fixture has " + std::to_string(w.training.size()) + " streets / " +
                       std::to_string(bundle.persons().size()) + " persons"};

  eval::CvOptions opt;
  opt.folds = 10;
  opt.seed = 42;
  opt.threads = worker_threads();
  opt.method = eval::Method::classifier;
  const auto cls = eval::kfold_cv(w.training, bundle, affixes, opt).report.micro;
  opt.method = eval::Method::pop_rank;
  const auto pop = eval::kfold_cv(w.training, bundle, affixes, opt).report.micro;

  const std::string detail = "classifier P=" + fmt(cls.precision) + " R=" + fmt(cls.recall) + " F1=" + fmt(cls.f1) +
                             "; PopRank F1=" + fmt(pop.f1) + "; gap " + fmt(cls.f1 - pop.f1);
  return {cls.precision >= 0.90 && cls.f1 - pop.f1 >= 0.15, detail};
}

Outcome gradient_check() {
  std::mt19937_64 rng(99);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53); };
  std::vector<logistic::Row> x(10);
  std::vector<int> y(10);
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (auto& v : x[i]) v = uniform(-2.0, 2.0);
    y[i] = static_cast<int>(i % 2);
  }
  double worst = 0.0;
  for (double scale : {0.01, 0.5}) {
    logistic::Params params{};
    for (auto& p : params) p = uniform(-scale, scale);
    const auto analytic = logistic::gradient(params, x, y, 1e-4);
    const auto numeric = central_difference_gradient(params, x, y, 1e-4);
    worst = std::max(worst, relative_error(analytic, numeric));
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "max relative error %.3e", worst);
  return {worst <= 1e-6, buf};
}

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  if (code != 0) std::cerr << err.str();
  return code;
}

Outcome pipeline_determinism() {
  const World w = sample_world();
  std::vector<std::string> models, links;
  for (int run = 0; run < 2; ++run) {
    const fs::path dir = scratch_dir("determinism-" + std::to_string(run));
    write_file(dir / "dump.json", wikidata_dump(w));
    write_file(dir / "links.counts.tsv", link_count_tsv(w));
    write_file(dir / "extract.osm", sample_osm_extract());
    const std::string d = dir.string();
    const std::vector<std::vector<std::string>> steps = {
        {"--quiet", "ingest-kg", "--dump", d + "/dump.json", "--link-counts", d + "/links.counts.tsv", "--out",
         d + "/kg", "--language", "de"},
        {"--quiet", "build-index", "--persons", d + "/kg/persons.jsonl", "--locations", d + "/kg/locations.jsonl",
         "--out", d + "/bundle.stp"},
        {"--quiet", "ingest-osm", "--extract", d + "/extract.osm", "--bundle", d + "/bundle.stp", "--out",
         d + "/streets.jsonl"},
        {"--quiet", "train", "--ground-truth", d + "/kg/ground_truth.jsonl", "--bundle", d + "/bundle.stp", "--out",
         d + "/model.stp"},
        {"--quiet", "--threads", run == 0 ? "1" : "4", "link", "--streets", d + "/streets.jsonl", "--model",
         d + "/model.stp", "--bundle", d + "/bundle.stp", "--out", d + "/links.tsv"},
    };
    for (const auto& step : steps)
      if (const int code = cli(step); code != 0)
        return {false, "run " + std::to_string(run) + " step " + step[1] + " exited " + std::to_string(code)};
    models.push_back(read_file(dir / "model.stp"));
    links.push_back(read_file(dir / "links.tsv"));
    fs::remove_all(dir);
  }
  if (models[0] != models[1]) return {false, "model files differ"};
  if (links[0] != links[1]) return {false, "links.tsv differ"};
  if (links[0].find(kFriedrichWilhelm) == std::string::npos) return {false, "links.tsv lacks the worked example"};
  return {true, "model (" + std::to_string(models[0].size()) + " bytes) and links.tsv (" +
                    std::to_string(links[0].size()) + " bytes) byte-identical"};
}

Outcome metric_arithmetic() {
  eval::Gold gold;
  eval::Predictions pred;
  for (int i = 0; i < 10; ++i) {
    const std::string s = "s" + std::to_string(i);
    gold[s] = "p" + std::to_string(i);
    pred[s] = i < 8 ? std::optional<EntityId>("p" + std::to_string(i)) : std::nullopt;
  }
  const auto m = eval::score_predictions(pred, gold);
  const bool ok = std::abs(m.precision - 1.0) <= 1e-12 && std::abs(m.recall - 0.8) <= 1e-12 &&
                  std::abs(m.f1 - 8.0 / 9.0) <= 1e-12;
  return {ok, "P=" + fmt(m.precision, 12) + " R=" + fmt(m.recall, 12) + " F1=" + fmt(m.f1, 12)};
}

Outcome truncation_suite() {
  const AffixSet affixes = shipped_affixes();
  const auto& table = truncation_table();
  if (table.size() != 50) return {false, "table has " + std::to_string(table.size()) + " entries"};
  if (affixes.suffixes().size() != 80 || affixes.prefixes().size() != 34)
    return {false, "affix lists hold " + std::to_string(affixes.suffixes().size()) + " suffixes / " +
                       std::to_string(affixes.prefixes().size()) + " prefixes"};
  for (const auto& [name, head] : table) {
    const auto candidates = truncate(name, affixes);
    const std::string got = candidates.empty() ? "" : candidates.front();
    if (got != head) return {false, "'" + name + "' -> '" + got + "', expected '" + head + "'"};
  }
  return {true, "50/50 heads match with 80 suffixes / 34 prefixes"};
}

Outcome point_in_polygon_oracle() {
  std::mt19937_64 rng(8);
  int inside = 0;
  for (int i = 0; i < 1000; ++i) {
    const PolygonCase c = random_polygon_case(rng);
    const bool got = geo::point_in_polygon(c.point, c.polygon);
    if (got != winding_contains(c.point, c.polygon)) return {false, "case " + std::to_string(i) + " disagrees"};
    inside += got;
  }
  return {true, "1000 cases agree (" + std::to_string(inside) + " inside)"};
}

Outcome index_round_trip() {
  const World w = synthetic_world();
  const IndexBundle built = build_bundle(w);
  const fs::path dir = scratch_dir("roundtrip");
  built.save(dir / "bundle.stp");
  const IndexBundle loaded = IndexBundle::load(dir / "bundle.stp");
  fs::remove_all(dir);

  std::vector<std::string> terms;
  for (const auto& [term, ids] : built.name_index().entries()) terms.push_back(term);
  std::sort(terms.begin(), terms.end());
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 100; ++i) {
    const std::string term = i % 10 == 9 ? "kein name " + std::to_string(i) : terms[rng() % terms.size()];
    if (built.lookup(term) != loaded.lookup(term)) return {false, "lookup differs for '" + term + "'"};
  }
  std::vector<EntityId> ids;
  for (const auto& [id, node] : built.dag().nodes()) ids.push_back(id);
  for (int i = 0; i < 100; ++i) {
    const EntityId id = i % 10 == 9 ? "Q0" : ids[rng() % ids.size()];
    if (built.dag().chain_of(id) != loaded.dag().chain_of(id)) return {false, "chain differs for " + id};
  }
  return {true, "100 lookups and 100 chain queries identical"};
}

struct Criterion {
  int number;
  std::string title;
  std::function<Outcome()> check;
  double limit_seconds;  // 0 = no limit
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "worked example", worked_example, 5},
      {2, "containment-score oracle", containment_oracle, 10},
      {3, "synthetic benchmark separation", synthetic_separation, 120},
      {4, "gradient check", gradient_check, 0},
      {5, "determinism", pipeline_determinism, 0},
      {6, "metric arithmetic", metric_arithmetic, 0},
      {7, "truncation suite", truncation_suite, 0},
      {8, "point-in-polygon oracle", point_in_polygon_oracle, 0},
      {9, "index round-trip", index_round_trip, 0},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = Clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(Clock::now() - start).count();
    if (c.limit_seconds > 0 && seconds >= c.limit_seconds) {
      o.pass = false;
      o.detail += "; over the " + fmt(c.limit_seconds, 0) + " s budget";
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.number << "  " << c.title << ": " << o.detail
              << " [" << fmt(seconds, 2) << " s]" << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failed)) << "/" << criteria.size() << " criteria passed"
            << std::endl;
  return failed == 0 ? 0 : 1;
}
