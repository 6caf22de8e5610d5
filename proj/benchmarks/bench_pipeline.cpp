#include <random>

#include <benchmark/benchmark.h>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "stp/candidate_retrieval.hpp"
#include "stp/features.hpp"
#include "stp/linker_model.hpp"
#include "stp/name_truncation.hpp"
#include "synthetic.hpp"

namespace {

using namespace stp;
using namespace stp::testing;

struct Shared {
  World world = synthetic_world();
  IndexBundle bundle = build_bundle(world);
  AffixSet affixes = shipped_affixes();
};

const Shared& shared() {
  static const Shared s;
  return s;
}

void BM_Truncate(benchmark::State& state) {
  const auto& affixes = shared().affixes;
  const auto& table = truncation_table();
  std::size_t i = 0;
  for (auto _ : state) benchmark::DoNotOptimize(truncate(table[i++ % table.size()].first, affixes));
}
BENCHMARK(BM_Truncate);

void BM_Retrieve(benchmark::State& state) {
  const auto& s = shared();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& street = s.world.training[i++ % s.world.training.size()];
    benchmark::DoNotOptimize(retrieve(street, s.bundle, s.affixes));
  }
}
BENCHMARK(BM_Retrieve);

void BM_ContainmentScore(benchmark::State& state) {
  const auto& s = shared();
  const auto& street = s.world.training.front();
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& loc = s.world.locations[i++ % s.world.locations.size()].id;
    benchmark::DoNotOptimize(containment_score(street.chain, loc, s.bundle.dag()));
  }
}
BENCHMARK(BM_ContainmentScore);

void BM_PointInPolygon(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::vector<PolygonCase> cases;
  for (int i = 0; i < 256; ++i) cases.push_back(random_polygon_case(rng));
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& c = cases[i++ % cases.size()];
    benchmark::DoNotOptimize(geo::point_in_polygon(c.point, c.polygon));
  }
}
BENCHMARK(BM_PointInPolygon);

void BM_ExtractFeatures(benchmark::State& state) {
  const auto& s = shared();
  const OccupationVocabulary vocab;
  const auto& street = s.world.training.front();
  const auto cs = retrieve(street, s.bundle, s.affixes);
  std::size_t i = 0;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        extract_features(street, cs.candidates[i++ % cs.candidates.size()], s.bundle, vocab, s.affixes));
}
BENCHMARK(BM_ExtractFeatures);

void BM_TrainEpochs(benchmark::State& state) {
  const auto& s = shared();
  std::vector<StreetPersonPair> positives;
  for (const auto& street : s.world.training) positives.push_back({street.osm_id, *street.etymology_person});
  const auto vocab = top_occupations(positives, s.bundle);
  const auto pairs = assemble_training_set(s.world.training, s.bundle, s.affixes, vocab);
  Hyperparameters h;
  h.epochs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(train(pairs, vocab, h));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(pairs.size()) * h.epochs);
}
BENCHMARK(BM_TrainEpochs)->Arg(50)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
