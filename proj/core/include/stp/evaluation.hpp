#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stp/candidate_retrieval.hpp"
#include "stp/index_store.hpp"
#include "stp/linker_model.hpp"
#include "stp/name_truncation.hpp"

namespace stp::eval {

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::size_t gold = 0;
  std::size_t predicted = 0;
  std::size_t correct = 0;
};

// precision = correct / predicted (0 when nothing predicted),
// recall = correct / gold, f1 = harmonic mean (0 when P + R = 0).
Metrics metrics_from_counts(std::size_t gold, std::size_t predicted, std::size_t correct);

using Predictions = std::map<std::string, std::optional<EntityId>>;
using Gold = std::map<std::string, EntityId>;

// A wrong prediction costs precision and recall, an abstention only recall.
Metrics score_predictions(const Predictions& predictions, const Gold& gold);

struct EvalReport {
  Metrics micro;  // pooled counts over folds
  Metrics macro;  // mean of per-fold P/R/F1; counts are totals
  std::vector<Metrics> folds;
};

// Seeded fold assignment over n streets: shuffled positions, position i goes
// to fold i mod k. Every index lands in exactly one fold.
std::vector<int> assign_folds(std::size_t n, int k, std::uint64_t seed);

enum class Method { classifier, pop_rank };

struct CvOptions {
  int folds = 10;
  std::uint64_t seed = 42;
  Method method = Method::classifier;
  Hyperparameters hyperparameters;
  double threshold = 0.5;
  std::size_t negatives_per_street = 50;
  RetrievalOptions retrieval;
  unsigned threads = 1;
};

struct CvResult {
  EvalReport report;
  Predictions predictions;
  std::vector<int> fold_of;  // aligned with the ground-truth span
};

// Folds partition streets, so all pairs of a street share its fold. Each fold
// fits the occupation vocabulary and the model on the other folds only.
CvResult kfold_cv(std::span<const StreetRecord> ground_truth, const IndexBundle& bundle,
                  const AffixSet& affixes, const CvOptions& options = {});

// Highest link count among the street's candidates, ties by smaller id. The
// probability field carries the candidate's smoothed link-count share.
std::optional<LinkDecision> pop_rank(const StreetRecord& street, const IndexBundle& bundle,
                                     const AffixSet& affixes, const RetrievalOptions& retrieval = {});

struct StreetSummary {
  std::vector<EntityId> chain;
  std::size_t candidates = 0;
  bool linked = false;
};

struct RegionRow {
  EntityId region;
  std::size_t streets = 0;
  std::size_t with_candidates = 0;
  std::size_t candidate_persons = 0;
  std::size_t relations = 0;
};

// One row per region id; a street counts for every region on its chain.
std::vector<RegionRow> region_stats(std::span<const StreetSummary> streets,
                                    std::span<const EntityId> regions);

std::string format_metrics_table(const std::vector<std::pair<std::string, Metrics>>& rows);

}  // namespace stp::eval
