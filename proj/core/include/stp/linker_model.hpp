#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stp/candidate_retrieval.hpp"
#include "stp/features.hpp"
#include "stp/index_store.hpp"
#include "stp/name_truncation.hpp"

namespace stp {

struct LabeledPair {
  std::string street_id;
  EntityId person;
  FeatureVector features;
  int label = 0;
};

struct TrainingSetReport {
  std::size_t streets_used = 0;
  std::size_t excluded_empty_candidates = 0;
  std::size_t excluded_unknown_person = 0;
  std::size_t excluded_no_label = 0;
  std::size_t positives_not_retrieved = 0;
  std::size_t negatives = 0;
};

// One label-1 pair per ground-truth street plus up to `negatives_per_street`
// label-0 pairs from its other candidates, highest link count first.
// Streets come with etymology_person set and a chain.
std::vector<LabeledPair> assemble_training_set(std::span<const StreetRecord> ground_truth,
                                               const IndexBundle& bundle, const AffixSet& affixes,
                                               const OccupationVocabulary& vocab,
                                               std::size_t negatives_per_street = 50,
                                               TrainingSetReport* report = nullptr,
                                               const RetrievalOptions& retrieval = {});

struct Hyperparameters {
  double learning_rate = 0.1;
  double l2 = 1e-4;
  int epochs = 500;
  std::uint64_t seed = 42;
};

// L2-regularized logistic regression on standardized features.
namespace logistic {

inline constexpr std::size_t kParamCount = kFeatureCount + 1;  // weights..., bias
using Params = std::array<double, kParamCount>;
using Row = std::array<double, kFeatureCount>;

double sigmoid(double z);

// mean log-loss + l2/2 * |w|^2 (bias unregularized).
double objective(const Params& params, std::span<const Row> x, std::span<const int> y, double l2);
Params gradient(const Params& params, std::span<const Row> x, std::span<const int> y, double l2);

}  // namespace logistic

class Model {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  std::array<double, kFeatureCount> weights{};
  double bias = 0.0;
  std::array<double, kFeatureCount> feature_means{};
  std::array<double, kFeatureCount> feature_stds{};
  OccupationVocabulary vocab;
  double threshold = 0.5;
  Hyperparameters hyperparameters;

  Model();

  logistic::Row standardize(const FeatureVector& f) const;
  double decision(const FeatureVector& f) const;
  // Strictly inside (0, 1).
  double probability(const FeatureVector& f) const;

  std::string serialize() const;
  static Model deserialize(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static Model load(const std::filesystem::path& path);
};

struct TrainingTrace {
  std::vector<double> loss_per_epoch;
};

// Full-batch gradient descent; weights start as small seeded uniform values.
// Throws PreconditionError when the pairs do not contain both labels.
Model train(std::span<const LabeledPair> pairs, const OccupationVocabulary& vocab,
            const Hyperparameters& hyperparameters = {}, double threshold = 0.5,
            TrainingTrace* trace = nullptr);

struct LinkDecision {
  std::string street_id;
  EntityId person;
  double probability = 0.0;
};

// Candidate with the highest score; ties by higher link count, then smaller id.
// Returns the index into `candidates`, or nullopt when empty.
std::optional<std::size_t> select_best(std::span<const EntityId> candidates,
                                       std::span<const double> scores, const IndexBundle& bundle);

std::optional<LinkDecision> link_street(const StreetRecord& street, const Model& model,
                                        const IndexBundle& bundle, const AffixSet& affixes,
                                        const RetrievalOptions& retrieval = {});

}  // namespace stp
