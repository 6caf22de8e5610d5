#include "stp/linker_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include <json.hpp>

#include "stp/errors.hpp"
#include "stp/io.hpp"

namespace stp {

std::vector<LabeledPair> assemble_training_set(std::span<const StreetRecord> ground_truth, const IndexBundle& bundle,
                                               const AffixSet& affixes, const OccupationVocabulary& vocab,
                                               std::size_t negatives_per_street, TrainingSetReport* report,
                                               const RetrievalOptions& retrieval) {
  if (negatives_per_street < 1) throw PreconditionError("negatives per street must be at least 1");
  TrainingSetReport r;
  std::vector<LabeledPair> pairs;
  for (const auto& street : ground_truth) {
    if (!street.etymology_person) {
      ++r.excluded_no_label;
      continue;
    }
    const EntityId& gold = *street.etymology_person;
    if (!bundle.has_person(gold)) {
      ++r.excluded_unknown_person;
      continue;
    }
    const CandidateSet cs = retrieve(street, bundle, affixes, retrieval);
    if (cs.candidates.empty()) {
      ++r.excluded_empty_candidates;
      continue;
    }
    if (!std::binary_search(cs.candidates.begin(), cs.candidates.end(), gold)) ++r.positives_not_retrieved;
    ++r.streets_used;
    pairs.push_back({street.osm_id, gold, extract_features(street, gold, bundle, vocab, affixes), 1});

    std::vector<EntityId> negatives;
    for (const auto& c : cs.candidates)
      if (c != gold) negatives.push_back(c);
    sort_by_link_count(negatives, bundle);
    if (negatives.size() > negatives_per_street) negatives.resize(negatives_per_street);
    for (auto& n : negatives) {
      FeatureVector f = extract_features(street, n, bundle, vocab, affixes);
      pairs.push_back({street.osm_id, std::move(n), std::move(f), 0});
      ++r.negatives;
    }
  }
  if (report) *report = r;
  return pairs;
}

namespace logistic {

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double linear(const Params& params, const Row& x) {
  double z = params[kFeatureCount];
  for (std::size_t j = 0; j < kFeatureCount; ++j) z += params[j] * x[j];
  return z;
}

}  // namespace

double objective(const Params& params, std::span<const Row> x, std::span<const int> y, double l2) {
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double z = linear(params, x[i]);
    loss += softplus(z) - (y[i] ? z : 0.0);
  }
  loss /= static_cast<double>(x.size());
  double norm = 0.0;
  for (std::size_t j = 0; j < kFeatureCount; ++j) norm += params[j] * params[j];
  return loss + 0.5 * l2 * norm;
}

Params gradient(const Params& params, std::span<const Row> x, std::span<const int> y, double l2) {
  Params g{};
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = sigmoid(linear(params, x[i])) - (y[i] ? 1.0 : 0.0);
    for (std::size_t j = 0; j < kFeatureCount; ++j) g[j] += r * x[i][j];
    g[kFeatureCount] += r;
  }
  const double n = static_cast<double>(x.size());
  for (auto& v : g) v /= n;
  for (std::size_t j = 0; j < kFeatureCount; ++j) g[j] += l2 * params[j];
  return g;
}

}  // namespace logistic

Model::Model() { feature_stds.fill(1.0); }

logistic::Row Model::standardize(const FeatureVector& f) const {
  const auto v = f.values();
  logistic::Row row{};
  for (std::size_t j = 0; j < kFeatureCount; ++j) row[j] = (v[j] - feature_means[j]) / feature_stds[j];
  return row;
}

double Model::decision(const FeatureVector& f) const {
  const auto row = standardize(f);
  double z = bias;
  for (std::size_t j = 0; j < kFeatureCount; ++j) z += weights[j] * row[j];
  return z;
}

double Model::probability(const FeatureVector& f) const {
  return std::clamp(logistic::sigmoid(decision(f)), std::numeric_limits<double>::min(),
                    std::nextafter(1.0, 0.0));
}

namespace {

constexpr const char* kModelFormat = "stp-model";

[[noreturn]] void corrupt_model(const std::string& detail) {
  throw FormatError("corrupt model file (expected format version " + std::to_string(Model::kFormatVersion) +
                    "): " + detail);
}

}  // namespace

std::string Model::serialize() const {
  nlohmann::ordered_json j;
  j["format"] = kModelFormat;
  j["format_version"] = kFormatVersion;
  j["feature_names"] = FeatureVector::column_names();
  j["weights"] = weights;
  j["bias"] = bias;
  j["feature_means"] = feature_means;
  j["feature_stds"] = feature_stds;
  j["vocab"] = vocab.occupations();
  j["threshold"] = threshold;
  j["hyperparameters"] = {{"learning_rate", hyperparameters.learning_rate},
                          {"l2", hyperparameters.l2},
                          {"epochs", hyperparameters.epochs},
                          {"seed", hyperparameters.seed}};
  return j.dump(2) + "\n";
}

Model Model::deserialize(const std::string& text) {
  const auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) corrupt_model("not a JSON document");
  try {
    if (j.at("format").get<std::string>() != kModelFormat) corrupt_model("unknown format tag");
    const auto version = j.at("format_version").get<std::uint32_t>();
    if (version != kFormatVersion)
      throw FormatError("model format version " + std::to_string(version) + ", expected " +
                        std::to_string(kFormatVersion));
    Model m;
    m.weights = j.at("weights").get<std::array<double, kFeatureCount>>();
    m.bias = j.at("bias").get<double>();
    m.feature_means = j.at("feature_means").get<std::array<double, kFeatureCount>>();
    m.feature_stds = j.at("feature_stds").get<std::array<double, kFeatureCount>>();
    m.vocab = OccupationVocabulary(j.at("vocab").get<std::array<EntityId, kOccupationSlots>>());
    m.threshold = j.at("threshold").get<double>();
    const auto& h = j.at("hyperparameters");
    m.hyperparameters.learning_rate = h.at("learning_rate").get<double>();
    m.hyperparameters.l2 = h.at("l2").get<double>();
    m.hyperparameters.epochs = h.at("epochs").get<int>();
    m.hyperparameters.seed = h.at("seed").get<std::uint64_t>();
    for (double s : m.feature_stds)
      if (!(s > 0.0)) corrupt_model("non-positive feature std");
    if (!(m.threshold > 0.0 && m.threshold < 1.0)) corrupt_model("threshold outside (0,1)");
    return m;
  } catch (const nlohmann::json::exception& e) {
    corrupt_model(e.what());
  } catch (const PreconditionError& e) {
    corrupt_model(e.what());
  }
}

void Model::save(const std::filesystem::path& path) const { io::write_file_atomic(path, serialize()); }

Model Model::load(const std::filesystem::path& path) {
  if (path.empty()) throw DataError("empty model path");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read model " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize(ss.str());
}

Model train(std::span<const LabeledPair> pairs, const OccupationVocabulary& vocab,
            const Hyperparameters& hyperparameters, double threshold, TrainingTrace* trace) {
  const bool has_pos = std::any_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.label == 1; });
  const bool has_neg = std::any_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.label == 0; });
  if (!has_pos || !has_neg) throw PreconditionError("training needs both positive and negative pairs");
  if (!(threshold > 0.0 && threshold < 1.0)) throw PreconditionError("threshold must lie in (0,1)");
  if (hyperparameters.epochs < 0) throw PreconditionError("epochs must be non-negative");

  Model m;
  m.vocab = vocab;
  m.threshold = threshold;
  m.hyperparameters = hyperparameters;

  const double n = static_cast<double>(pairs.size());
  std::vector<std::array<double, kFeatureCount>> raw;
  raw.reserve(pairs.size());
  for (const auto& p : pairs) raw.push_back(p.features.values());
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    double mean = 0.0;
    for (const auto& r : raw) mean += r[j];
    mean /= n;
    double var = 0.0;
    for (const auto& r : raw) var += (r[j] - mean) * (r[j] - mean);
    const double sd = std::sqrt(var / n);
    m.feature_means[j] = mean;
    m.feature_stds[j] = sd > 1e-12 ? sd : 1.0;
  }

  std::vector<logistic::Row> x;
  std::vector<int> y;
  x.reserve(pairs.size());
  y.reserve(pairs.size());
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    logistic::Row row{};
    for (std::size_t j = 0; j < kFeatureCount; ++j) row[j] = (raw[i][j] - m.feature_means[j]) / m.feature_stds[j];
    x.push_back(row);
    y.push_back(pairs[i].label);
  }

  std::mt19937_64 rng(hyperparameters.seed);
  logistic::Params params{};
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    params[j] = (u * 2.0 - 1.0) * 0.01;
  }

  for (int epoch = 0; epoch < hyperparameters.epochs; ++epoch) {
    const auto g = logistic::gradient(params, x, y, hyperparameters.l2);
    for (std::size_t k = 0; k < logistic::kParamCount; ++k) params[k] -= hyperparameters.learning_rate * g[k];
    if (trace) trace->loss_per_epoch.push_back(logistic::objective(params, x, y, hyperparameters.l2));
  }
  std::copy_n(params.begin(), kFeatureCount, m.weights.begin());
  m.bias = params[kFeatureCount];
  return m;
}

std::optional<std::size_t> select_best(std::span<const EntityId> candidates, std::span<const double> scores,
                                       const IndexBundle& bundle) {
  if (candidates.empty()) return std::nullopt;
  std::size_t best = 0;
  for (std::size_t i = 1; i < candidates.size(); ++i) {
    if (scores[i] != scores[best]) {
      if (scores[i] > scores[best]) best = i;
      continue;
    }
    const auto ci = bundle.link_count(candidates[i]);
    const auto cb = bundle.link_count(candidates[best]);
    if (ci > cb || (ci == cb && candidates[i] < candidates[best])) best = i;
  }
  return best;
}

std::optional<LinkDecision> link_street(const StreetRecord& street, const Model& model, const IndexBundle& bundle,
                                        const AffixSet& affixes, const RetrievalOptions& retrieval) {
  const CandidateSet cs = retrieve(street, bundle, affixes, retrieval);
  if (cs.candidates.empty()) return std::nullopt;
  std::vector<double> scores;
  scores.reserve(cs.candidates.size());
  for (const auto& c : cs.candidates)
    scores.push_back(model.probability(extract_features(street, c, bundle, model.vocab, affixes)));
  const auto best = select_best(cs.candidates, scores, bundle);
  if (!best || scores[*best] < model.threshold) return std::nullopt;
  return LinkDecision{street.osm_id, cs.candidates[*best], scores[*best]};
}

}  // namespace stp
