#include "stp/evaluation.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include "stp/errors.hpp"
#include "stp/parallel.hpp"

namespace stp::eval {

Metrics metrics_from_counts(std::size_t gold, std::size_t predicted, std::size_t correct) {
  Metrics m;
  m.gold = gold;
  m.predicted = predicted;
  m.correct = correct;
  m.precision = predicted ? static_cast<double>(correct) / static_cast<double>(predicted) : 0.0;
  m.recall = gold ? static_cast<double>(correct) / static_cast<double>(gold) : 0.0;
  const double s = m.precision + m.recall;
  m.f1 = s > 0.0 ? 2.0 * m.precision * m.recall / s : 0.0;
  return m;
}

Metrics score_predictions(const Predictions& predictions, const Gold& gold) {
  if (gold.empty()) throw PreconditionError("gold set is empty");
  std::size_t predicted = 0;
  std::size_t correct = 0;
  for (const auto& [street, person] : predictions) {
    const auto it = gold.find(street);
    if (it == gold.end()) throw PreconditionError("prediction for street not in gold: " + street);
    if (!person) continue;
    ++predicted;
    if (*person == it->second) ++correct;
  }
  return metrics_from_counts(gold.size(), predicted, correct);
}

std::vector<int> assign_folds(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw PreconditionError("k-fold needs k >= 2");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  std::vector<int> fold(n);
  for (std::size_t pos = 0; pos < n; ++pos) fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(k));
  return fold;
}

std::optional<LinkDecision> pop_rank(const StreetRecord& street, const IndexBundle& bundle, const AffixSet& affixes,
                                     const RetrievalOptions& retrieval) {
  const CandidateSet cs = retrieve(street, bundle, affixes, retrieval);
  if (cs.candidates.empty()) return std::nullopt;
  std::vector<double> scores;
  scores.reserve(cs.candidates.size());
  double total = 0.0;
  for (const auto& c : cs.candidates) {
    scores.push_back(static_cast<double>(bundle.link_count(c)));
    total += scores.back();
  }
  const auto best = select_best(cs.candidates, scores, bundle);
  const double share = (scores[*best] + 1.0) / (total + static_cast<double>(cs.candidates.size()) + 1.0);
  return LinkDecision{street.osm_id, cs.candidates[*best], share};
}

CvResult kfold_cv(std::span<const StreetRecord> ground_truth, const IndexBundle& bundle, const AffixSet& affixes,
                  const CvOptions& options) {
  if (options.folds < 2) throw PreconditionError("k-fold needs k >= 2");
  if (ground_truth.size() < static_cast<std::size_t>(options.folds))
    throw PreconditionError("fewer ground-truth streets than folds");
  for (const auto& s : ground_truth)
    if (!s.etymology_person) throw PreconditionError("ground-truth street without person: " + s.osm_id);

  CvResult result;
  result.fold_of = assign_folds(ground_truth.size(), options.folds, options.seed);
  std::vector<std::optional<LinkDecision>> decisions(ground_truth.size());

  std::size_t pooled_gold = 0;
  std::size_t pooled_predicted = 0;
  std::size_t pooled_correct = 0;
  double sum_p = 0.0;
  double sum_r = 0.0;
  double sum_f = 0.0;

  for (int fold = 0; fold < options.folds; ++fold) {
    std::vector<StreetRecord> train_streets;
    std::vector<std::size_t> test_idx;
    for (std::size_t i = 0; i < ground_truth.size(); ++i) {
      if (result.fold_of[i] == fold)
        test_idx.push_back(i);
      else
        train_streets.push_back(ground_truth[i]);
    }

    std::optional<Model> model;
    if (options.method == Method::classifier) {
      std::vector<StreetPersonPair> positives;
      for (const auto& s : train_streets)
        if (bundle.has_person(*s.etymology_person)) positives.push_back({s.osm_id, *s.etymology_person});
      const OccupationVocabulary vocab = top_occupations(positives, bundle);
      const auto pairs = assemble_training_set(train_streets, bundle, affixes, vocab, options.negatives_per_street,
                                               nullptr, options.retrieval);
      model = train(pairs, vocab, options.hyperparameters, options.threshold);
    }

    parallel_for(test_idx.size(), options.threads, [&](std::size_t t) {
      const auto& street = ground_truth[test_idx[t]];
      decisions[test_idx[t]] = model ? link_street(street, *model, bundle, affixes, options.retrieval)
                                     : pop_rank(street, bundle, affixes, options.retrieval);
    });

    Predictions fold_pred;
    Gold fold_gold;
    for (std::size_t i : test_idx) {
      const auto& street = ground_truth[i];
      fold_gold[street.osm_id] = *street.etymology_person;
      fold_pred[street.osm_id] = decisions[i] ? std::optional<EntityId>(decisions[i]->person) : std::nullopt;
    }
    const Metrics m = score_predictions(fold_pred, fold_gold);
    result.report.folds.push_back(m);
    pooled_gold += m.gold;
    pooled_predicted += m.predicted;
    pooled_correct += m.correct;
    sum_p += m.precision;
    sum_r += m.recall;
    sum_f += m.f1;
    result.predictions.merge(fold_pred);
  }

  result.report.micro = metrics_from_counts(pooled_gold, pooled_predicted, pooled_correct);
  const double k = static_cast<double>(options.folds);
  result.report.macro = result.report.micro;
  result.report.macro.precision = sum_p / k;
  result.report.macro.recall = sum_r / k;
  result.report.macro.f1 = sum_f / k;
  return result;
}

std::vector<RegionRow> region_stats(std::span<const StreetSummary> streets, std::span<const EntityId> regions) {
  std::vector<RegionRow> rows;
  rows.reserve(regions.size());
  for (const auto& region : regions) {
    RegionRow row;
    row.region = region;
    for (const auto& s : streets) {
      if (std::find(s.chain.begin(), s.chain.end(), region) == s.chain.end()) continue;
      ++row.streets;
      if (s.candidates > 0) ++row.with_candidates;
      row.candidate_persons += s.candidates;
      if (s.linked) ++row.relations;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_metrics_table(const std::vector<std::pair<std::string, Metrics>>& rows) {
  std::size_t width = 6;
  for (const auto& [name, m] : rows) width = std::max(width, name.size());
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-*s  %9s  %9s  %9s  %7s  %9s  %7s\n", static_cast<int>(width), "method",
                "precision", "recall", "f1", "gold", "predicted", "correct");
  out << buf;
  for (const auto& [name, m] : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %9.4f  %9.4f  %9.4f  %7zu  %9zu  %7zu\n", static_cast<int>(width),
                  name.c_str(), m.precision, m.recall, m.f1, m.gold, m.predicted, m.correct);
    out << buf;
  }
  return out.str();
}

}  // namespace stp::eval
