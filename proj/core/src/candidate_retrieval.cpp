#include "stp/candidate_retrieval.hpp"

#include <algorithm>

namespace stp {

void sort_by_link_count(std::vector<EntityId>& ids, const IndexBundle& bundle) {
  std::sort(ids.begin(), ids.end(), [&](const EntityId& a, const EntityId& b) {
    const auto ca = bundle.link_count(a);
    const auto cb = bundle.link_count(b);
    if (ca != cb) return ca > cb;
    return a < b;
  });
}

CandidateSet retrieve(const StreetRecord& street, const IndexBundle& bundle, const AffixSet& affixes,
                      const RetrievalOptions& options) {
  CandidateSet result;
  result.street_id = street.osm_id;
  const auto terms = truncate(street.name, affixes);
  if (terms.empty()) return result;
  result.term_used = terms.front();

  if (options.union_terms) {
    bool first_hit = true;
    for (const auto& term : terms) {
      const auto& hits = bundle.lookup(term);
      if (hits.empty()) continue;
      if (first_hit) result.term_used = term;
      first_hit = false;
      result.candidates.insert(result.candidates.end(), hits.begin(), hits.end());
    }
    std::sort(result.candidates.begin(), result.candidates.end());
    result.candidates.erase(std::unique(result.candidates.begin(), result.candidates.end()),
                            result.candidates.end());
  } else {
    for (const auto& term : terms) {
      const auto& hits = bundle.lookup(term);
      if (hits.empty()) continue;
      result.term_used = term;
      result.candidates = hits;
      break;
    }
  }

  if (options.cap && result.candidates.size() > *options.cap) {
    sort_by_link_count(result.candidates, bundle);
    result.candidates.resize(*options.cap);
    std::sort(result.candidates.begin(), result.candidates.end());
  }
  return result;
}

}  // namespace stp
