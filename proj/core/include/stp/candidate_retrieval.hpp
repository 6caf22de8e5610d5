#pragma once

#include <optional>
#include <string>
#include <vector>

#include "stp/index_store.hpp"
#include "stp/name_truncation.hpp"
#include "stp/types.hpp"

namespace stp {

struct RetrievalOptions {
  // Union the lookups of every truncation candidate instead of stopping at
  // the first non-empty one.
  bool union_terms = false;
  // Keep at most this many candidates, highest link count first.
  std::optional<std::size_t> cap;
};

struct CandidateSet {
  std::string street_id;
  std::string term_used;
  // Sorted person ids.
  std::vector<EntityId> candidates;
  bool operator==(const CandidateSet&) const = default;
};

CandidateSet retrieve(const StreetRecord& street, const IndexBundle& bundle, const AffixSet& affixes,
                      const RetrievalOptions& options = {});

// Orders ids by descending link count, ties by id.
void sort_by_link_count(std::vector<EntityId>& ids, const IndexBundle& bundle);

}  // namespace stp
