#include "stp/errors.hpp"
#include "stp/types.hpp"

namespace stp {

std::string_view to_string(RelationKind kind) {
  switch (kind) {
    case RelationKind::born: return "born";
    case RelationKind::died: return "died";
    case RelationKind::buried: return "buried";
    case RelationKind::educated_at: return "educated_at";
    case RelationKind::work_location: return "work_location";
  }
  return "unknown";
}

std::optional<RelationKind> parse_relation_kind(std::string_view text) {
  for (RelationKind kind : kRelationKinds)
    if (to_string(kind) == text) return kind;
  return std::nullopt;
}

}  // namespace stp
