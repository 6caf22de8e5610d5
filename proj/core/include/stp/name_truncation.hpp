#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stp {

// Street-name prefixes ("Am", "An der") and suffixes ("straße", "weg").
// Both lists are deduplicated case-insensitively and kept longest-first.
class AffixSet {
 public:
  AffixSet() = default;
  AffixSet(std::vector<std::string> prefixes, std::vector<std::string> suffixes);

  // Loads prefixes.txt and suffixes.txt (one entry per line, '#' comments).
  static AffixSet load(const std::filesystem::path& directory);
  static std::vector<std::string> load_list(const std::filesystem::path& file);

  const std::vector<std::string>& prefixes() const { return prefixes_; }
  const std::vector<std::string>& suffixes() const { return suffixes_; }
  bool empty() const { return prefixes_.empty() && suffixes_.empty(); }

  // Case-folded forms, aligned with prefixes()/suffixes().
  const std::vector<std::string>& folded_prefixes() const { return folded_prefixes_; }
  const std::vector<std::string>& folded_suffixes() const { return folded_suffixes_; }

 private:
  std::vector<std::string> prefixes_;
  std::vector<std::string> suffixes_;
  std::vector<std::string> folded_prefixes_;
  std::vector<std::string> folded_suffixes_;
};

// Removes the longest matching suffix, glued ("Wilhelmstraße") or separated
// ("Große Straße", "Adenauer-Straße"). Returns the remainder with trailing
// separators trimmed, or nullopt when no suffix matches.
std::optional<std::string> strip_suffix(std::string_view name, const AffixSet& affixes);

// Removes the longest matching prefix when it stands as leading word(s)
// followed by a space or hyphen.
std::optional<std::string> strip_prefix(std::string_view name, const AffixSet& affixes);

// Hyphens to spaces, whitespace collapsed and trimmed.
std::string finish_candidate(std::string_view s);

// Candidate person-name terms for a street name, best first: fully stripped,
// suffix-only, prefix-only, raw. Deduplicated; empty when the name consists
// of affixes only.
std::vector<std::string> truncate(std::string_view name, const AffixSet& affixes);

}  // namespace stp
