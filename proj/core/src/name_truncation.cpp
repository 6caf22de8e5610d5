#include "stp/name_truncation.hpp"

#include <algorithm>
#include <unordered_set>

#include "stp/errors.hpp"
#include "stp/io.hpp"
#include "stp/text.hpp"

namespace stp {

namespace {

void prepare(std::vector<std::string>& entries, std::vector<std::string>& folded) {
  std::vector<std::pair<std::string, std::string>> kept;
  std::unordered_set<std::string> seen;
  for (const auto& e : entries) {
    std::string clean = text::collapse_whitespace(e);
    if (clean.empty()) continue;
    std::string f = text::fold_case(clean);
    if (!seen.insert(f).second) continue;
    kept.emplace_back(std::move(clean), std::move(f));
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second.size() > b.second.size(); });
  entries.clear();
  folded.clear();
  for (auto& [e, f] : kept) {
    entries.push_back(std::move(e));
    folded.push_back(std::move(f));
  }
}

bool is_separator(char c) { return c == '-' || text::is_space(c); }

std::string_view trim_separators(std::string_view s) {
  while (!s.empty() && is_separator(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_separator(s.back())) s.remove_suffix(1);
  return s;
}

}  // namespace

AffixSet::AffixSet(std::vector<std::string> prefixes, std::vector<std::string> suffixes)
    : prefixes_(std::move(prefixes)), suffixes_(std::move(suffixes)) {
  prepare(prefixes_, folded_prefixes_);
  prepare(suffixes_, folded_suffixes_);
}

std::vector<std::string> AffixSet::load_list(const std::filesystem::path& file) {
  io::LineReader reader(file);
  std::vector<std::string> entries;
  std::string line;
  while (reader.next(line)) {
    std::string_view v = line;
    if (v.size() >= 3 && v.substr(0, 3) == "\xEF\xBB\xBF") v.remove_prefix(3);
    const std::string clean = text::collapse_whitespace(v);
    if (clean.empty() || clean.front() == '#') continue;
    entries.push_back(clean);
  }
  return entries;
}

AffixSet AffixSet::load(const std::filesystem::path& directory) {
  const auto prefixes = directory / "prefixes.txt";
  const auto suffixes = directory / "suffixes.txt";
  if (!std::filesystem::exists(prefixes) || !std::filesystem::exists(suffixes))
    throw DataError("affix directory " + directory.string() + " must contain prefixes.txt and suffixes.txt");
  return AffixSet(load_list(prefixes), load_list(suffixes));
}

std::optional<std::string> strip_suffix(std::string_view name, const AffixSet& affixes) {
  const std::string s = text::collapse_whitespace(name);
  const std::string lower = text::fold_case(s);
  for (const auto& suffix : affixes.folded_suffixes()) {
    if (lower.size() < suffix.size() || lower.compare(lower.size() - suffix.size(), suffix.size(), suffix) != 0)
      continue;
    return std::string(trim_separators(std::string_view(s).substr(0, s.size() - suffix.size())));
  }
  return std::nullopt;
}

std::optional<std::string> strip_prefix(std::string_view name, const AffixSet& affixes) {
  const std::string s = text::collapse_whitespace(name);
  const std::string lower = text::fold_case(s);
  for (const auto& prefix : affixes.folded_prefixes()) {
    if (lower.size() < prefix.size() || lower.compare(0, prefix.size(), prefix) != 0) continue;
    if (lower.size() == prefix.size()) return std::string();
    const char next = lower[prefix.size()];
    if (!is_separator(next) && prefix.back() != '.') continue;
    return std::string(trim_separators(std::string_view(s).substr(prefix.size())));
  }
  return std::nullopt;
}

std::string finish_candidate(std::string_view s) {
  return text::collapse_whitespace(text::replace_hyphens(s));
}

std::vector<std::string> truncate(std::string_view name, const AffixSet& affixes) {
  const std::string raw(name);
  const auto suffix_only = strip_suffix(raw, affixes);
  const std::string& after_suffix = suffix_only ? *suffix_only : raw;
  const auto after_prefix = strip_prefix(after_suffix, affixes);
  const auto prefix_only = strip_prefix(raw, affixes);

  const std::string head = finish_candidate(after_prefix ? *after_prefix : after_suffix);
  if (head.empty()) return {};

  std::vector<std::string> out{head};
  auto add = [&](std::string candidate) {
    if (candidate.empty() || std::find(out.begin(), out.end(), candidate) != out.end()) return;
    out.push_back(std::move(candidate));
  };
  if (suffix_only) add(finish_candidate(*suffix_only));
  if (prefix_only) add(finish_candidate(*prefix_only));
  add(finish_candidate(raw));
  return out;
}

}  // namespace stp
