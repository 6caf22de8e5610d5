#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace stp::text {

// Lower-cases ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic letters.
// Only mappings that keep the UTF-8 byte length are applied, so byte offsets
// in the folded string line up with the original.
std::string fold_case(std::string_view s);

bool is_space(char c);

// Trims and collapses runs of whitespace (including U+00A0) to one space.
std::string collapse_whitespace(std::string_view s);

// fold_case + collapse_whitespace. Diacritics and umlauts are preserved.
std::string normalize_term(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

// Splits on whitespace and hyphens; empty pieces dropped.
std::vector<std::string> split_words(std::string_view s);

std::string replace_hyphens(std::string_view s);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_letter(std::string_view s);

}  // namespace stp::text
