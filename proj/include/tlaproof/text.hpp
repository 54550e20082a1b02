#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace tlaproof {

std::string trim(std::string_view s);

// Collapses every whitespace run to a single space and trims the ends.
// This is the canonical form used for dedup keys, embedding input and
// text comparisons throughout the project.
std::string normalize_ws(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

std::string replace_all(std::string s, std::string_view from, std::string_view to);

bool starts_with(std::string_view s, std::string_view prefix);

// True when `word` occurs at position `pos` in `s` with identifier
// boundaries on both sides.
bool word_at(std::string_view s, std::size_t pos, std::string_view word);

// Minimal glob matcher: `*` matches any run of characters (including '/'),
// `?` matches a single character. Everything else is literal.
bool glob_match(std::string_view pattern, std::string_view text);

// FNV-1a, the stable content hash used for corpus ids, transcript keys and
// run-log payload digests.
std::uint64_t fnv1a64(std::string_view s);
std::string fnv1a64_hex(std::string_view s);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

}  // namespace tlaproof
