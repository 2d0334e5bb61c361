#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace evoforge {

std::string trim(std::string_view s);

/// Trims and collapses every run of whitespace to a single space.
std::string collapse_spaces(std::string_view s);

std::string to_lower(std::string_view s);

/// Splits on ASCII whitespace, dropping empty pieces.
std::vector<std::string> split_words(std::string_view s);

std::string join_words(const std::vector<std::string>& words);

std::vector<std::string> split_lines(std::string_view s);

/// Single-pass `{{NAME}}` substitution. Substituted values are never rescanned,
/// and placeholders without a binding are left in place.
std::string substitute(std::string_view body, const std::map<std::string, std::string>& values);

/// Names of all `{{NAME}}` placeholders in order of appearance (with repeats).
std::vector<std::string> placeholders_in(std::string_view body);

std::size_t count_occurrences(std::string_view haystack, std::string_view needle);

std::string read_file(const std::string& path);

}  // namespace evoforge
