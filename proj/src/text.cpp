#include "evoforge/text.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "evoforge/core.hpp"

namespace evoforge {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string collapse_spaces(std::string_view s) { return join_words(split_words(s)); }

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) words.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return words;
}

std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out.push_back(' ');
    out += words[i];
  }
  return out;
}

std::vector<std::string> split_lines(std::string_view s) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto nl = s.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.emplace_back(s.substr(start));
      break;
    }
    lines.emplace_back(s.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

std::string substitute(std::string_view body, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(body.size());
  std::size_t i = 0;
  while (i < body.size()) {
    auto open = body.find("{{", i);
    if (open == std::string_view::npos) {
      out.append(body.substr(i));
      break;
    }
    auto close = body.find("}}", open + 2);
    if (close == std::string_view::npos) {
      out.append(body.substr(i));
      break;
    }
    out.append(body.substr(i, open - i));
    std::string name(body.substr(open + 2, close - open - 2));
    auto it = values.find(name);
    if (it != values.end()) {
      out += it->second;
    } else {
      out.append(body.substr(open, close + 2 - open));
    }
    i = close + 2;
  }
  return out;
}

std::vector<std::string> placeholders_in(std::string_view body) {
  std::vector<std::string> names;
  std::size_t i = 0;
  while (true) {
    auto open = body.find("{{", i);
    if (open == std::string_view::npos) break;
    auto close = body.find("}}", open + 2);
    if (close == std::string_view::npos) break;
    names.emplace_back(body.substr(open + 2, close - open - 2));
    i = close + 2;
  }
  return names;
}

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace evoforge
