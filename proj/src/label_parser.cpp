#include <algorithm>
#include <cctype>
#include <fmt/format.h>
#include <string>
#include <vector>

#include "ppx/llm_gateway.h"
#include "ppx/taxonomy.h"
#include "ppx/text_util.h"

namespace ppx {
namespace {

struct Candidate {
  std::string lower;
  std::string canonical;
};

struct LineParse {
  std::vector<std::string> recognized;
  std::vector<std::string> unknown;
  bool other = false;
  bool matched() const { return other || !recognized.empty(); }
};

bool is_delim(char c) { return c == ';' || c == ',' || c == '\n'; }

bool is_closing_punct(char c) {
  return c == '.' || c == ')' || c == ']' || c == '"' || c == '\'' || c == '*' || c == '`';
}

// True when position `end` in `s` closes an item: end of text, a delimiter,
// or trailing punctuation/whitespace before one.
bool at_boundary(std::string_view s, size_t end) {
  while (end < s.size() && (s[end] == ' ' || s[end] == '\t' || s[end] == '\r' ||
                            is_closing_punct(s[end]))) {
    ++end;
  }
  return end >= s.size() || is_delim(s[end]);
}

std::string clean_item(std::string_view item) {
  auto strip = [](unsigned char c) {
    return std::isspace(c) || c == '"' || c == '\'' || c == '*' || c == '`' || c == '.' ||
           c == '-' || c == '(' || c == ')' || c == '[' || c == ']';
  };
  while (!item.empty() && strip(item.front())) item.remove_prefix(1);
  while (!item.empty() && strip(item.back())) item.remove_suffix(1);
  return std::string(item);
}

// Drops list markers ("- ", "* ", "1. ") and a leading "Label:" prefix.
std::string_view strip_line_prefix(std::string_view line) {
  line = text::trim(line);
  while (!line.empty() && (line.front() == '-' || line.front() == '*' || line.front() == '#')) {
    line.remove_prefix(1);
    line = text::trim(line);
  }
  size_t digits = 0;
  while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
  if (digits > 0 && digits + 1 < line.size() && (line[digits] == '.' || line[digits] == ')') &&
      line[digits + 1] == ' ') {
    line = text::trim(line.substr(digits + 1));
  }
  if (size_t colon = line.rfind(':'); colon != std::string_view::npos) {
    line = text::trim(line.substr(colon + 1));
  }
  return line;
}

LineParse parse_line(std::string_view raw, const std::vector<Candidate>& candidates) {
  LineParse out;
  const std::string_view line = strip_line_prefix(raw);
  const std::string lower = text::to_lower(line);
  size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() &&
           (is_delim(line[pos]) || std::isspace(static_cast<unsigned char>(line[pos])))) {
      ++pos;
    }
    if (pos >= line.size()) break;
    // Optional opening quote/bracket.
    size_t start = pos;
    while (start < line.size() && (line[start] == '"' || line[start] == '\'' ||
                                   line[start] == '[' || line[start] == '(' || line[start] == '`')) {
      ++start;
    }
    bool consumed = false;
    for (const auto& c : candidates) {
      if (lower.compare(start, c.lower.size(), c.lower) == 0 &&
          at_boundary(line, start + c.lower.size())) {
        if (c.canonical == kOther) {
          out.other = true;
        } else {
          out.recognized.push_back(c.canonical);
        }
        pos = start + c.lower.size();
        consumed = true;
        break;
      }
    }
    if (consumed) continue;
    size_t end = pos;
    while (end < line.size() && !is_delim(line[end])) ++end;
    std::string item = clean_item(line.substr(pos, end - pos));
    if (!item.empty()) out.unknown.push_back(std::move(item));
    pos = end;
  }
  return out;
}

bool word_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
         static_cast<unsigned char>(c) >= 0x80;
}

// Whole-word search used when no line parses as a list.
std::vector<std::pair<size_t, std::string>> find_mentions(std::string_view line,
                                                          const std::vector<Candidate>& candidates) {
  std::vector<std::pair<size_t, std::string>> hits;
  const std::string lower = text::to_lower(line);
  std::vector<bool> taken(line.size(), false);
  for (const auto& c : candidates) {
    const bool sentinel = c.canonical == kOther;
    const std::string& needle = sentinel ? c.canonical : c.lower;
    const std::string& hay = sentinel ? std::string(line) : lower;
    for (size_t p = hay.find(needle); p != std::string::npos; p = hay.find(needle, p + 1)) {
      const size_t e = p + needle.size();
      const bool left_ok = p == 0 || !word_char(hay[p - 1]);
      const bool right_ok = e >= hay.size() || !word_char(hay[e]);
      if (!left_ok || !right_ok) continue;
      if (std::any_of(taken.begin() + p, taken.begin() + e, [](bool b) { return b; })) continue;
      std::fill(taken.begin() + p, taken.begin() + e, true);
      hits.emplace_back(p, c.canonical);
    }
  }
  std::sort(hits.begin(), hits.end());
  return hits;
}

void push_unique(std::vector<std::string>& out, const std::string& v) {
  if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
}

}  // namespace

ParsedLabels parse_labels(std::string_view text, const std::vector<std::string>& allowed) {
  if (allowed.empty()) throw Error(ErrorCode::kPrecondition, "allowed label list is empty");
  std::vector<Candidate> candidates;
  for (const auto& name : allowed) {
    candidates.push_back({text::to_lower(text::trim(name)), std::string(text::trim(name))});
  }
  candidates.push_back({text::to_lower(kOther), std::string(kOther)});
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& a, const Candidate& b) { return a.lower.size() > b.lower.size(); });

  const auto lines = text::split(text, '\n');
  std::vector<LineParse> parsed;
  parsed.reserve(lines.size());
  for (const auto& l : lines) parsed.push_back(parse_line(l, candidates));

  ParsedLabels out;
  int last = -1;
  for (int i = static_cast<int>(parsed.size()) - 1; i >= 0; --i) {
    if (parsed[i].matched()) {
      last = i;
      break;
    }
  }
  if (last >= 0) {
    int first = last;
    while (first > 0 && parsed[first - 1].matched()) --first;
    for (int i = first; i <= last; ++i) {
      for (const auto& r : parsed[i].recognized) push_unique(out.recognized, r);
      for (const auto& u : parsed[i].unknown) push_unique(out.unknown_mentions, u);
      out.is_other = out.is_other || parsed[i].other;
    }
  } else {
    for (int i = static_cast<int>(lines.size()) - 1; i >= 0 && last < 0; --i) {
      auto hits = find_mentions(lines[i], candidates);
      if (hits.empty()) continue;
      last = i;
      for (const auto& [pos, name] : hits) {
        if (name == kOther) {
          out.is_other = true;
        } else {
          push_unique(out.recognized, name);
        }
      }
    }
    if (last < 0) {
      throw Error(ErrorCode::kUnparseableOutput,
                  fmt::format("no category name or OTHER in model output: \"{}\"",
                              text.substr(0, std::min<size_t>(text.size(), 120))));
    }
  }
  // OTHER together with real categories: the categories win.
  if (out.is_other && !out.recognized.empty()) {
    out.is_other = false;
    push_unique(out.unknown_mentions, std::string(kOther));
  }
  return out;
}

}  // namespace ppx
