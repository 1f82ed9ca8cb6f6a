#include "ppx/text_util.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "ppx/errors.h"

namespace ppx {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid input";
    case ErrorCode::kIo: return "i/o error";
    case ErrorCode::kEmptyTaxonomy: return "empty taxonomy";
    case ErrorCode::kDuplicateCode: return "duplicate code";
    case ErrorCode::kDanglingParent: return "dangling parent";
    case ErrorCode::kCycle: return "cycle";
    case ErrorCode::kLevelMismatch: return "level mismatch";
    case ErrorCode::kUnknownLabel: return "unknown label";
    case ErrorCode::kNonEdge: return "non-edge hop";
    case ErrorCode::kMalformedRecord: return "malformed record";
    case ErrorCode::kEmptyLabelSet: return "empty label set";
    case ErrorCode::kDuplicateSegment: return "duplicate segment";
    case ErrorCode::kOverlappingSplits: return "overlapping splits";
    case ErrorCode::kExemplarShortfall: return "exemplar shortfall";
    case ErrorCode::kEmptySegment: return "empty segment";
    case ErrorCode::kPrecondition: return "precondition violated";
    case ErrorCode::kUnparseableOutput: return "unparseable output";
    case ErrorCode::kRetriesExhausted: return "retries exhausted";
    case ErrorCode::kClientError: return "client error";
    case ErrorCode::kIdMismatch: return "id mismatch";
    case ErrorCode::kLabelSetMismatch: return "label set mismatch";
    case ErrorCode::kUnequalRaters: return "unequal rater counts";
    case ErrorCode::kNotFound: return "not found";
    case ErrorCode::kConflict: return "conflict";
  }
  return "unknown";
}

namespace text {

std::string_view trim(std::string_view s) {
  auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c);
  });
  return out;
}

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() && to_lower(a) == to_lower(b);
}

bool istarts_with(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && iequals(s.substr(0, prefix.size()), prefix);
}

std::vector<std::string> split(std::string_view s, char delim) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(delim, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos
                                                                    : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  if (needle.empty()) return 0;
  size_t n = 0;
  for (size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + 1)) {
    ++n;
  }
  return n;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace text
}  // namespace ppx
