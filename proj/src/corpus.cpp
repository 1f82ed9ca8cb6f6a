#include "ppx/corpus.h"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include "ppx/errors.h"
#include "ppx/rng.h"
#include "ppx/text_util.h"

namespace ppx {

using nlohmann::json;

const Segment* Corpus::find(std::string_view id) const {
  for (const auto& s : segments) {
    if (s.id == id) return &s;
  }
  return nullptr;
}

const GoldAnnotation& Corpus::gold(std::string_view id) const {
  for (size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].id == id) return annotations[i];
  }
  throw Error(ErrorCode::kNotFound, fmt::format("no segment '{}'", id));
}

std::optional<std::string> Corpus::split_of(std::string_view id) const {
  for (const auto& [name, ids] : splits) {
    if (ids.count(std::string(id))) return name;
  }
  return std::nullopt;
}

std::vector<size_t> Corpus::select(std::string_view split) const {
  std::vector<size_t> out;
  if (split == kAllSplits || split.empty()) {
    out.resize(segments.size());
    std::iota(out.begin(), out.end(), size_t{0});
    return out;
  }
  auto it = splits.find(std::string(split));
  if (it == splits.end()) {
    if (split == "train" || split == "val" || split == "test") return out;
    throw Error(ErrorCode::kNotFound, fmt::format("unknown split '{}'", split));
  }
  for (size_t i = 0; i < segments.size(); ++i) {
    if (it->second.count(segments[i].id)) out.push_back(i);
  }
  return out;
}

namespace {

[[noreturn]] void malformed(std::string_view source, size_t line, const std::string& msg,
                            ErrorCode code = ErrorCode::kMalformedRecord) {
  throw Error(code, fmt::format("{}:{}: {}", source, line, msg));
}

std::string string_field(const json& rec, const char* key, std::string_view source, size_t line) {
  auto it = rec.find(key);
  if (it == rec.end() || !it->is_string()) {
    malformed(source, line, fmt::format("field '{}' missing or not a string", key));
  }
  return it->get<std::string>();
}

}  // namespace

Corpus parse_corpus(std::istream& in, const Taxonomy& t, std::string_view source) {
  Corpus c;
  c.taxonomy_name = t.name();
  std::unordered_map<std::string, size_t> seen;
  std::string raw;
  size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (text::trim(raw).empty()) continue;
    json rec;
    try {
      rec = json::parse(raw);
    } catch (const json::parse_error& e) {
      malformed(source, line, e.what());
    }
    if (!rec.is_object()) malformed(source, line, "record is not an object");

    Segment seg;
    seg.id = string_field(rec, "id", source, line);
    seg.doc_id = string_field(rec, "doc_id", source, line);
    seg.lang = rec.contains("lang") ? string_field(rec, "lang", source, line) : "en";
    seg.text = string_field(rec, "text", source, line);
    if (text::trim(seg.text).empty()) {
      malformed(source, line, fmt::format("segment '{}' has empty text", seg.id),
                ErrorCode::kEmptySegment);
    }
    if (!seen.emplace(seg.id, line).second) {
      malformed(source, line, fmt::format("duplicate segment id '{}'", seg.id),
                ErrorCode::kDuplicateSegment);
    }

    const auto labels = rec.find("labels");
    if (labels == rec.end() || !labels->is_array()) malformed(source, line, "'labels' must be a list");
    if (labels->empty()) {
      malformed(source, line, fmt::format("empty label set for '{}'", seg.id),
                ErrorCode::kEmptyLabelSet);
    }
    GoldAnnotation gold{seg.id, {}};
    for (const auto& l : *labels) {
      if (!l.is_string()) malformed(source, line, "labels must be strings");
      try {
        gold.labels.push_back(t.parse_label_path(l.get<std::string>()));
      } catch (const Error& e) {
        malformed(source, line, e.what(), ErrorCode::kUnknownLabel);
      }
    }
    std::sort(gold.labels.begin(), gold.labels.end());
    gold.labels.erase(std::unique(gold.labels.begin(), gold.labels.end()), gold.labels.end());
    if (gold.labels.size() > 1 &&
        std::any_of(gold.labels.begin(), gold.labels.end(), [](auto& p) { return p.is_other(); })) {
      malformed(source, line, fmt::format("'{}' combines OTHER with other labels", seg.id),
                ErrorCode::kUnknownLabel);
    }

    if (auto sp = rec.find("split"); sp != rec.end() && !sp->is_null()) {
      if (!sp->is_string()) malformed(source, line, "'split' must be a string or null");
      const std::string name = sp->get<std::string>();
      if (name != "train" && name != "val" && name != "test") {
        malformed(source, line, fmt::format("unknown split '{}'", name));
      }
      c.splits[name].insert(seg.id);
    }
    c.segments.push_back(std::move(seg));
    c.annotations.push_back(std::move(gold));
  }
  // A segment appears in at most one split by construction; documents may not.
  std::unordered_map<std::string, std::string> doc_split;
  for (const auto& seg : c.segments) {
    auto sp = c.split_of(seg.id);
    if (!sp) continue;
    auto [it, inserted] = doc_split.emplace(seg.doc_id, *sp);
    if (!inserted && it->second != *sp) {
      throw Error(ErrorCode::kOverlappingSplits,
                  fmt::format("{}: document '{}' spans splits '{}' and '{}'", source, seg.doc_id,
                              it->second, *sp));
    }
  }
  return c;
}

Corpus load_corpus(const std::filesystem::path& path, const Taxonomy& t) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open corpus '{}'", path.string()));
  return parse_corpus(in, t, path.string());
}

void write_corpus(std::ostream& out, const Corpus& c) {
  for (size_t i = 0; i < c.segments.size(); ++i) {
    const auto& s = c.segments[i];
    json labels = json::array();
    for (const auto& p : c.annotations[i].labels) labels.push_back(p.render());
    auto split = c.split_of(s.id);
    json rec = {{"id", s.id},     {"doc_id", s.doc_id}, {"lang", s.lang},
                {"text", s.text}, {"labels", labels},   {"split", split ? json(*split) : json()}};
    out << rec.dump() << '\n';
  }
}

std::map<std::string, size_t> label_frequencies(const Corpus& c, const Taxonomy& t, int level) {
  if (level < 1 || level > t.max_level()) {
    throw Error(ErrorCode::kPrecondition,
                fmt::format("level {} outside 1..{}", level, t.max_level()));
  }
  std::map<std::string, size_t> out;
  for (const auto& gold : c.annotations) {
    std::set<std::string> names;
    for (const auto& p : gold.labels) {
      if (p.is_other()) {
        if (level == 1) names.insert(std::string(kOther));
      } else if (static_cast<int>(p.depth()) >= level) {
        names.insert(p.segments()[level - 1]);
      }
    }
    for (const auto& n : names) ++out[n];
  }
  return out;
}

Corpus make_split(const Corpus& c, const SplitRatios& ratios, uint64_t seed) {
  const double r[3] = {ratios.train, ratios.val, ratios.test};
  for (double x : r) {
    if (x < 0) throw Error(ErrorCode::kPrecondition, "split fractions must be non-negative");
  }
  if (std::abs(r[0] + r[1] + r[2] - 1.0) > 1e-9) {
    throw Error(ErrorCode::kPrecondition, "split fractions must sum to 1");
  }

  std::vector<std::string> docs;
  for (const auto& s : c.segments) {
    if (std::find(docs.begin(), docs.end(), s.doc_id) == docs.end()) docs.push_back(s.doc_id);
  }
  DeterministicRng rng(seed);
  rng.shuffle(docs);

  // Largest-remainder apportionment of documents, so each split is within one
  // document of its ideal share.
  const double n = static_cast<double>(docs.size());
  size_t counts[3];
  double rema[3];
  size_t assigned = 0;
  for (int i = 0; i < 3; ++i) {
    double ideal = r[i] * n;
    counts[i] = static_cast<size_t>(std::floor(ideal + 1e-9));
    rema[i] = ideal - static_cast<double>(counts[i]);
    assigned += counts[i];
  }
  while (assigned < docs.size()) {
    int best = 0;
    for (int i = 1; i < 3; ++i) {
      if (rema[i] > rema[best] + 1e-12) best = i;
    }
    ++counts[best];
    rema[best] = -1.0;
    ++assigned;
  }

  static constexpr const char* kNames[3] = {"train", "val", "test"};
  std::unordered_map<std::string, int> doc_split;
  size_t pos = 0;
  for (int i = 0; i < 3; ++i) {
    for (size_t k = 0; k < counts[i]; ++k) doc_split[docs[pos++]] = i;
  }

  Corpus out = c;
  out.splits.clear();
  for (const auto& s : out.segments) out.splits[kNames[doc_split.at(s.doc_id)]].insert(s.id);
  return out;
}

}  // namespace ppx
