#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ppx/taxonomy.h"

namespace ppx {

struct Segment {
  std::string id;
  std::string doc_id;
  std::string lang = "en";
  std::string text;
};

struct GoldAnnotation {
  std::string segment_id;
  std::vector<LabelPath> labels;  // sorted, unique, non-empty
};

// Split names are "train", "val" and "test"; "all" selects every segment.
inline constexpr std::string_view kAllSplits = "all";

class Corpus {
 public:
  std::string taxonomy_name;
  std::vector<Segment> segments;
  std::vector<GoldAnnotation> annotations;  // parallel to segments
  std::map<std::string, std::set<std::string>> splits;

  const Segment* find(std::string_view id) const;
  const GoldAnnotation& gold(std::string_view id) const;
  std::optional<std::string> split_of(std::string_view id) const;
  // Indices into segments, corpus order. Throws kNotFound for an unknown split.
  std::vector<size_t> select(std::string_view split) const;
  size_t size() const { return segments.size(); }
};

Corpus parse_corpus(std::istream& in, const Taxonomy& t, std::string_view source = "<stream>");
Corpus load_corpus(const std::filesystem::path& path, const Taxonomy& t);
void write_corpus(std::ostream& out, const Corpus& c);

// Segments whose gold set passes through each node at `level`. OTHER is
// reported under its own key at level 1. Zero counts are omitted.
std::map<std::string, size_t> label_frequencies(const Corpus& c, const Taxonomy& t, int level);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

// Document-level split: every segment of a doc_id lands in the same split.
Corpus make_split(const Corpus& c, const SplitRatios& ratios, uint64_t seed);

}  // namespace ppx
