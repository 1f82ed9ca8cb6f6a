#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ppx/corpus.h"
#include "ppx/llm_gateway.h"
#include "ppx/prompt_forge.h"
#include "ppx/taxonomy.h"

namespace ppx {

struct ClassificationResult {
  std::string segment_id;
  std::vector<LabelPath> predicted;  // sorted, unique
  std::vector<ChatExchange> exchanges;
  std::vector<std::string> unknown_mentions;
  bool failed = false;
  std::string error;

  size_t call_count() const { return exchanges.size(); }
};

struct ClassifierSettings {
  PromptKind kind = PromptKind::kWithDefinitions;
  GenerationConfig config;
  int max_depth = 1;
  std::string model = "default";
  std::string cell;  // journal tag, empty outside experiment runs
};

// 1 for single-level corpora; 2 for goppc150; 3 for appcp100.
int default_max_depth(std::string_view taxonomy_name);

ClassificationResult classify_segment(const Segment& seg, const Taxonomy& t, const ExampleBank& bank,
                                      Gateway& gw, const ClassifierSettings& settings);

// Output is sorted by segment id; identical for any parallelism under a
// deterministic backend.
std::vector<ClassificationResult> classify_corpus(const Corpus& c, std::string_view split,
                                                  const Taxonomy& t, const ExampleBank& bank,
                                                  Gateway& gw, const ClassifierSettings& settings,
                                                  int parallelism = 1);

struct PredictionRecord {
  std::string id;
  std::vector<LabelPath> predicted;
  bool failed = false;
};

void write_predictions(std::ostream& out, const std::vector<ClassificationResult>& results);
void write_predictions(const std::filesystem::path& path,
                       const std::vector<ClassificationResult>& results);
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path, const Taxonomy& t);

}  // namespace ppx
