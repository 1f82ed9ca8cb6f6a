#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "ppx/corpus.h"
#include "ppx/llm_gateway.h"
#include "ppx/taxonomy.h"

namespace ppx {

enum class ExplanationSource { kModel, kDecoy };

std::string_view to_string(ExplanationSource s);
ExplanationSource parse_explanation_source(std::string_view text);

struct ExplanationItem {
  std::string item_id;  // assigned by assemble_batch
  std::string segment_id;
  std::string segment_text;
  std::vector<LabelPath> categories;
  std::string explanation_text;
  ExplanationSource source = ExplanationSource::kModel;
};

// Gold categories worth explaining: drops OTHER and "Practice Not Covered".
std::vector<LabelPath> study_categories(const GoldAnnotation& gold);

// Seeded sample of n segments whose study_categories are non-empty.
// Throws kPrecondition when n exceeds the eligible pool.
std::vector<Segment> sample_for_study(const Corpus& c, size_t n, uint64_t seed);

// temperature 0.6, top-p 0.9
GenerationConfig default_explanation_config();

ExplanationItem explain(const Segment& seg, const std::vector<LabelPath>& labels, const Taxonomy& t,
                        Gateway& gw, const GenerationConfig& cfg, std::string_view model = "default");

// Decoy records: {"segment_id", "categories": [...], "text"}.
std::vector<ExplanationItem> load_decoys(const std::filesystem::path& path, const Corpus& c,
                                         const Taxonomy& t);

// Seeded interleave of model and decoy items; item ids are opaque and follow
// batch position.
std::vector<ExplanationItem> assemble_batch(std::vector<ExplanationItem> model_items,
                                            std::vector<ExplanationItem> decoys, uint64_t seed);

// Annotator-facing: {"item_id","text","segment_text","categories"}.
void write_batch(std::ostream& out, const std::vector<ExplanationItem>& batch);
void write_batch(const std::filesystem::path& path, const std::vector<ExplanationItem>& batch);
std::vector<ExplanationItem> read_batch(const std::filesystem::path& path);

// Private unblinding key: {"item_id","source","segment_id"}.
void write_key(const std::filesystem::path& path, const std::vector<ExplanationItem>& batch);

}  // namespace ppx
