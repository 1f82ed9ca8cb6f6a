#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ppx/corpus.h"
#include "ppx/taxonomy.h"

namespace ppx {

enum class PromptKind { kTaskOnly, kWithDefinitions, kOneShot, kTwoShot, kChainOfThought };

inline constexpr std::array<PromptKind, 5> kAllPromptKinds = {
    PromptKind::kTaskOnly, PromptKind::kWithDefinitions, PromptKind::kOneShot,
    PromptKind::kTwoShot, PromptKind::kChainOfThought};

std::string_view to_string(PromptKind kind);
PromptKind parse_prompt_kind(std::string_view text);  // accepts TASK_ONLY or p1..p5
size_t exemplars_required(PromptKind kind);

struct Exemplar {
  std::string text;
  std::vector<std::string> labels;
};

// Exemplars keyed by node name (case-insensitive lookup).
class ExampleBank {
 public:
  static ExampleBank parse(std::string_view document, std::string_view source = "<memory>");
  static ExampleBank load(const std::filesystem::path& path);

  void add(const std::string& node_name, Exemplar exemplar);
  const std::vector<Exemplar>& exemplars_for(std::string_view node_name) const;
  bool empty() const { return by_name_.empty(); }

 private:
  std::map<std::string, std::pair<std::string, std::vector<Exemplar>>> by_name_;  // lower → (name, list)
};

struct RenderedPrompt {
  std::string system_text;
  std::string user_text;
  std::string expected_output_grammar;

  // Stable text form used for golden files.
  std::string serialize() const;
};

// Classification prompt over `candidates`. `parent` is required exactly when
// the candidates sit below level 1. Templates follow the segment language
// ("zh" selects the Chinese pair, anything else English).
RenderedPrompt render_classification_prompt(PromptKind kind, const Taxonomy& t,
                                            const std::vector<const ConceptNode*>& candidates,
                                            const Segment& segment,
                                            const std::optional<LabelPath>& parent,
                                            const ExampleBank& bank);

RenderedPrompt render_explanation_prompt(const Taxonomy& t, const Segment& segment,
                                         const std::vector<LabelPath>& assigned);

// Follow-up turn used once when a reply cannot be parsed.
std::string reask_instruction(std::string_view lang);

}  // namespace ppx
