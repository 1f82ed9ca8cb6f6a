#include "ppx/finetune_export.h"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <json.hpp>
#include <set>

#include "ppx/rng.h"
#include "ppx/text_util.h"

namespace ppx {

namespace {

std::string category_list(const std::vector<const ConceptNode*>& nodes) {
  std::vector<std::string> names;
  for (const auto* n : nodes) names.push_back(n->name);
  return text::join(names, "; ");
}

std::string level_one_instruction(const Taxonomy& t) {
  return fmt::format(
      "Classify the privacy policy segment into one or more of the following categories: {}. "
      "Answer with the matching category names separated by semicolons, or OTHER if none apply.",
      category_list(t.children_of(LabelPath::root())));
}

std::string child_instruction(const Taxonomy& t, const LabelPath& parent) {
  return fmt::format(
      "The privacy policy segment has been classified under the concept {}. Classify it into one "
      "or more of its sub-concepts: {}. Answer with the matching sub-concept names separated by "
      "semicolons, or OTHER if none apply.",
      parent.render(), category_list(t.children_of(parent)));
}

// Names ordered as the candidates are declared.
std::string ordered_output(const std::vector<const ConceptNode*>& candidates,
                           const std::set<std::string>& chosen) {
  std::vector<std::string> out;
  for (const auto* n : candidates) {
    if (chosen.count(n->name)) out.push_back(n->name);
  }
  return text::join(out, "; ");
}

}  // namespace

std::vector<InstructionRecord> export_level_task(const Corpus& c, const Taxonomy& t, int level,
                                                 std::string_view split) {
  if (level < 1 || level > t.max_level()) {
    throw Error(ErrorCode::kPrecondition,
                fmt::format("level {} outside 1..{} for taxonomy '{}'", level, t.max_level(), t.name()));
  }
  std::vector<InstructionRecord> out;
  const auto roots = t.children_of(LabelPath::root());
  const std::string l1_instruction = level == 1 ? level_one_instruction(t) : std::string();

  for (size_t idx : c.select(split)) {
    const Segment& seg = c.segments[idx];
    const GoldAnnotation& gold = c.annotations[idx];
    if (level == 1) {
      InstructionRecord r;
      r.instruction = l1_instruction;
      r.input = seg.text;
      r.level = 1;
      r.segment_id = seg.id;
      if (gold.labels.size() == 1 && gold.labels.front().is_other()) {
        r.output = std::string(kOther);
      } else {
        std::set<std::string> heads;
        for (const auto& p : gold.labels) heads.insert(p.head());
        r.output = ordered_output(roots, heads);
      }
      r.source_index = out.size();
      out.push_back(std::move(r));
      continue;
    }
    std::map<LabelPath, std::set<std::string>> by_parent;
    for (const auto& p : gold.labels) {
      if (p.is_other() || static_cast<int>(p.depth()) < level) continue;
      by_parent[p.prefix(level - 1)].insert(p.segments()[level - 1]);
    }
    for (const auto& [parent, kids] : by_parent) {
      InstructionRecord r;
      r.instruction = child_instruction(t, parent);
      r.input = fmt::format("Parent concept: {}\nSegment: {}", parent.render(), seg.text);
      r.output = ordered_output(t.children_of(parent), kids);
      r.level = level;
      r.segment_id = seg.id;
      r.parent = parent;
      r.source_index = out.size();
      out.push_back(std::move(r));
    }
  }
  return out;
}

std::vector<InstructionRecord> export_multitask(const Corpus& c, const Taxonomy& t,
                                                const std::vector<int>& levels,
                                                std::string_view split, uint64_t seed) {
  std::set<int> distinct(levels.begin(), levels.end());
  if (distinct.size() < 2) {
    throw Error(ErrorCode::kPrecondition, "multitask export needs at least two distinct levels");
  }
  std::vector<InstructionRecord> out;
  for (int level : distinct) {
    auto part = export_level_task(c, t, level, split);
    std::move(part.begin(), part.end(), std::back_inserter(out));
  }
  DeterministicRng rng(seed);
  rng.shuffle(out);
  return out;
}

void write_instructions(std::ostream& out, const std::vector<InstructionRecord>& records) {
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["instruction"] = r.instruction;
    j["input"] = r.input;
    j["output"] = r.output;
    out << j.dump() << '\n';
  }
}

void write_instructions(const std::filesystem::path& path,
                        const std::vector<InstructionRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", path.string()));
  write_instructions(out, records);
}

std::string instruction_file_name(std::string_view corpus, std::string_view level_or_multi,
                                  std::string_view split) {
  return fmt::format("{}.{}.{}.inst", corpus, level_or_multi, split);
}

}  // namespace ppx
