#include "ppx/prompt_forge.h"

#include <algorithm>
#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "ppx/errors.h"
#include "ppx/text_util.h"

namespace ppx {

std::string_view to_string(PromptKind kind) {
  switch (kind) {
    case PromptKind::kTaskOnly: return "TASK_ONLY";
    case PromptKind::kWithDefinitions: return "WITH_DEFINITIONS";
    case PromptKind::kOneShot: return "ONE_SHOT";
    case PromptKind::kTwoShot: return "TWO_SHOT";
    case PromptKind::kChainOfThought: return "CHAIN_OF_THOUGHT";
  }
  return "?";
}

PromptKind parse_prompt_kind(std::string_view text) {
  text = text::trim(text);
  for (size_t i = 0; i < kAllPromptKinds.size(); ++i) {
    if (text::iequals(text, to_string(kAllPromptKinds[i])) ||
        text::iequals(text, fmt::format("p{}", i + 1))) {
      return kAllPromptKinds[i];
    }
  }
  throw Error(ErrorCode::kInvalidInput, fmt::format("unknown prompt kind '{}'", text));
}

size_t exemplars_required(PromptKind kind) {
  switch (kind) {
    case PromptKind::kOneShot: return 1;
    case PromptKind::kTwoShot: return 2;
    default: return 0;
  }
}

ExampleBank ExampleBank::parse(std::string_view document, std::string_view source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(document));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kInvalidInput, fmt::format("{}:{}: {}", source, e.mark.line + 1, e.msg));
  }
  ExampleBank bank;
  const YAML::Node ex = root["exemplars"];
  if (!ex || !ex.IsMap()) {
    throw Error(ErrorCode::kInvalidInput, fmt::format("{}: missing 'exemplars' mapping", source));
  }
  for (const auto& entry : ex) {
    const std::string node = entry.first.as<std::string>();
    for (const auto& item : entry.second) {
      Exemplar e;
      e.text = item["text"].as<std::string>();
      if (const auto labels = item["labels"]) {
        for (const auto& l : labels) e.labels.push_back(l.as<std::string>());
      } else {
        e.labels.push_back(node);
      }
      bank.add(node, std::move(e));
    }
  }
  return bank;
}

ExampleBank ExampleBank::load(const std::filesystem::path& path) {
  return parse(text::read_file(path.string()), path.string());
}

void ExampleBank::add(const std::string& node_name, Exemplar exemplar) {
  auto& slot = by_name_[text::to_lower(text::trim(node_name))];
  if (slot.first.empty()) slot.first = node_name;
  slot.second.push_back(std::move(exemplar));
}

const std::vector<Exemplar>& ExampleBank::exemplars_for(std::string_view node_name) const {
  static const std::vector<Exemplar> kNone;
  auto it = by_name_.find(text::to_lower(text::trim(node_name)));
  return it == by_name_.end() ? kNone : it->second.second;
}

std::string RenderedPrompt::serialize() const {
  return fmt::format("=== system ===\n{}\n=== user ===\n{}\n=== grammar ===\n{}\n", system_text,
                     user_text, expected_output_grammar);
}

namespace {

struct Templates {
  const char* system;
  const char* task;
  const char* task_with_parent;  // {0} = parent path
  const char* categories;
  const char* definitions;
  const char* examples;
  const char* example_item;  // {0} = text, {1} = answer
  const char* reasoning;
  const char* segment;  // {0} = text
  const char* answer_format;
  const char* answer_format_cot;
  const char* reask;
  // explanation
  const char* explain_task;
  const char* explain_instruction;
  const char* explain_format;
  const char* explain_block;  // {0} = category
  const char* explain_example;
};

constexpr Templates kEnglish{
    "You are an expert in privacy policy analysis. You assign segments of privacy policies to "
    "data practice categories.",
    "Classify the following privacy policy segment into one or more of the categories listed "
    "below.",
    "The following privacy policy segment has already been classified as \"{0}\". Classify it "
    "further into one or more of the sub-categories of \"{0}\" listed below.",
    "Categories:\n",
    "Category definitions:\n",
    "Examples:\n",
    "Segment: \"{0}\"\nAnswer: {1}\n",
    "Reason step by step before answering:\n"
    "1. Identify the data practices the segment describes.\n"
    "2. Compare each practice with the category definitions above.\n"
    "3. Keep only the categories the segment clearly describes; if none fits, the answer is "
    "OTHER.\n"
    "4. Write your final answer on the last line, starting with \"Answer:\".\n",
    "Segment:\n\"\"\"\n{0}\n\"\"\"\n",
    "Answer with the exact names of the matching categories separated by semicolons, or with "
    "OTHER if none of them applies. Do not add anything else.",
    "The last line must be \"Answer: \" followed by the exact names of the matching categories "
    "separated by semicolons, or \"Answer: OTHER\" if none of them applies.",
    "Answer with the category names only, separated by semicolons, or OTHER if none applies.",
    "Explain why the following privacy policy segment was classified into each of its assigned "
    "categories.",
    "For each category, first explain what the category means, then analyze how the segment "
    "relates to it.",
    "Output format (one block per category, in the order listed):\n",
    "{0}\nMeaning: <what the category covers>\nRelevance: <how the segment relates to the "
    "category>\n",
    "Example:\n"
    "Segment: \"We store passwords using salted hashing and only administrators can access the "
    "user database.\"\n"
    "Categories: Data Security\n"
    "Data Security\n"
    "Meaning: This category covers how user information is protected against unauthorized "
    "access or loss.\n"
    "Relevance: The segment names two concrete protections, salted password hashing and "
    "administrator-only database access, so it describes security measures for user data.\n",
};

constexpr Templates kChinese{
    "你是一名隐私政策分析专家，负责将隐私政策片段归入数据实践类别。",
    "请将下面的隐私政策片段归入以下列出的一个或多个类别。",
    "下面的隐私政策片段已被归入类别“{0}”。请进一步将其归入“{0}”下列出的一个或多个子类别。",
    "类别：\n",
    "类别定义：\n",
    "示例：\n",
    "片段：“{0}”\n答案：{1}\n",
    "请在回答前逐步推理：\n"
    "1. 找出片段描述的数据实践。\n"
    "2. 将每项实践与上面的类别定义进行比较。\n"
    "3. 只保留片段明确描述的类别；如果都不符合，答案为 OTHER。\n"
    "4. 在最后一行写出最终答案，以“Answer:”开头。\n",
    "片段：\n\"\"\"\n{0}\n\"\"\"\n",
    "请只输出匹配类别的准确名称，用英文分号分隔；如果都不适用，输出 OTHER。不要添加其他内容。",
    "最后一行必须是“Answer: ”加上用英文分号分隔的匹配类别准确名称；如果都不适用，则为“Answer: "
    "OTHER”。",
    "请只输出类别名称，用英文分号分隔；如果都不适用，输出 OTHER。",
    "请解释下面的隐私政策片段为什么被归入其每个已分配的类别。",
    "对于每个类别，先解释该类别的含义，再分析片段与该类别的关系。",
    "输出格式（每个类别一段，按所列顺序）：\n",
    "{0}\n含义：<该类别涵盖的内容>\n相关性：<片段与该类别的关系>\n",
    "示例：\n"
    "片段：“我们使用加盐哈希存储密码，只有管理员可以访问用户数据库。”\n"
    "类别：SECURITY PROTECTION\n"
    "SECURITY PROTECTION\n"
    "含义：该类别涵盖保护个人信息免遭未经授权访问或丢失的措施。\n"
    "相关性：片段列出了加盐哈希和仅限管理员访问两项具体保护措施，因此描述了安全保护措施。\n",
};

const Templates& templates_for(std::string_view lang) {
  return text::istarts_with(lang, "zh") ? kChinese : kEnglish;
}

std::string grammar_for(const std::vector<const ConceptNode*>& candidates, bool cot) {
  std::vector<std::string> names;
  for (const auto* c : candidates) names.push_back(c->name);
  return fmt::format("{}semicolon-separated category names from {{{}}}, or the single token OTHER",
                     cot ? "final line \"Answer: \" then " : "", text::join(names, " | "));
}

}  // namespace

RenderedPrompt render_classification_prompt(PromptKind kind, const Taxonomy& t,
                                            const std::vector<const ConceptNode*>& candidates,
                                            const Segment& segment,
                                            const std::optional<LabelPath>& parent,
                                            const ExampleBank& bank) {
  (void)t;
  if (candidates.empty()) throw Error(ErrorCode::kPrecondition, "no candidate categories");
  if (text::trim(segment.text).empty()) {
    throw Error(ErrorCode::kEmptySegment, fmt::format("segment '{}' has empty text", segment.id));
  }
  const int level = candidates.front()->level;
  for (const auto* c : candidates) {
    if (c->level != level) throw Error(ErrorCode::kPrecondition, "candidates span several levels");
  }
  const bool needs_parent = level >= 2;
  if (needs_parent != parent.has_value()) {
    throw Error(ErrorCode::kPrecondition,
                needs_parent ? "level-2+ candidates require the assigned parent"
                             : "level-1 candidates take no parent");
  }
  if (parent && static_cast<int>(parent->depth()) != level - 1) {
    throw Error(ErrorCode::kPrecondition, "parent depth does not match candidate level");
  }

  const size_t shots = exemplars_required(kind);
  for (const auto* c : candidates) {
    const size_t have = bank.exemplars_for(c->name).size();
    if (have < shots) {
      throw Error(ErrorCode::kExemplarShortfall,
                  fmt::format("{} needs {} exemplar(s) for '{}', bank has {}", to_string(kind),
                              shots, c->name, have));
    }
  }

  const Templates& tpl = templates_for(segment.lang);
  const bool definitions = kind != PromptKind::kTaskOnly;
  const bool cot = kind == PromptKind::kChainOfThought;

  std::string user;
  user += parent ? fmt::format(fmt::runtime(tpl.task_with_parent), parent->render())
                 : std::string(tpl.task);
  user += "\n\n";
  user += tpl.categories;
  for (const auto* c : candidates) user += fmt::format("- {}\n", c->name);
  if (definitions) {
    user += "\n";
    user += tpl.definitions;
    for (const auto* c : candidates) user += fmt::format("- {}: {}\n", c->name, c->description);
  }
  if (shots > 0) {
    user += "\n";
    user += tpl.examples;
    bool first = true;
    for (const auto* c : candidates) {
      const auto& list = bank.exemplars_for(c->name);
      for (size_t i = 0; i < shots; ++i) {
        if (!first) user += "\n";
        first = false;
        user += fmt::format(fmt::runtime(tpl.example_item), list[i].text,
                            text::join(list[i].labels, "; "));
      }
    }
  }
  if (cot) {
    user += "\n";
    user += tpl.reasoning;
  }
  user += "\n";
  user += fmt::format(fmt::runtime(tpl.segment), segment.text);
  user += "\n";
  user += cot ? tpl.answer_format_cot : tpl.answer_format;

  return RenderedPrompt{tpl.system, std::move(user), grammar_for(candidates, cot)};
}

RenderedPrompt render_explanation_prompt(const Taxonomy& t, const Segment& segment,
                                         const std::vector<LabelPath>& assigned) {
  if (assigned.empty()) {
    throw Error(ErrorCode::kPrecondition, "explanation needs at least one assigned category");
  }
  if (text::trim(segment.text).empty()) {
    throw Error(ErrorCode::kEmptySegment, fmt::format("segment '{}' has empty text", segment.id));
  }
  std::vector<LabelPath> sorted = assigned;
  for (const auto& p : sorted) {
    if (p.is_other() || p.is_root()) {
      throw Error(ErrorCode::kPrecondition, "OTHER does not take an explanation");
    }
  }
  std::sort(sorted.begin(), sorted.end(),
            [](const LabelPath& a, const LabelPath& b) { return a.render() < b.render(); });
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

  const Templates& tpl = templates_for(segment.lang);
  std::string user;
  user += tpl.explain_task;
  user += "\n\n";
  user += tpl.definitions;
  for (const auto& p : sorted) {
    user += fmt::format("- {}: {}\n", p.render(), t.node_at(p).description);
  }
  user += "\n";
  user += tpl.explain_instruction;
  user += "\n\n";
  user += tpl.explain_format;
  std::vector<std::string> names;
  for (size_t i = 0; i < sorted.size(); ++i) {
    if (i) user += "\n";
    user += fmt::format(fmt::runtime(tpl.explain_block), sorted[i].render());
    names.push_back(sorted[i].render());
  }
  user += "\n";
  user += tpl.explain_example;
  user += "\n";
  user += fmt::format(fmt::runtime(tpl.segment), segment.text);

  std::string grammar = fmt::format(
      "one block per category in order {{{}}}: category line, meaning line, relevance line",
      text::join(names, " | "));
  return RenderedPrompt{tpl.system, std::move(user), std::move(grammar)};
}

std::string reask_instruction(std::string_view lang) { return templates_for(lang).reask; }

}  // namespace ppx
