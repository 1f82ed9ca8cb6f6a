#include "ppx/explainer.h"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <json.hpp>

#include "ppx/prompt_forge.h"
#include "ppx/rng.h"
#include "ppx/text_util.h"

namespace ppx {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {
constexpr std::string_view kPracticeNotCovered = "Practice Not Covered";
}

std::string_view to_string(ExplanationSource s) {
  return s == ExplanationSource::kModel ? "MODEL" : "DECOY";
}

ExplanationSource parse_explanation_source(std::string_view text) {
  if (text::iequals(text, "MODEL")) return ExplanationSource::kModel;
  if (text::iequals(text, "DECOY")) return ExplanationSource::kDecoy;
  throw Error(ErrorCode::kInvalidInput, fmt::format("unknown explanation source '{}'", text));
}

std::vector<LabelPath> study_categories(const GoldAnnotation& gold) {
  std::vector<LabelPath> out;
  for (const auto& p : gold.labels) {
    if (p.is_other() || text::iequals(p.head(), kPracticeNotCovered)) continue;
    out.push_back(p);
  }
  return out;
}

std::vector<Segment> sample_for_study(const Corpus& c, size_t n, uint64_t seed) {
  std::vector<size_t> eligible;
  for (size_t i = 0; i < c.segments.size(); ++i) {
    if (!study_categories(c.annotations[i]).empty()) eligible.push_back(i);
  }
  if (n > eligible.size()) {
    throw Error(ErrorCode::kPrecondition,
                fmt::format("asked for {} segments but only {} are eligible", n, eligible.size()));
  }
  DeterministicRng rng(seed);
  rng.shuffle(eligible);
  std::vector<Segment> out;
  for (size_t i = 0; i < n; ++i) out.push_back(c.segments[eligible[i]]);
  return out;
}

GenerationConfig default_explanation_config() {
  GenerationConfig cfg;
  cfg.temperature = 0.6;
  cfg.top_p = 0.9;
  return cfg;
}

ExplanationItem explain(const Segment& seg, const std::vector<LabelPath>& labels, const Taxonomy& t,
                        Gateway& gw, const GenerationConfig& cfg, std::string_view model) {
  const RenderedPrompt prompt = render_explanation_prompt(t, seg, labels);
  ChatRequest req;
  req.model = std::string(model);
  req.config = cfg;
  req.messages = {{"system", prompt.system_text}, {"user", prompt.user_text}};
  req.tag.segment_id = seg.id;
  req.tag.purpose = "explain";
  req.tag.kind = "EXPLAIN";
  const ChatExchange x = gw.complete(req);
  if (text::trim(x.response_text).empty()) {
    throw Error(ErrorCode::kUnparseableOutput, fmt::format("empty explanation for segment '{}'", seg.id));
  }
  ExplanationItem item;
  item.segment_id = seg.id;
  item.segment_text = seg.text;
  item.categories = labels;
  std::sort(item.categories.begin(), item.categories.end());
  item.explanation_text = x.response_text;
  item.source = ExplanationSource::kModel;
  return item;
}

std::vector<ExplanationItem> load_decoys(const std::filesystem::path& path, const Corpus& c,
                                         const Taxonomy& t) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open decoys '{}'", path.string()));
  std::vector<ExplanationItem> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    ExplanationItem item;
    try {
      const json j = json::parse(line);
      item.segment_id = j.at("segment_id").get<std::string>();
      item.explanation_text = j.at("text").get<std::string>();
      for (const auto& cat : j.at("categories")) item.categories.push_back(t.parse_label_path(cat.get<std::string>()));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
    const Segment* seg = c.find(item.segment_id);
    if (!seg) {
      throw Error(ErrorCode::kNotFound,
                  fmt::format("{}:{}: decoy names unknown segment '{}'", path.string(), lineno, item.segment_id));
    }
    if (item.categories.empty() || text::trim(item.explanation_text).empty()) {
      throw Error(ErrorCode::kMalformedRecord,
                  fmt::format("{}:{}: decoy needs categories and text", path.string(), lineno));
    }
    std::sort(item.categories.begin(), item.categories.end());
    item.segment_text = seg->text;
    item.source = ExplanationSource::kDecoy;
    out.push_back(std::move(item));
  }
  return out;
}

std::vector<ExplanationItem> assemble_batch(std::vector<ExplanationItem> model_items,
                                            std::vector<ExplanationItem> decoys, uint64_t seed) {
  std::vector<ExplanationItem> batch = std::move(model_items);
  std::move(decoys.begin(), decoys.end(), std::back_inserter(batch));
  DeterministicRng rng(seed);
  rng.shuffle(batch);
  for (size_t i = 0; i < batch.size(); ++i) batch[i].item_id = fmt::format("item-{:04d}", i + 1);
  return batch;
}

void write_batch(std::ostream& out, const std::vector<ExplanationItem>& batch) {
  for (const auto& item : batch) {
    ordered_json j;
    j["item_id"] = item.item_id;
    j["text"] = item.explanation_text;
    j["segment_text"] = item.segment_text;
    json cats = json::array();
    for (const auto& p : item.categories) cats.push_back(p.render());
    j["categories"] = cats;
    out << j.dump() << '\n';
  }
}

void write_batch(const std::filesystem::path& path, const std::vector<ExplanationItem>& batch) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", path.string()));
  write_batch(out, batch);
}

std::vector<ExplanationItem> read_batch(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open batch '{}'", path.string()));
  std::vector<ExplanationItem> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      ExplanationItem item;
      item.item_id = j.at("item_id").get<std::string>();
      item.explanation_text = j.at("text").get<std::string>();
      item.segment_text = j.at("segment_text").get<std::string>();
      // Categories stay rendered; the batch is read without a taxonomy.
      for (const auto& c : j.at("categories")) {
        item.categories.push_back(LabelPath(text::split(c.get<std::string>(), '.')));
      }
      out.push_back(std::move(item));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return out;
}

void write_key(const std::filesystem::path& path, const std::vector<ExplanationItem>& batch) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", path.string()));
  for (const auto& item : batch) {
    ordered_json j;
    j["item_id"] = item.item_id;
    j["source"] = std::string(to_string(item.source));
    j["segment_id"] = item.segment_id;
    out << j.dump() << '\n';
  }
}

}  // namespace ppx
