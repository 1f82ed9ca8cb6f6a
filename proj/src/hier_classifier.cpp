#include "ppx/hier_classifier.h"

#include <algorithm>
#include <atomic>
#include <fmt/format.h>
#include <fstream>
#include <mutex>
#include <optional>
#include <json.hpp>
#include <thread>

#include "ppx/text_util.h"

namespace ppx {

using nlohmann::json;

int default_max_depth(std::string_view taxonomy_name) {
  const std::string n = text::to_lower(taxonomy_name);
  if (n == "goppc150") return 2;
  if (n == "appcp100") return 3;
  return 1;
}

namespace {

struct Walk {
  const Segment& seg;
  const Taxonomy& t;
  const ExampleBank& bank;
  Gateway& gw;
  const ClassifierSettings& s;
  ClassificationResult& out;

  // Returns the labels chosen among `path`'s children, or nullopt for OTHER.
  std::optional<std::vector<std::string>> ask(const LabelPath& path) {
    const auto candidates = t.children_of(path);
    const int level = static_cast<int>(path.depth()) + 1;
    std::optional<LabelPath> parent;
    if (!path.is_root()) parent = path;
    const RenderedPrompt prompt =
        render_classification_prompt(s.kind, t, candidates, seg, parent, bank);

    ChatRequest req;
    req.model = s.model;
    req.config = s.config;
    req.messages = {{"system", prompt.system_text}, {"user", prompt.user_text}};
    req.tag.cell = s.cell;
    req.tag.segment_id = seg.id;
    req.tag.level = level;
    req.tag.parent = path.is_root() ? "" : path.render();
    req.tag.kind = std::string(to_string(s.kind));

    std::vector<std::string> allowed;
    for (const auto* n : candidates) allowed.push_back(n->name);
    LabelAnswer answer = ask_labels(gw, req, allowed, reask_instruction(seg.lang), &out.exchanges);
    for (auto& u : answer.labels.unknown_mentions) out.unknown_mentions.push_back(std::move(u));
    if (answer.labels.is_other) return std::nullopt;
    return answer.labels.recognized;
  }

  void descend(const LabelPath& path) {
    auto chosen = ask(path);
    if (!chosen) {
      out.predicted.push_back(path.is_root() ? LabelPath::other() : path);
      return;
    }
    for (const auto& name : *chosen) {
      LabelPath next = path.child(name);
      const bool can_descend = static_cast<int>(next.depth()) < s.max_depth &&
                               !t.node_at(next).children.empty();
      if (can_descend) {
        descend(next);
      } else {
        out.predicted.push_back(std::move(next));
      }
    }
  }
};

}  // namespace

ClassificationResult classify_segment(const Segment& seg, const Taxonomy& t, const ExampleBank& bank,
                                      Gateway& gw, const ClassifierSettings& settings) {
  if (settings.max_depth < 1 || settings.max_depth > t.max_level()) {
    throw Error(ErrorCode::kPrecondition,
                fmt::format("max_depth {} outside 1..{} for taxonomy '{}'", settings.max_depth,
                            t.max_level(), t.name()));
  }
  ClassificationResult out;
  out.segment_id = seg.id;
  Walk walk{seg, t, bank, gw, settings, out};
  try {
    walk.descend(LabelPath::root());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kExemplarShortfall || e.code() == ErrorCode::kEmptySegment ||
        e.code() == ErrorCode::kPrecondition) {
      throw;
    }
    out.failed = true;
    out.error = e.what();
    out.predicted.clear();
  }
  std::sort(out.predicted.begin(), out.predicted.end());
  out.predicted.erase(std::unique(out.predicted.begin(), out.predicted.end()), out.predicted.end());
  return out;
}

std::vector<ClassificationResult> classify_corpus(const Corpus& c, std::string_view split,
                                                  const Taxonomy& t, const ExampleBank& bank,
                                                  Gateway& gw, const ClassifierSettings& settings,
                                                  int parallelism) {
  const std::vector<size_t> selected = c.select(split);
  std::vector<ClassificationResult> results(selected.size());
  std::atomic<size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < selected.size(); i = next.fetch_add(1)) {
      try {
        results[i] = classify_segment(c.segments[selected[i]], t, bank, gw, settings);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        next.store(selected.size());
      }
    }
  };
  const int n = std::clamp(parallelism, 1, std::max<int>(1, static_cast<int>(selected.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int k = 0; k < n; ++k) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);
  std::sort(results.begin(), results.end(),
            [](const auto& a, const auto& b) { return a.segment_id < b.segment_id; });
  return results;
}

void write_predictions(std::ostream& out, const std::vector<ClassificationResult>& results) {
  for (const auto& r : results) {
    json paths = json::array();
    for (const auto& p : r.predicted) paths.push_back(p.render());
    nlohmann::ordered_json j;
    j["id"] = r.segment_id;
    j["predicted"] = std::move(paths);
    j["failed"] = r.failed;
    out << j.dump() << '\n';
  }
}

void write_predictions(const std::filesystem::path& path,
                       const std::vector<ClassificationResult>& results) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", path.string()));
  write_predictions(out, results);
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path, const Taxonomy& t) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open predictions '{}'", path.string()));
  std::vector<PredictionRecord> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      PredictionRecord r;
      r.id = j.at("id").get<std::string>();
      r.failed = j.value("failed", false);
      for (const auto& p : j.at("predicted")) r.predicted.push_back(t.parse_label_path(p.get<std::string>()));
      out.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord,
                  fmt::format("{}:{}: malformed prediction: {}", path.string(), lineno, e.what()));
    }
  }
  return out;
}

}  // namespace ppx
