#include "ppx/metrics.h"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>

#include "ppx/text_util.h"

namespace ppx {

std::vector<ConfusionCounts> confusion(const LabelSets& gold, const LabelSets& pred,
                                       const std::vector<std::string>& labels) {
  auto describe_missing = [](const LabelSets& a, const LabelSets& b) -> std::string {
    for (const auto& [id, _] : a) {
      if (!b.count(id)) return id;
    }
    return {};
  };
  if (const auto id = describe_missing(gold, pred); !id.empty()) {
    throw Error(ErrorCode::kIdMismatch, fmt::format("segment '{}' has gold labels but no prediction", id));
  }
  if (const auto id = describe_missing(pred, gold); !id.empty()) {
    throw Error(ErrorCode::kIdMismatch, fmt::format("segment '{}' has a prediction but no gold labels", id));
  }
  std::vector<ConfusionCounts> out;
  out.reserve(labels.size());
  for (const auto& label : labels) {
    ConfusionCounts c{label};
    for (const auto& [id, g] : gold) {
      const bool in_gold = g.count(label) > 0;
      const bool in_pred = pred.at(id).count(label) > 0;
      if (in_gold && in_pred) ++c.tp;
      else if (in_pred) ++c.fp;
      else if (in_gold) ++c.fn;
    }
    out.push_back(std::move(c));
  }
  return out;
}

Prf prf(size_t tp, size_t fp, size_t fn) {
  Prf r;
  r.precision = tp + fp == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
  r.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  r.f1 = r.precision + r.recall == 0 ? 0.0 : 2 * r.precision * r.recall / (r.precision + r.recall);
  return r;
}

Prf prf(const ConfusionCounts& c) { return prf(c.tp, c.fp, c.fn); }

Prf macro_average(const std::vector<Prf>& per_label) {
  Prf m;
  if (per_label.empty()) return m;
  for (const auto& p : per_label) {
    m.precision += p.precision;
    m.recall += p.recall;
    m.f1 += p.f1;
  }
  const double n = static_cast<double>(per_label.size());
  m.precision /= n;
  m.recall /= n;
  m.f1 /= n;
  return m;
}

LabelReport aggregate(const std::vector<ConfusionCounts>& counts) {
  if (counts.empty()) throw Error(ErrorCode::kPrecondition, "aggregate needs at least one label");
  LabelReport r;
  std::vector<Prf> per;
  size_t tp = 0, fp = 0, fn = 0;
  for (const auto& c : counts) {
    r.labels.push_back({c, prf(c)});
    per.push_back(r.labels.back().prf);
    tp += c.tp;
    fp += c.fp;
    fn += c.fn;
  }
  r.macro = macro_average(per);
  r.micro = prf(tp, fp, fn);
  return r;
}

std::set<std::string> expand_labels(const std::vector<LabelPath>& paths, LabelMode mode) {
  std::set<std::string> out;
  for (const auto& p : paths) {
    if (p.is_root()) continue;
    if (mode == LabelMode::kLevel1 || p.is_other()) {
      out.insert(p.head());
      continue;
    }
    for (size_t d = 1; d <= p.depth(); ++d) out.insert(p.prefix(d).render());
  }
  return out;
}

std::vector<std::string> label_universe(const Taxonomy& t, LabelMode mode, int max_depth,
                                        bool include_other) {
  std::vector<std::string> out;
  const int depth = mode == LabelMode::kLevel1 ? 1 : max_depth;
  for (const auto& p : t.all_paths(depth)) out.push_back(p.render());
  if (include_other) out.emplace_back(kOther);
  return out;
}

nlohmann::ordered_json report_to_json(const LabelReport& r) {
  auto prf_json = [](const Prf& p) {
    nlohmann::ordered_json j;
    j["precision"] = p.precision;
    j["recall"] = p.recall;
    j["f1"] = p.f1;
    return j;
  };
  nlohmann::ordered_json labels = nlohmann::ordered_json::array();
  for (const auto& s : r.labels) {
    nlohmann::ordered_json j;
    j["label"] = s.counts.label;
    j["tp"] = s.counts.tp;
    j["fp"] = s.counts.fp;
    j["fn"] = s.counts.fn;
    j["support"] = s.counts.support();
    j["precision"] = s.prf.precision;
    j["recall"] = s.prf.recall;
    j["f1"] = s.prf.f1;
    labels.push_back(std::move(j));
  }
  nlohmann::ordered_json j;
  j["labels"] = std::move(labels);
  j["macro"] = prf_json(r.macro);
  j["micro"] = prf_json(r.micro);
  return j;
}

LabelReport report_from_json(const nlohmann::json& j) {
  std::vector<ConfusionCounts> counts;
  for (const auto& row : j.at("labels")) {
    counts.push_back({row.at("label").get<std::string>(), row.at("tp").get<size_t>(),
                      row.at("fp").get<size_t>(), row.at("fn").get<size_t>()});
  }
  return aggregate(counts);
}

LabelReport read_report(const std::filesystem::path& path) {
  try {
    return report_from_json(nlohmann::json::parse(text::read_file(path.string())));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::kMalformedRecord, fmt::format("{}: malformed report: {}", path.string(), e.what()));
  }
}

void write_report(const std::filesystem::path& path, const LabelReport& r) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", path.string()));
  out << report_to_json(r).dump(2) << '\n';
}

std::string format_report(const LabelReport& r) {
  size_t width = std::string_view("Macro Average").size();
  for (const auto& s : r.labels) width = std::max(width, s.counts.label.size());
  std::string out = fmt::format("{:<{}}  {:>9}  {:>9}  {:>9}  {:>7}\n", "Category", width,
                                "Precision", "Recall", "F1", "Support");
  for (const auto& s : r.labels) {
    out += fmt::format("{:<{}}  {:>9.3f}  {:>9.3f}  {:>9.3f}  {:>7}\n", s.counts.label, width,
                       s.prf.precision, s.prf.recall, s.prf.f1, s.counts.support());
  }
  out += fmt::format("{:<{}}  {:>9.3f}  {:>9.3f}  {:>9.3f}\n", "Macro Average", width,
                     r.macro.precision, r.macro.recall, r.macro.f1);
  out += fmt::format("{:<{}}  {:>9.3f}  {:>9.3f}  {:>9.3f}\n", "Micro Average", width,
                     r.micro.precision, r.micro.recall, r.micro.f1);
  return out;
}

}  // namespace ppx
