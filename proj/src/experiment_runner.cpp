#include "ppx/experiment_runner.h"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <set>
#include <yaml-cpp/yaml.h>

#include "ppx/backends.h"
#include "ppx/corpus.h"
#include "ppx/hier_classifier.h"
#include "ppx/text_util.h"

namespace ppx {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

YAML::Node load_yaml(std::string_view document, std::string_view source) {
  try {
    return YAML::Load(std::string(document));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kInvalidInput, fmt::format("{}:{}: {}", source, e.mark.line + 1, e.msg));
  }
}

[[noreturn]] void plan_error(std::string_view source, const YAML::Node& n, std::string_view msg) {
  throw Error(ErrorCode::kInvalidInput, fmt::format("{}:{}: {}", source, n.Mark().line + 1, msg));
}

fs::path resolve(const fs::path& base, const std::string& p) {
  if (p.empty()) return {};
  fs::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

}  // namespace

ExperimentPlan parse_plan(std::string_view document, std::string_view source, const fs::path& base_dir) {
  const YAML::Node root = load_yaml(document, source);
  if (!root.IsMap()) throw Error(ErrorCode::kInvalidInput, fmt::format("{}: plan must be a mapping", source));
  ExperimentPlan plan;
  auto required = [&](const char* key) {
    if (!root[key]) plan_error(source, root, fmt::format("missing '{}'", key));
    return root[key].as<std::string>();
  };
  plan.name = root["name"] ? root["name"].as<std::string>() : std::string("plan");
  plan.corpus = resolve(base_dir, required("corpus"));
  plan.taxonomy = resolve(base_dir, required("taxonomy"));
  if (root["bank"]) plan.bank = resolve(base_dir, root["bank"].as<std::string>());
  if (root["split"]) plan.split = root["split"].as<std::string>();
  if (root["endpoint"]) plan.endpoint = root["endpoint"].as<std::string>();
  if (root["model"]) plan.model = root["model"].as<std::string>();
  if (root["max_depth"]) plan.max_depth = root["max_depth"].as<int>();
  if (root["seed"]) plan.seed = root["seed"].as<uint64_t>();
  if (root["include_other"]) plan.include_other = root["include_other"].as<bool>();
  if (const auto m = root["label_mode"]) {
    const std::string mode = text::to_lower(m.as<std::string>());
    if (mode == "level1") plan.label_mode = LabelMode::kLevel1;
    else if (mode == "all") plan.label_mode = LabelMode::kAll;
    else plan_error(source, m, fmt::format("label_mode must be 'level1' or 'all', got '{}'", mode));
  }

  for (const auto& k : root["kinds"]) {
    try {
      plan.kinds.push_back(parse_prompt_kind(k.as<std::string>()));
    } catch (const Error& e) {
      plan_error(source, k, e.what());
    }
  }
  for (const auto& c : root["configs"]) {
    NamedConfig nc;
    if (!c["name"]) plan_error(source, c, "config needs a 'name'");
    nc.name = c["name"].as<std::string>();
    auto& g = nc.config;
    if (c["greedy"]) g.greedy = c["greedy"].as<bool>();
    if (c["temperature"]) g.temperature = c["temperature"].as<double>();
    if (c["top_p"]) g.top_p = c["top_p"].as<double>();
    if (c["top_k"]) g.top_k = c["top_k"].as<int>();
    if (c["max_tokens"]) g.max_tokens = c["max_tokens"].as<int>();
    g.seed = c["seed"] ? c["seed"].as<int64_t>() : static_cast<int64_t>(plan.seed);
    try {
      g.validate();
    } catch (const Error& e) {
      plan_error(source, c, fmt::format("config '{}': {}", nc.name, e.what()));
    }
    plan.configs.push_back(std::move(nc));
  }
  if (plan.kinds.empty()) plan_error(source, root, "plan lists no prompt kinds");
  if (plan.configs.empty()) plan_error(source, root, "plan lists no generation configs");
  std::set<std::string> names;
  for (const auto& c : plan.configs) {
    if (!names.insert(c.name).second) plan_error(source, root, fmt::format("duplicate config name '{}'", c.name));
  }
  return plan;
}

ExperimentPlan load_plan(const fs::path& path, const fs::path& base_dir) {
  return parse_plan(text::read_file(path.string()), path.string(), base_dir);
}

std::string cell_name(PromptKind kind, std::string_view config_name) {
  return fmt::format("{}__{}", to_string(kind), config_name);
}

bool RunSummary::partial_failure() const {
  return std::any_of(cells.begin(), cells.end(),
                     [](const CellOutcome& c) { return !c.ok || c.failed_segments > 0; });
}

namespace {

void write_text(const fs::path& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, fmt::format("cannot write '{}'", path.string()));
  out << content;
}

std::string fmt3(double v) { return fmt::format("{:.3f}", v); }

// Label rows by prompt kind when there is one config; otherwise one row per
// cell with macro and micro F1.
void write_comparison(const fs::path& dir, const ExperimentPlan& plan, const RunSummary& summary) {
  ordered_json j;
  j["plan"] = plan.name;
  ordered_json cells = ordered_json::array();
  for (const auto& c : summary.cells) {
    ordered_json cj;
    cj["cell"] = c.name;
    cj["kind"] = std::string(to_string(c.kind));
    cj["config"] = c.config_name;
    cj["ok"] = c.ok;
    if (!c.ok) cj["error"] = c.error;
    cj["segments"] = c.segments;
    cj["failed_segments"] = c.failed_segments;
    cj["calls"] = c.calls;
    if (c.ok) {
      cj["macro_f1"] = c.report.macro.f1;
      cj["micro_f1"] = c.report.micro.f1;
    }
    cells.push_back(std::move(cj));
  }
  j["cells"] = std::move(cells);

  std::string table;
  if (plan.configs.size() == 1) {
    std::vector<const CellOutcome*> cols;
    for (const auto& c : summary.cells) cols.push_back(&c);
    std::vector<std::string> labels;
    for (const auto& c : summary.cells) {
      if (!c.ok) continue;
      for (const auto& s : c.report.labels) labels.push_back(s.counts.label);
      break;
    }
    size_t width = kMacroRow.size();
    for (const auto& l : labels) width = std::max(width, l.size());
    std::vector<size_t> col_width;
    table += fmt::format("{:<{}}", "Category", width);
    for (const auto* c : cols) {
      const std::string head(to_string(c->kind));
      col_width.push_back(std::max<size_t>(head.size(), 6));
      table += fmt::format("  {:>{}}", head, col_width.back());
    }
    table += '\n';
    auto row = [&](std::string_view label, auto value_of) {
      table += fmt::format("{:<{}}", label, width);
      for (size_t i = 0; i < cols.size(); ++i) {
        table += fmt::format("  {:>{}}", cols[i]->ok ? fmt3(value_of(*cols[i])) : "-", col_width[i]);
      }
      table += '\n';
    };
    for (size_t li = 0; li < labels.size(); ++li) {
      row(labels[li], [&](const CellOutcome& c) { return c.report.labels[li].prf.f1; });
    }
    row(kMacroRow, [](const CellOutcome& c) { return c.report.macro.f1; });
    row(kMicroRow, [](const CellOutcome& c) { return c.report.micro.f1; });
  } else {
    const bool single_kind = plan.kinds.size() == 1;
    size_t width = std::string_view("Setting").size();
    for (const auto& c : summary.cells) width = std::max(width, (single_kind ? c.config_name : c.name).size());
    table += fmt::format("{:<{}}  {:>13}  {:>13}\n", "Setting", width, kMacroRow, kMicroRow);
    for (const auto& c : summary.cells) {
      table += fmt::format("{:<{}}  {:>13}  {:>13}\n", single_kind ? c.config_name : c.name, width,
                           c.ok ? fmt3(c.report.macro.f1) : "-", c.ok ? fmt3(c.report.micro.f1) : "-");
    }
  }
  for (const auto& c : summary.cells) {
    if (!c.ok) table += fmt::format("cell {} failed: {}\n", c.name, c.error);
    else if (c.failed_segments) table += fmt::format("cell {}: {} segment(s) failed\n", c.name, c.failed_segments);
  }
  write_text(dir / "comparison.txt", table);
  write_text(dir / "comparison.json", j.dump(2) + "\n");
}

}  // namespace

RunSummary run_plan(const ExperimentPlan& plan, const RunOptions& options) {
  if (!options.backend) throw Error(ErrorCode::kPrecondition, "run_plan needs a backend");
  const Taxonomy t = Taxonomy::load(plan.taxonomy);
  const Corpus corpus = load_corpus(plan.corpus, t);
  const ExampleBank bank = plan.bank.empty() ? ExampleBank{} : ExampleBank::load(plan.bank);
  const int depth = plan.max_depth > 0 ? plan.max_depth : std::min(default_max_depth(t.name()), t.max_level());
  const LabelMode mode = plan.label_mode.value_or(depth == 1 ? LabelMode::kLevel1 : LabelMode::kAll);
  const auto universe = label_universe(t, mode, depth, plan.include_other);

  LabelSets gold;
  for (size_t idx : corpus.select(plan.split)) {
    gold[corpus.segments[idx].id] = expand_labels(corpus.annotations[idx].labels, mode);
  }

  fs::create_directories(options.out_dir / "cells");
  Gateway gw(options.backend, options.gateway, options.sleeper);
  RunSummary summary;

  for (PromptKind kind : plan.kinds) {
    for (const auto& cfg : plan.configs) {
      CellOutcome cell;
      cell.name = cell_name(kind, cfg.name);
      cell.kind = kind;
      cell.config_name = cfg.name;
      const fs::path dir = options.out_dir / "cells" / cell.name;
      fs::create_directories(dir);
      ClassifierSettings settings{kind, cfg.config, depth, plan.model, cell.name};
      const size_t calls_before = gw.call_count();
      try {
        const auto results = classify_corpus(corpus, plan.split, t, bank, gw, settings, options.parallelism);
        LabelSets pred;
        for (const auto& r : results) {
          if (r.failed) {
            ++cell.failed_segments;
            pred[r.segment_id] = {};
          } else {
            pred[r.segment_id] = expand_labels(r.predicted, mode);
          }
        }
        cell.segments = results.size();
        cell.report = aggregate(confusion(gold, pred, universe));
        write_predictions(dir / "predictions.jsonl", results);
        write_report(dir / "report.json", cell.report);
        write_text(dir / "report.txt", format_report(cell.report));
        cell.ok = true;
      } catch (const Error& e) {
        cell.ok = false;
        cell.error = e.what();
        write_text(dir / "error.txt", cell.error + "\n");
      }
      cell.calls = gw.call_count() - calls_before;
      summary.cells.push_back(std::move(cell));
    }
  }

  {
    std::ofstream out(options.out_dir / "journal.jsonl", std::ios::binary);
    if (!out) throw Error(ErrorCode::kIo, "cannot write journal");
    gw.write_journal(out);
  }
  write_comparison(options.out_dir, plan, summary);
  return summary;
}

BaselineFile parse_baseline(std::string_view document, std::string_view source) {
  const YAML::Node root = load_yaml(document, source);
  BaselineFile b;
  if (!root.IsMap()) throw Error(ErrorCode::kInvalidInput, fmt::format("{}: baseline must be a mapping", source));
  b.name = root["name"] ? root["name"].as<std::string>() : std::string("baseline");
  for (const auto& c : root["columns"]) {
    BaselineColumn col;
    if (!c["name"] || !c["values"]) plan_error(source, c, "baseline column needs 'name' and 'values'");
    col.name = c["name"].as<std::string>();
    if (c["source"]) col.source = c["source"].as<std::string>();
    for (const auto& kv : c["values"]) col.values[kv.first.as<std::string>()] = kv.second.as<double>();
    b.columns.push_back(std::move(col));
  }
  for (const auto& kv : root["subsets"]) {
    std::vector<std::string> labels;
    for (const auto& l : kv.second) labels.push_back(l.as<std::string>());
    b.subsets[kv.first.as<std::string>()] = std::move(labels);
  }
  return b;
}

BaselineFile load_baseline(const fs::path& path) {
  return parse_baseline(text::read_file(path.string()), path.string());
}

namespace {

std::vector<std::pair<std::string, fs::path>> find_reports(const fs::path& input) {
  std::vector<std::pair<std::string, fs::path>> out;
  if (fs::is_regular_file(input)) {
    out.emplace_back(input.parent_path().filename().string(), input);
  } else if (fs::exists(input / "report.json")) {
    out.emplace_back(input.filename().string(), input / "report.json");
  } else if (fs::is_directory(input / "cells")) {
    std::vector<fs::path> cells;
    for (const auto& e : fs::directory_iterator(input / "cells")) {
      if (fs::exists(e.path() / "report.json")) cells.push_back(e.path());
    }
    std::sort(cells.begin(), cells.end());
    for (const auto& c : cells) out.emplace_back(c.filename().string(), c / "report.json");
  } else {
    throw Error(ErrorCode::kNotFound,
                fmt::format("'{}' is not a report, cell directory, or run directory", input.string()));
  }
  return out;
}

}  // namespace

ComparisonTable compare(const std::vector<fs::path>& inputs, const BaselineFile* baseline,
                        const std::optional<std::vector<std::string>>& subset) {
  std::vector<std::pair<std::string, LabelReport>> reports;
  for (const auto& in : inputs) {
    for (auto& [name, path] : find_reports(in)) reports.emplace_back(name, read_report(path));
  }
  if (reports.empty()) throw Error(ErrorCode::kNotFound, "no reports to compare");

  auto label_set = [](const LabelReport& r) {
    std::vector<std::string> out;
    for (const auto& s : r.labels) out.push_back(s.counts.label);
    return out;
  };
  const std::vector<std::string> first_labels = label_set(reports.front().second);
  std::vector<std::string> rows;
  if (subset) {
    for (const auto& label : *subset) {
      for (const auto& [name, r] : reports) {
        const auto ls = label_set(r);
        if (std::find(ls.begin(), ls.end(), label) == ls.end()) {
          throw Error(ErrorCode::kLabelSetMismatch,
                      fmt::format("subset label '{}' is missing from report '{}'", label, name));
        }
      }
    }
    rows = *subset;
  } else {
    const std::set<std::string> expected(first_labels.begin(), first_labels.end());
    for (const auto& [name, r] : reports) {
      const auto ls = label_set(r);
      if (std::set<std::string>(ls.begin(), ls.end()) != expected) {
        throw Error(ErrorCode::kLabelSetMismatch,
                    fmt::format("report '{}' scores a different label set than '{}'; declare a common "
                                "subset to compare them",
                                name, reports.front().first));
      }
    }
    rows = first_labels;
  }

  ComparisonTable table;
  table.rows = rows;
  table.rows.emplace_back(kMacroRow);
  table.rows.emplace_back(kMicroRow);

  std::set<std::string> used_names;
  for (auto& [name, r] : reports) {
    std::vector<ConfusionCounts> counts;
    for (const auto& label : rows) {
      for (const auto& s : r.labels) {
        if (s.counts.label == label) counts.push_back(s.counts);
      }
    }
    const LabelReport sub = aggregate(counts);
    ComparisonColumn col;
    col.name = name;
    for (int k = 2; !used_names.insert(col.name).second; ++k) col.name = fmt::format("{}#{}", name, k);
    for (const auto& s : sub.labels) col.values[s.counts.label] = s.prf.f1;
    col.values[std::string(kMacroRow)] = sub.macro.f1;
    col.values[std::string(kMicroRow)] = sub.micro.f1;
    table.columns.push_back(std::move(col));
  }
  const ComparisonColumn& ref = table.columns.front();
  for (size_t i = 1; i < table.columns.size(); ++i) {
    auto& d = table.deltas[table.columns[i].name];
    for (const auto& row : table.rows) d[row] = table.columns[i].values.at(row) - ref.values.at(row);
  }
  if (baseline) {
    for (const auto& bc : baseline->columns) {
      ComparisonColumn col;
      col.name = bc.name;
      col.baseline = true;
      for (const auto& row : table.rows) {
        if (auto it = bc.values.find(row); it != bc.values.end()) col.values[row] = it->second;
      }
      table.columns.push_back(std::move(col));
    }
  }
  return table;
}

std::string ComparisonTable::format() const {
  size_t width = std::string_view("Category").size();
  for (const auto& r : rows) width = std::max(width, r.size());
  std::vector<std::string> heads;
  for (const auto& c : columns) {
    heads.push_back(c.baseline ? c.name + " [baseline]" : c.name);
    if (auto it = deltas.find(c.name); it != deltas.end()) heads.push_back("delta " + c.name);
  }
  std::string out = fmt::format("{:<{}}", "Category", width);
  for (const auto& h : heads) out += fmt::format("  {:>{}}", h, std::max<size_t>(h.size(), 6));
  out += '\n';
  for (const auto& row : rows) {
    out += fmt::format("{:<{}}", row, width);
    size_t hi = 0;
    for (const auto& c : columns) {
      auto it = c.values.find(row);
      out += fmt::format("  {:>{}}", it == c.values.end() ? std::string("-") : fmt::format("{:.3f}", it->second),
                         std::max<size_t>(heads[hi++].size(), 6));
      if (auto d = deltas.find(c.name); d != deltas.end()) {
        out += fmt::format("  {:>{}}", fmt::format("{:+.3f}", d->second.at(row)),
                           std::max<size_t>(heads[hi++].size(), 6));
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace ppx
