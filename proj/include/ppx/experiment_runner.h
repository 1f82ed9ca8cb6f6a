#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ppx/llm_gateway.h"
#include "ppx/metrics.h"
#include "ppx/prompt_forge.h"

namespace ppx {

struct NamedConfig {
  std::string name;  // e.g. "Greedy", "T=0.3"
  GenerationConfig config;
};

struct ExperimentPlan {
  std::string name;
  std::filesystem::path corpus;
  std::filesystem::path taxonomy;
  std::filesystem::path bank;  // optional for TASK_ONLY / WITH_DEFINITIONS
  std::string split = "test";
  std::string endpoint;
  std::string model = "default";
  int max_depth = 0;  // 0 = taxonomy default
  uint64_t seed = 0;
  std::vector<PromptKind> kinds;
  std::vector<NamedConfig> configs;
  std::optional<LabelMode> label_mode;  // default: level1 at depth 1, all otherwise
  bool include_other = false;
};

// Relative paths inside the plan resolve against `base_dir`.
ExperimentPlan parse_plan(std::string_view document, std::string_view source = "<memory>",
                          const std::filesystem::path& base_dir = {});
ExperimentPlan load_plan(const std::filesystem::path& path, const std::filesystem::path& base_dir = {});

std::string cell_name(PromptKind kind, std::string_view config_name);

struct RunOptions {
  std::filesystem::path out_dir;
  std::shared_ptr<Backend> backend;
  GatewayOptions gateway;
  Gateway::Sleeper sleeper;
  int parallelism = 1;
};

struct CellOutcome {
  std::string name;
  PromptKind kind = PromptKind::kTaskOnly;
  std::string config_name;
  bool ok = false;  // false when the cell could not run at all
  std::string error;
  size_t segments = 0;
  size_t failed_segments = 0;
  size_t calls = 0;
  LabelReport report;
};

struct RunSummary {
  std::vector<CellOutcome> cells;

  bool partial_failure() const;
};

// Layout:
//   <out>/cells/<KIND>__<config>/{predictions.jsonl,report.json,report.txt}
//   <out>/journal.jsonl
//   <out>/comparison.{txt,json}
RunSummary run_plan(const ExperimentPlan& plan, const RunOptions& options);

struct BaselineColumn {
  std::string name;
  std::string source;
  std::map<std::string, double> values;  // label or "Macro Average" / "Micro Average" → F1
};

struct BaselineFile {
  std::string name;
  std::vector<BaselineColumn> columns;
  std::map<std::string, std::vector<std::string>> subsets;
};

BaselineFile parse_baseline(std::string_view document, std::string_view source = "<memory>");
BaselineFile load_baseline(const std::filesystem::path& path);

inline constexpr std::string_view kMacroRow = "Macro Average";
inline constexpr std::string_view kMicroRow = "Micro Average";

struct ComparisonColumn {
  std::string name;
  bool baseline = false;
  std::map<std::string, double> values;
};

struct ComparisonTable {
  std::vector<std::string> rows;  // labels, then Macro Average and Micro Average
  std::vector<ComparisonColumn> columns;
  // F1 delta of each non-first report column against the first report column.
  std::map<std::string, std::map<std::string, double>> deltas;

  std::string format() const;
};

// Each input is a run directory, a cell directory, or a report.json file.
// Macro and micro values are recomputed from counts over `subset` when given.
ComparisonTable compare(const std::vector<std::filesystem::path>& inputs,
                        const BaselineFile* baseline,
                        const std::optional<std::vector<std::string>>& subset);

}  // namespace ppx
