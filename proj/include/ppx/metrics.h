#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppx/errors.h"
#include "ppx/taxonomy.h"

namespace ppx {

struct ConfusionCounts {
  std::string label;
  size_t tp = 0;
  size_t fp = 0;
  size_t fn = 0;

  size_t support() const { return tp + fn; }
};

struct Prf {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct LabelScore {
  ConfusionCounts counts;
  Prf prf;
};

struct LabelReport {
  std::vector<LabelScore> labels;
  Prf macro;
  Prf micro;
};

using LabelSets = std::map<std::string, std::set<std::string>>;

// Throws kIdMismatch unless gold and pred cover the same ids.
std::vector<ConfusionCounts> confusion(const LabelSets& gold, const LabelSets& pred,
                                       const std::vector<std::string>& labels);

// 0/0 counts as 0 throughout.
Prf prf(const ConfusionCounts& c);
Prf prf(size_t tp, size_t fp, size_t fn);

// Arithmetic mean of each component.
Prf macro_average(const std::vector<Prf>& per_label);

LabelReport aggregate(const std::vector<ConfusionCounts>& counts);

enum class LabelMode {
  kLevel1,  // level-1 names only
  kAll,     // level-1 names plus every cascaded code
};

// Projects label paths to the scored label strings.
std::set<std::string> expand_labels(const std::vector<LabelPath>& paths, LabelMode mode);

// Scored labels in taxonomy declaration order, optionally with OTHER last.
std::vector<std::string> label_universe(const Taxonomy& t, LabelMode mode, int max_depth,
                                        bool include_other);

nlohmann::ordered_json report_to_json(const LabelReport& r);
LabelReport report_from_json(const nlohmann::json& j);
LabelReport read_report(const std::filesystem::path& path);
void write_report(const std::filesystem::path& path, const LabelReport& r);

// Aligned table: label rows with P/R/F1/Support, then Macro and Micro rows.
std::string format_report(const LabelReport& r);

}  // namespace ppx
