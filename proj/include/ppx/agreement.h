#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "ppx/explainer.h"

namespace ppx {

enum class Metric { kCompleteness, kLogicality, kComprehensibility };

inline constexpr std::array<Metric, 3> kAllMetrics = {Metric::kCompleteness, Metric::kLogicality,
                                                      Metric::kComprehensibility};

std::string_view to_string(Metric m);
Metric parse_metric(std::string_view text);

struct Rating {
  std::string annotator_id;
  std::string item_id;
  int completeness = 0;
  int logicality = 0;
  int comprehensibility = 0;
  std::string timestamp;

  int score(Metric m) const;
  bool same_scores(const Rating& o) const;
};

// Throws kInvalidInput for empty ids or scores outside {1,2,3}.
void validate_rating(const Rating& r);

nlohmann::ordered_json to_json(const Rating& r);
Rating rating_from_json(const nlohmann::json& j);

// One record per line. Exact duplicates collapse; a second, different rating
// for the same (annotator, item) is a kConflict error.
std::vector<Rating> read_ratings(const std::filesystem::path& path);

// Append-only rating store. Submissions are serialized and flushed before
// returning, so readers of the file see them immediately.
class RatingJournal {
 public:
  enum class Outcome { kAccepted, kDuplicate };

  explicit RatingJournal(std::filesystem::path path);

  Outcome submit(const Rating& r);  // throws kInvalidInput / kConflict
  std::vector<Rating> snapshot() const;
  bool has(std::string_view annotator, std::string_view item) const;
  size_t count_for(std::string_view annotator) const;

 private:
  std::filesystem::path path_;
  mutable std::mutex mutex_;
  std::vector<Rating> ratings_;
  std::map<std::pair<std::string, std::string>, size_t> index_;
};

using UnblindingKey = std::map<std::string, ExplanationSource>;
UnblindingKey read_key(const std::filesystem::path& path);

struct ScoreTable {
  struct Row {
    std::array<double, 3> mean{};
    size_t items = 0;   // rated items
    size_t scores = 0;  // contributing scores per metric
  };
  std::map<ExplanationSource, Row> rows;
  std::vector<std::string> coverage_gaps;  // keyed items without any rating
};

// Throws kNotFound when a rated item is missing from the key.
ScoreTable average_scores(const std::vector<Rating>& ratings, const UnblindingKey& key);

// Source rows (MODEL, DECOY) × metric columns, two decimals.
std::string format_score_table(const ScoreTable& table);

struct KappaResult {
  Metric metric = Metric::kCompleteness;
  double kappa = 0;
  size_t n_items = 0;
  size_t n_raters = 0;
  bool degenerate = false;  // chance agreement was 1; kappa defined as 1
  std::vector<std::string> excluded_items;
};

// Fleiss' kappa over categories {1,2,3}. The rater count is the largest seen
// on any item; items with fewer ratings are excluded, or rejected with
// kUnequalRaters under `strict`.
KappaResult fleiss_kappa(const std::vector<Rating>& ratings, Metric metric, bool strict = false);

}  // namespace ppx
