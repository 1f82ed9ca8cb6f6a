#include "ppx/agreement.h"

#include <algorithm>
#include <fmt/format.h>
#include <fstream>
#include <set>

#include "ppx/text_util.h"

namespace ppx {

using nlohmann::json;

std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::kCompleteness: return "completeness";
    case Metric::kLogicality: return "logicality";
    case Metric::kComprehensibility: return "comprehensibility";
  }
  return "?";
}

Metric parse_metric(std::string_view text) {
  for (Metric m : kAllMetrics) {
    if (text::iequals(text, to_string(m))) return m;
  }
  throw Error(ErrorCode::kInvalidInput, fmt::format("unknown metric '{}'", text));
}

int Rating::score(Metric m) const {
  switch (m) {
    case Metric::kCompleteness: return completeness;
    case Metric::kLogicality: return logicality;
    case Metric::kComprehensibility: return comprehensibility;
  }
  return 0;
}

bool Rating::same_scores(const Rating& o) const {
  return completeness == o.completeness && logicality == o.logicality &&
         comprehensibility == o.comprehensibility;
}

void validate_rating(const Rating& r) {
  if (text::trim(r.annotator_id).empty()) throw Error(ErrorCode::kInvalidInput, "annotator id is empty");
  if (text::trim(r.item_id).empty()) throw Error(ErrorCode::kInvalidInput, "item id is empty");
  for (Metric m : kAllMetrics) {
    const int s = r.score(m);
    if (s < 1 || s > 3) {
      throw Error(ErrorCode::kInvalidInput, fmt::format("{} score {} is outside 1..3", to_string(m), s));
    }
  }
}

nlohmann::ordered_json to_json(const Rating& r) {
  nlohmann::ordered_json j;
  j["annotator_id"] = r.annotator_id;
  j["item_id"] = r.item_id;
  j["completeness"] = r.completeness;
  j["logicality"] = r.logicality;
  j["comprehensibility"] = r.comprehensibility;
  j["timestamp"] = r.timestamp;
  return j;
}

Rating rating_from_json(const json& j) {
  Rating r;
  auto score = [&](const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number_integer()) throw Error(ErrorCode::kInvalidInput, fmt::format("'{}' must be an integer", key));
    return v.get<int>();
  };
  try {
    r.annotator_id = j.at("annotator_id").get<std::string>();
    r.item_id = j.at("item_id").get<std::string>();
    r.completeness = score("completeness");
    r.logicality = score("logicality");
    r.comprehensibility = score("comprehensibility");
    r.timestamp = j.value("timestamp", "");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidInput, fmt::format("malformed rating: {}", e.what()));
  }
  return r;
}

namespace {

// Adds r unless it duplicates an earlier rating; returns false for duplicates.
bool merge(std::vector<Rating>& ratings, std::map<std::pair<std::string, std::string>, size_t>& index,
           const Rating& r) {
  auto key = std::make_pair(r.annotator_id, r.item_id);
  if (auto it = index.find(key); it != index.end()) {
    if (ratings[it->second].same_scores(r)) return false;
    throw Error(ErrorCode::kConflict,
                fmt::format("annotator '{}' already rated item '{}' with different scores", r.annotator_id,
                            r.item_id));
  }
  index.emplace(std::move(key), ratings.size());
  ratings.push_back(r);
  return true;
}

}  // namespace

std::vector<Rating> read_ratings(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open ratings '{}'", path.string()));
  std::vector<Rating> out;
  std::map<std::pair<std::string, std::string>, size_t> index;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      Rating r = rating_from_json(json::parse(line));
      validate_rating(r);
      merge(out, index, r);
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    } catch (const Error& e) {
      throw Error(e.code(), fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return out;
}

RatingJournal::RatingJournal(std::filesystem::path path) : path_(std::move(path)) {
  if (std::filesystem::exists(path_)) {
    for (const auto& r : read_ratings(path_)) merge(ratings_, index_, r);
  }
}

RatingJournal::Outcome RatingJournal::submit(const Rating& r) {
  validate_rating(r);
  std::lock_guard lock(mutex_);
  if (!merge(ratings_, index_, r)) return Outcome::kDuplicate;
  std::ofstream out(path_, std::ios::app | std::ios::binary);
  out << to_json(r).dump() << '\n';
  out.flush();
  if (!out) {
    index_.erase({r.annotator_id, r.item_id});
    ratings_.pop_back();
    throw Error(ErrorCode::kIo, fmt::format("cannot append to '{}'", path_.string()));
  }
  return Outcome::kAccepted;
}

std::vector<Rating> RatingJournal::snapshot() const {
  std::lock_guard lock(mutex_);
  return ratings_;
}

bool RatingJournal::has(std::string_view annotator, std::string_view item) const {
  std::lock_guard lock(mutex_);
  return index_.count({std::string(annotator), std::string(item)}) > 0;
}

size_t RatingJournal::count_for(std::string_view annotator) const {
  std::lock_guard lock(mutex_);
  return std::count_if(ratings_.begin(), ratings_.end(),
                       [&](const Rating& r) { return r.annotator_id == annotator; });
}

UnblindingKey read_key(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open key '{}'", path.string()));
  UnblindingKey key;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (text::trim(line).empty()) continue;
    try {
      const json j = json::parse(line);
      key[j.at("item_id").get<std::string>()] = parse_explanation_source(j.at("source").get<std::string>());
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformedRecord, fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return key;
}

ScoreTable average_scores(const std::vector<Rating>& ratings, const UnblindingKey& key) {
  ScoreTable table;
  std::map<ExplanationSource, std::array<long long, 3>> sums;
  std::map<ExplanationSource, std::set<std::string>> items;
  for (const auto& r : ratings) {
    auto it = key.find(r.item_id);
    if (it == key.end()) {
      throw Error(ErrorCode::kNotFound, fmt::format("rated item '{}' is missing from the key", r.item_id));
    }
    auto& s = sums[it->second];
    for (size_t m = 0; m < kAllMetrics.size(); ++m) s[m] += r.score(kAllMetrics[m]);
    ++table.rows[it->second].scores;
    items[it->second].insert(r.item_id);
  }
  for (auto& [source, row] : table.rows) {
    row.items = items[source].size();
    for (size_t m = 0; m < 3; ++m) row.mean[m] = static_cast<double>(sums[source][m]) / static_cast<double>(row.scores);
  }
  std::set<std::string> rated;
  for (const auto& r : ratings) rated.insert(r.item_id);
  for (const auto& [id, _] : key) {
    if (!rated.count(id)) table.coverage_gaps.push_back(id);
  }
  return table;
}

std::string format_score_table(const ScoreTable& table) {
  std::string out = fmt::format("{:<8}  {:>12}  {:>10}  {:>17}  {:>7}\n", "Source", "Completeness",
                                "Logicality", "Comprehensibility", "Scores");
  for (ExplanationSource s : {ExplanationSource::kModel, ExplanationSource::kDecoy}) {
    auto it = table.rows.find(s);
    if (it == table.rows.end()) continue;
    const auto& row = it->second;
    out += fmt::format("{:<8}  {:>12.2f}  {:>10.2f}  {:>17.2f}  {:>7}\n", to_string(s), row.mean[0],
                       row.mean[1], row.mean[2], row.scores);
  }
  if (!table.coverage_gaps.empty()) {
    out += fmt::format("unrated items: {}\n", text::join(table.coverage_gaps, ", "));
  }
  return out;
}

KappaResult fleiss_kappa(const std::vector<Rating>& ratings, Metric metric, bool strict) {
  std::map<std::string, std::array<size_t, 3>> per_item;
  for (const auto& r : ratings) {
    const int s = r.score(metric);
    if (s < 1 || s > 3) throw Error(ErrorCode::kInvalidInput, fmt::format("score {} is outside 1..3", s));
    ++per_item[r.item_id][static_cast<size_t>(s - 1)];
  }
  KappaResult res;
  res.metric = metric;
  size_t n = 0;
  for (const auto& [_, counts] : per_item) n = std::max(n, counts[0] + counts[1] + counts[2]);
  if (n < 2) throw Error(ErrorCode::kPrecondition, "Fleiss' kappa needs at least two raters per item");

  std::vector<const std::array<size_t, 3>*> included;
  for (const auto& [id, counts] : per_item) {
    if (counts[0] + counts[1] + counts[2] == n) {
      included.push_back(&counts);
      continue;
    }
    if (strict) {
      throw Error(ErrorCode::kUnequalRaters,
                  fmt::format("item '{}' has {} rating(s), expected {}", id, counts[0] + counts[1] + counts[2], n));
    }
    res.excluded_items.push_back(id);
  }
  if (included.empty()) throw Error(ErrorCode::kPrecondition, "no item has a complete set of ratings");

  const double nd = static_cast<double>(n);
  const double items = static_cast<double>(included.size());
  std::array<double, 3> p{};
  double p_bar = 0;
  for (const auto* counts : included) {
    double agree = 0;
    for (size_t j = 0; j < 3; ++j) {
      const double c = static_cast<double>((*counts)[j]);
      p[j] += c;
      agree += c * (c - 1);
    }
    p_bar += agree / (nd * (nd - 1));
  }
  p_bar /= items;
  double p_e = 0;
  for (double& pj : p) {
    pj /= items * nd;
    p_e += pj * pj;
  }
  res.n_items = included.size();
  res.n_raters = n;
  if (p_e >= 1.0 - 1e-12) {
    res.kappa = 1.0;
    res.degenerate = true;
  } else {
    res.kappa = (p_bar - p_e) / (1.0 - p_e);
  }
  return res;
}

}  // namespace ppx
