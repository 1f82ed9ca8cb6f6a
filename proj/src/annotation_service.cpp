#include "ppx/annotation_service.h"

#include <algorithm>
#include <fmt/format.h>
#include <httplib.h>

#include "ppx/manifest.h"

namespace ppx {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

AnnotationService::Response error(int status, std::string_view message) {
  ordered_json body;
  body["error"] = std::string(message);
  return {status, std::move(body)};
}

}  // namespace

AnnotationService::AnnotationService(std::vector<ExplanationItem> batch, std::vector<std::string> annotators,
                                     std::filesystem::path journal_path)
    : batch_(std::move(batch)), annotators_(std::move(annotators)), journal_(std::move(journal_path)) {
  for (size_t i = 0; i < batch_.size(); ++i) {
    if (!by_id_.emplace(batch_[i].item_id, i).second) {
      throw Error(ErrorCode::kInvalidInput, fmt::format("duplicate item id '{}' in batch", batch_[i].item_id));
    }
  }
  if (annotators_.empty()) throw Error(ErrorCode::kInvalidInput, "no annotators registered");
}

bool AnnotationService::known_annotator(std::string_view a) const {
  return std::find(annotators_.begin(), annotators_.end(), a) != annotators_.end();
}

AnnotationService::Response AnnotationService::queue(std::string_view annotator) const {
  if (!known_annotator(annotator)) return error(404, fmt::format("unknown annotator '{}'", annotator));
  ordered_json body;
  json pending = json::array();
  for (const auto& item : batch_) {
    if (!journal_.has(annotator, item.item_id)) pending.push_back(item.item_id);
  }
  body["annotator"] = std::string(annotator);
  body["total"] = batch_.size();
  body["done"] = batch_.size() - pending.size();
  body["pending"] = std::move(pending);
  return {200, std::move(body)};
}

AnnotationService::Response AnnotationService::item(std::string_view item_id) const {
  auto it = by_id_.find(std::string(item_id));
  if (it == by_id_.end()) return error(404, fmt::format("unknown item '{}'", item_id));
  const auto& item = batch_[it->second];
  ordered_json body;
  body["item_id"] = item.item_id;
  body["text"] = item.explanation_text;
  body["segment_text"] = item.segment_text;
  json cats = json::array();
  for (const auto& p : item.categories) cats.push_back(p.render());
  body["categories"] = std::move(cats);
  return {200, std::move(body)};
}

AnnotationService::Response AnnotationService::submit(std::string_view request_body) {
  json j;
  try {
    j = json::parse(request_body);
  } catch (const json::exception&) {
    return error(400, "request body is not valid JSON");
  }
  Rating r;
  try {
    r = rating_from_json(j);
    validate_rating(r);
  } catch (const Error& e) {
    return error(400, e.what());
  }
  if (!known_annotator(r.annotator_id)) return error(404, fmt::format("unknown annotator '{}'", r.annotator_id));
  if (!by_id_.count(r.item_id)) return error(404, fmt::format("unknown item '{}'", r.item_id));
  r.timestamp = utc_timestamp(false);
  RatingJournal::Outcome outcome;
  try {
    outcome = journal_.submit(r);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kConflict) return error(409, e.what());
    return error(e.code() == ErrorCode::kInvalidInput ? 400 : 500, e.what());
  }
  ordered_json body;
  body["status"] = outcome == RatingJournal::Outcome::kAccepted ? "accepted" : "duplicate";
  body["item_id"] = r.item_id;
  body["done"] = journal_.count_for(r.annotator_id);
  body["total"] = batch_.size();
  return {200, std::move(body)};
}

AnnotationService::Response AnnotationService::progress() const {
  ordered_json body;
  body["total"] = batch_.size();
  ordered_json per = ordered_json::object();
  for (const auto& a : annotators_) {
    size_t done = 0;
    for (const auto& item : batch_) done += journal_.has(a, item.item_id) ? 1 : 0;
    ordered_json row;
    row["done"] = done;
    row["pending"] = batch_.size() - done;
    per[a] = std::move(row);
  }
  body["annotators"] = std::move(per);
  return {200, std::move(body)};
}

void AnnotationService::bind(httplib::Server& server, const std::optional<std::filesystem::path>& static_dir) {
  auto reply = [](httplib::Response& res, const Response& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server.Get(R"(/api/queue/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, queue(req.matches[1].str()));
  });
  server.Get(R"(/api/item/([^/]+))", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, item(req.matches[1].str()));
  });
  server.Post("/api/ratings", [this, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, submit(req.body));
  });
  server.Get("/api/progress", [this, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, progress());
  });
  if (static_dir) server.set_mount_point("/", static_dir->string());
}

}  // namespace ppx
