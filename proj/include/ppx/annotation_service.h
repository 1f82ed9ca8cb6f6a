#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ppx/agreement.h"
#include "ppx/explainer.h"

namespace httplib {
class Server;
}

namespace ppx {

// Backend of the blinded rating UI. Never exposes item sources; it is built
// from the annotator-facing batch file alone.
class AnnotationService {
 public:
  AnnotationService(std::vector<ExplanationItem> batch, std::vector<std::string> annotators,
                    std::filesystem::path journal_path);

  // Each call returns {status, body}; status follows HTTP semantics.
  struct Response {
    int status = 200;
    nlohmann::ordered_json body;
  };

  Response queue(std::string_view annotator) const;
  Response item(std::string_view item_id) const;
  Response submit(std::string_view request_body);
  Response progress() const;

  // GET /api/queue/{annotator}, GET /api/item/{id}, POST /api/ratings,
  // GET /api/progress; static UI assets from `static_dir` when given.
  void bind(httplib::Server& server, const std::optional<std::filesystem::path>& static_dir = {});

  const RatingJournal& journal() const { return journal_; }

 private:
  std::vector<ExplanationItem> batch_;
  std::map<std::string, size_t> by_id_;
  std::vector<std::string> annotators_;
  RatingJournal journal_;

  bool known_annotator(std::string_view a) const;
};

}  // namespace ppx
