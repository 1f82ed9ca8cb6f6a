#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ppx/llm_gateway.h"

namespace ppx {

// Deterministic scripted backend. A script is an ordered list of rules; the
// first rule whose match conditions all hold answers the request.
//
//   latency_ms: 0
//   rules:
//     - match: {segment: gp-001, level: 2, parent: DATA SHARING}
//       reply: CONDITION
//     - match: {contains: "Do Not Track"}
//       fail: {status: 503, times: 2}   # omit times to fail forever
//       reply: Do Not Track
//   default: {reply: OTHER}            # optional; otherwise 404
//
// Failure counters are kept per (rule, logical request), so a script behaves
// the same regardless of how requests interleave across threads.
class StubBackend : public Backend {
 public:
  struct Match {
    std::optional<std::string> segment;
    std::optional<int> level;
    std::optional<std::string> parent;
    std::optional<std::string> kind;
    std::optional<std::string> purpose;
    std::optional<std::string> cell;
    std::optional<int> round;
    std::vector<std::string> contains;
    std::optional<std::regex> pattern;
  };
  struct Rule {
    Match match;
    std::optional<std::string> reply;
    int fail_status = 0;  // 0 = no failure injection
    bool fail_transport = false;
    std::optional<int> fail_times;  // nullopt = always
  };

  static StubBackend parse(std::string_view document, std::string_view source = "<memory>");
  static StubBackend load(const std::filesystem::path& path);

  StubBackend() = default;
  StubBackend(const StubBackend& other);

  void add_rule(Rule rule) { rules_.push_back(std::move(rule)); }
  void set_default_reply(std::string reply) { default_reply_ = std::move(reply); }

  BackendReply send(const ChatRequest& request) override;
  size_t rule_count() const { return rules_.size(); }

 private:
  std::vector<Rule> rules_;
  std::optional<std::string> default_reply_;
  int64_t latency_ms_ = 0;
  std::mutex mutex_;
  std::map<std::tuple<size_t, std::string, std::string, int, std::string, std::string, int>, int>
      failures_;
};

// Serves responses recorded in a gateway journal, keyed by request tag.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(const std::vector<ChatExchange>& journal);
  static ReplayBackend load(const std::filesystem::path& journal_path);

  BackendReply send(const ChatRequest& request) override;

 private:
  std::map<std::tuple<std::string, std::string, std::string, int, std::string, std::string, int>,
           ChatExchange>
      recorded_;
};

// OpenAI-compatible chat-completions client over HTTP(S).
class HttpBackend : public Backend {
 public:
  struct Options {
    std::string endpoint;  // e.g. http://localhost:8000/v1
    std::string api_key;   // sent as a bearer token when non-empty
    int timeout_seconds = 120;
  };

  explicit HttpBackend(Options options);
  BackendReply send(const ChatRequest& request) override;

  bool top_k_supported() const { return top_k_supported_.load(); }

 private:
  Options options_;
  std::string scheme_host_port_;
  std::string base_path_;
  std::atomic<bool> top_k_supported_{true};
};

}  // namespace ppx
