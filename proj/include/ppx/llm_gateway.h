#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <json.hpp>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include "ppx/errors.h"

namespace ppx {

struct GenerationConfig {
  double temperature = 0.6;
  double top_p = 0.9;
  int top_k = 50;  // 0 disables
  bool greedy = false;
  int max_tokens = 512;
  std::optional<int64_t> seed;

  void validate() const;
};

struct ChatMessage {
  std::string role;
  std::string content;
};

// Routing and journaling metadata. Never sent on the wire.
struct RequestTag {
  std::string cell;
  std::string segment_id;
  std::string purpose = "classify";
  int level = 0;
  std::string parent;
  std::string kind;
  int round = 0;  // 0 = first ask, 1 = re-ask
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  GenerationConfig config;
  RequestTag tag;

  const std::string& last_user_text() const;
};

// Request body for POST <endpoint>/chat/completions. Greedy requests omit
// temperature and top_k.
nlohmann::json to_wire(const ChatRequest& request, bool include_top_k = true);

struct ChatExchange {
  ChatRequest request;
  std::string response_text;
  int64_t latency_ms = 0;
  int attempt_count = 1;
  int last_status = 0;
  bool ok = false;
  std::string error;
};

nlohmann::json to_json(const ChatExchange& exchange);
ChatExchange exchange_from_json(const nlohmann::json& j);

struct BackendReply {
  int status = 200;
  std::string text;  // assistant content on success, body excerpt otherwise
  bool transport_error = false;
  int64_t latency_ms = 0;
};

class Backend {
 public:
  virtual ~Backend() = default;
  virtual BackendReply send(const ChatRequest& request) = 0;
};

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_delay{500};
  double backoff_factor = 2.0;
  std::chrono::milliseconds max_delay{8000};

  std::chrono::milliseconds delay_before(int attempt) const;  // attempt >= 2
};

struct GatewayOptions {
  RetryPolicy retry;
  int max_in_flight = 4;
};

class GatewayError : public Error {
 public:
  GatewayError(ErrorCode code, const std::string& message, int last_status, std::string excerpt,
               int attempts)
      : Error(code, message),
        last_status_(last_status),
        body_excerpt_(std::move(excerpt)),
        attempts_(attempts) {}

  int last_status() const { return last_status_; }
  const std::string& body_excerpt() const { return body_excerpt_; }
  int attempts() const { return attempts_; }

 private:
  int last_status_;
  std::string body_excerpt_;
  int attempts_;
};

// Shareable chat-completion front end. Retries transport failures and 5xx
// with exponential backoff, bounds in-flight calls, and journals every
// exchange (successful or not).
class Gateway {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  Gateway(std::shared_ptr<Backend> backend, GatewayOptions options = {}, Sleeper sleeper = {});

  // Throws GatewayError once retries are exhausted or on a 4xx reply.
  ChatExchange complete(const ChatRequest& request);
  // Same, but reports failure through ChatExchange::ok instead of throwing.
  ChatExchange try_complete(const ChatRequest& request);

  size_t call_count() const { return calls_.load(); }
  std::vector<ChatExchange> journal() const;  // sorted by tag
  void write_journal(std::ostream& out) const;
  void clear_journal();

 private:
  std::shared_ptr<Backend> backend_;
  GatewayOptions options_;
  Sleeper sleeper_;
  std::counting_semaphore<1024> in_flight_;
  std::atomic<size_t> calls_{0};
  mutable std::mutex journal_mutex_;
  std::vector<ChatExchange> journal_;
};

struct ParsedLabels {
  std::vector<std::string> recognized;  // canonical allowed names, first-seen order
  std::vector<std::string> unknown_mentions;
  bool is_other = false;
};

// Extracts allowed category names from a model reply. Throws
// kUnparseableOutput when neither an allowed name nor OTHER occurs.
ParsedLabels parse_labels(std::string_view text, const std::vector<std::string>& allowed);

struct LabelAnswer {
  ParsedLabels labels;
  std::vector<ChatExchange> exchanges;
};

// complete() + parse_labels(), with a single re-ask on unparseable output.
// On failure the partial exchanges are attached to the thrown error through
// `partial` when provided.
LabelAnswer ask_labels(Gateway& gateway, ChatRequest request,
                       const std::vector<std::string>& allowed, std::string_view reask_text,
                       std::vector<ChatExchange>* partial = nullptr);

}  // namespace ppx
