#include "ppx/llm_gateway.h"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <ostream>
#include <thread>
#include <tuple>

#include "ppx/text_util.h"

namespace ppx {

using nlohmann::json;

void GenerationConfig::validate() const {
  if (temperature < 0) throw Error(ErrorCode::kInvalidInput, "temperature must be >= 0");
  if (!(top_p > 0 && top_p <= 1)) throw Error(ErrorCode::kInvalidInput, "top_p must be in (0, 1]");
  if (top_k < 0) throw Error(ErrorCode::kInvalidInput, "top_k must be >= 0");
  if (max_tokens <= 0) throw Error(ErrorCode::kInvalidInput, "max_tokens must be > 0");
}

const std::string& ChatRequest::last_user_text() const {
  static const std::string kEmpty;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == "user") return it->content;
  }
  return kEmpty;
}

json to_wire(const ChatRequest& request, bool include_top_k) {
  json messages = json::array();
  for (const auto& m : request.messages) messages.push_back({{"role", m.role}, {"content", m.content}});
  json body = {{"model", request.model}, {"messages", messages}};
  const auto& cfg = request.config;
  if (cfg.greedy) {
    body["do_sample"] = false;
  } else {
    body["temperature"] = cfg.temperature;
  }
  body["top_p"] = cfg.top_p;
  body["max_tokens"] = cfg.max_tokens;
  if (cfg.seed) body["seed"] = *cfg.seed;
  if (include_top_k && !cfg.greedy && cfg.top_k > 0) body["top_k"] = cfg.top_k;
  return body;
}

json to_json(const ChatExchange& x) {
  const auto& t = x.request.tag;
  json messages = json::array();
  for (const auto& m : x.request.messages) {
    messages.push_back({{"role", m.role}, {"content", m.content}});
  }
  const auto& cfg = x.request.config;
  json config = {{"temperature", cfg.temperature}, {"top_p", cfg.top_p}, {"top_k", cfg.top_k},
                 {"greedy", cfg.greedy},           {"max_tokens", cfg.max_tokens}};
  if (cfg.seed) config["seed"] = *cfg.seed;
  return {{"cell", t.cell},
          {"segment_id", t.segment_id},
          {"purpose", t.purpose},
          {"level", t.level},
          {"parent", t.parent},
          {"kind", t.kind},
          {"round", t.round},
          {"model", x.request.model},
          {"config", config},
          {"messages", messages},
          {"response_text", x.response_text},
          {"ok", x.ok},
          {"status", x.last_status},
          {"attempt_count", x.attempt_count},
          {"latency_ms", x.latency_ms},
          {"error", x.error}};
}

ChatExchange exchange_from_json(const json& j) {
  ChatExchange x;
  auto& t = x.request.tag;
  t.cell = j.value("cell", "");
  t.segment_id = j.value("segment_id", "");
  t.purpose = j.value("purpose", "classify");
  t.level = j.value("level", 0);
  t.parent = j.value("parent", "");
  t.kind = j.value("kind", "");
  t.round = j.value("round", 0);
  x.request.model = j.value("model", "");
  if (j.contains("config")) {
    const auto& c = j["config"];
    auto& cfg = x.request.config;
    cfg.temperature = c.value("temperature", cfg.temperature);
    cfg.top_p = c.value("top_p", cfg.top_p);
    cfg.top_k = c.value("top_k", cfg.top_k);
    cfg.greedy = c.value("greedy", false);
    cfg.max_tokens = c.value("max_tokens", cfg.max_tokens);
    if (c.contains("seed")) cfg.seed = c["seed"].get<int64_t>();
  }
  for (const auto& m : j.value("messages", json::array())) {
    x.request.messages.push_back({m.value("role", ""), m.value("content", "")});
  }
  x.response_text = j.value("response_text", "");
  x.ok = j.value("ok", false);
  x.last_status = j.value("status", 0);
  x.attempt_count = j.value("attempt_count", 1);
  x.latency_ms = j.value("latency_ms", int64_t{0});
  x.error = j.value("error", "");
  return x;
}

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
  double ms = static_cast<double>(initial_delay.count()) * std::pow(backoff_factor, attempt - 2);
  ms = std::min(ms, static_cast<double>(max_delay.count()));
  return std::chrono::milliseconds(static_cast<int64_t>(ms));
}

Gateway::Gateway(std::shared_ptr<Backend> backend, GatewayOptions options, Sleeper sleeper)
    : backend_(std::move(backend)),
      options_(options),
      sleeper_(sleeper ? std::move(sleeper)
                       : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      in_flight_(std::clamp(options.max_in_flight, 1, 1024)) {
  if (options_.retry.max_attempts < 1) options_.retry.max_attempts = 1;
}

namespace {

std::string excerpt(std::string_view body) {
  constexpr size_t kMax = 200;
  return body.size() <= kMax ? std::string(body) : std::string(body.substr(0, kMax)) + "...";
}

auto tag_key(const ChatExchange& x) {
  const auto& t = x.request.tag;
  return std::tie(t.cell, t.segment_id, t.purpose, t.level, t.parent, t.kind, t.round);
}

}  // namespace

ChatExchange Gateway::try_complete(const ChatRequest& request) {
  calls_.fetch_add(1);
  ChatExchange x;
  x.request = request;
  BackendReply reply;
  int attempt = 0;
  while (true) {
    ++attempt;
    if (attempt > 1) sleeper_(options_.retry.delay_before(attempt));
    in_flight_.acquire();
    try {
      reply = backend_->send(request);
    } catch (const std::exception& e) {
      reply = BackendReply{0, e.what(), true, 0};
    }
    in_flight_.release();
    x.latency_ms += reply.latency_ms;

    const bool success = !reply.transport_error && reply.status >= 200 && reply.status < 300;
    const bool retryable = reply.transport_error || reply.status >= 500;
    if (success || !retryable || attempt >= options_.retry.max_attempts) break;
  }
  x.attempt_count = attempt;
  x.last_status = reply.transport_error ? 0 : reply.status;
  if (!reply.transport_error && reply.status >= 200 && reply.status < 300) {
    x.ok = true;
    x.response_text = reply.text;
  } else if (!reply.transport_error && reply.status >= 400 && reply.status < 500) {
    x.error = fmt::format("non-retryable status {}: {}", reply.status, excerpt(reply.text));
  } else {
    x.error = fmt::format("retries exhausted after {} attempt(s); last {}: {}", attempt,
                          reply.transport_error ? std::string("transport error")
                                                : fmt::format("status {}", reply.status),
                          excerpt(reply.text));
  }
  {
    std::lock_guard lock(journal_mutex_);
    journal_.push_back(x);
  }
  return x;
}

ChatExchange Gateway::complete(const ChatRequest& request) {
  ChatExchange x = try_complete(request);
  if (!x.ok) {
    const bool client = x.last_status >= 400 && x.last_status < 500;
    throw GatewayError(client ? ErrorCode::kClientError : ErrorCode::kRetriesExhausted, x.error,
                       x.last_status, x.error, x.attempt_count);
  }
  return x;
}

std::vector<ChatExchange> Gateway::journal() const {
  std::vector<ChatExchange> out;
  {
    std::lock_guard lock(journal_mutex_);
    out = journal_;
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ChatExchange& a, const ChatExchange& b) { return tag_key(a) < tag_key(b); });
  return out;
}

void Gateway::write_journal(std::ostream& out) const {
  for (const auto& x : journal()) out << to_json(x).dump() << '\n';
}

void Gateway::clear_journal() {
  std::lock_guard lock(journal_mutex_);
  journal_.clear();
}

LabelAnswer ask_labels(Gateway& gateway, ChatRequest request,
                       const std::vector<std::string>& allowed, std::string_view reask_text,
                       std::vector<ChatExchange>* partial) {
  LabelAnswer answer;
  auto record = [&](const ChatExchange& x) {
    answer.exchanges.push_back(x);
    if (partial) partial->push_back(x);
  };

  ChatExchange first = gateway.try_complete(request);
  record(first);
  if (!first.ok) {
    throw GatewayError(first.last_status >= 400 && first.last_status < 500 ? ErrorCode::kClientError
                                                                           : ErrorCode::kRetriesExhausted,
                       first.error, first.last_status, first.error, first.attempt_count);
  }
  try {
    answer.labels = parse_labels(first.response_text, allowed);
    return answer;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::kUnparseableOutput) throw;
  }

  request.messages.push_back({"assistant", first.response_text});
  request.messages.push_back({"user", std::string(reask_text)});
  request.tag.round = 1;
  ChatExchange second = gateway.try_complete(request);
  record(second);
  if (!second.ok) {
    throw GatewayError(second.last_status >= 400 && second.last_status < 500
                           ? ErrorCode::kClientError
                           : ErrorCode::kRetriesExhausted,
                       second.error, second.last_status, second.error, second.attempt_count);
  }
  answer.labels = parse_labels(second.response_text, allowed);
  return answer;
}

}  // namespace ppx
