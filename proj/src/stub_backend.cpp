#include <fmt/format.h>
#include <fstream>
#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "ppx/backends.h"
#include "ppx/text_util.h"

namespace ppx {

StubBackend::StubBackend(const StubBackend& other)
    : rules_(other.rules_), default_reply_(other.default_reply_), latency_ms_(other.latency_ms_) {}

StubBackend StubBackend::parse(std::string_view document, std::string_view source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(document));
  } catch (const YAML::Exception& e) {
    throw Error(ErrorCode::kInvalidInput, fmt::format("{}:{}: {}", source, e.mark.line + 1, e.msg));
  }
  StubBackend stub;
  if (!root || root.IsNull()) return stub;
  if (root["latency_ms"]) stub.latency_ms_ = root["latency_ms"].as<int64_t>();
  if (const auto d = root["default"]; d && d["reply"]) stub.default_reply_ = d["reply"].as<std::string>();

  for (const auto& r : root["rules"]) {
    const int line = r.Mark().line + 1;
    Rule rule;
    if (const auto m = r["match"]) {
      auto str = [&](const char* key) -> std::optional<std::string> {
        return m[key] ? std::optional(m[key].as<std::string>()) : std::nullopt;
      };
      rule.match.segment = str("segment");
      rule.match.parent = str("parent");
      rule.match.kind = str("kind");
      rule.match.purpose = str("purpose");
      rule.match.cell = str("cell");
      if (m["level"]) rule.match.level = m["level"].as<int>();
      if (m["round"]) rule.match.round = m["round"].as<int>();
      if (const auto c = m["contains"]) {
        if (c.IsSequence()) {
          for (const auto& s : c) rule.match.contains.push_back(s.as<std::string>());
        } else {
          rule.match.contains.push_back(c.as<std::string>());
        }
      }
      if (m["pattern"]) {
        try {
          rule.match.pattern = std::regex(m["pattern"].as<std::string>());
        } catch (const std::regex_error& e) {
          throw Error(ErrorCode::kInvalidInput, fmt::format("{}:{}: bad pattern: {}", source, line, e.what()));
        }
      }
    }
    if (r["reply"]) rule.reply = r["reply"].as<std::string>();
    if (const auto f = r["fail"]) {
      rule.fail_status = f["status"] ? f["status"].as<int>() : 503;
      rule.fail_transport = f["transport"] && f["transport"].as<bool>();
      if (f["times"]) rule.fail_times = f["times"].as<int>();
    }
    if (!rule.reply && rule.fail_status == 0) {
      throw Error(ErrorCode::kInvalidInput,
                  fmt::format("{}:{}: stub rule needs 'reply' or 'fail'", source, line));
    }
    if (!rule.reply && rule.fail_times) {
      throw Error(ErrorCode::kInvalidInput,
                  fmt::format("{}:{}: a bounded failure needs a 'reply' to fall back to", source, line));
    }
    stub.rules_.push_back(std::move(rule));
  }
  return stub;
}

StubBackend StubBackend::load(const std::filesystem::path& path) {
  return parse(text::read_file(path.string()), path.string());
}

namespace {

bool matches(const StubBackend::Match& m, const ChatRequest& req) {
  const auto& t = req.tag;
  if (m.segment && *m.segment != t.segment_id) return false;
  if (m.level && *m.level != t.level) return false;
  if (m.parent && !text::iequals(*m.parent, t.parent)) return false;
  if (m.kind && !text::iequals(*m.kind, t.kind)) return false;
  if (m.purpose && *m.purpose != t.purpose) return false;
  if (m.cell && *m.cell != t.cell) return false;
  if (m.round && *m.round != t.round) return false;
  const std::string& user = req.last_user_text();
  for (const auto& needle : m.contains) {
    if (user.find(needle) == std::string::npos) return false;
  }
  if (m.pattern && !std::regex_search(user, *m.pattern)) return false;
  return true;
}

}  // namespace

BackendReply StubBackend::send(const ChatRequest& request) {
  const auto& t = request.tag;
  for (size_t i = 0; i < rules_.size(); ++i) {
    const Rule& rule = rules_[i];
    if (!matches(rule.match, request)) continue;
    if (rule.fail_status != 0 || rule.fail_transport) {
      bool fail_now = !rule.fail_times.has_value();
      if (!fail_now) {
        std::lock_guard lock(mutex_);
        int& n = failures_[{i, t.cell, t.segment_id, t.level, t.parent, t.purpose, t.round}];
        if (n < *rule.fail_times) {
          ++n;
          fail_now = true;
        }
      }
      if (fail_now) {
        if (rule.fail_transport) return BackendReply{0, "injected transport failure", true, latency_ms_};
        return BackendReply{rule.fail_status,
                            fmt::format("{{\"error\":\"injected failure {}\"}}", rule.fail_status),
                            false, latency_ms_};
      }
    }
    return BackendReply{200, *rule.reply, false, latency_ms_};
  }
  if (default_reply_) return BackendReply{200, *default_reply_, false, latency_ms_};
  return BackendReply{404,
                      fmt::format("no stub rule matched segment '{}' level {} parent '{}'",
                                  t.segment_id, t.level, t.parent),
                      false, latency_ms_};
}

namespace {
auto replay_key(const RequestTag& t) {
  return std::make_tuple(t.cell, t.segment_id, t.purpose, t.level, t.parent, t.kind, t.round);
}
}  // namespace

ReplayBackend::ReplayBackend(const std::vector<ChatExchange>& journal) {
  for (const auto& x : journal) recorded_[replay_key(x.request.tag)] = x;
}

ReplayBackend ReplayBackend::load(const std::filesystem::path& journal_path) {
  std::ifstream in(journal_path);
  if (!in) throw Error(ErrorCode::kIo, fmt::format("cannot open journal '{}'", journal_path.string()));
  std::vector<ChatExchange> xs;
  std::string line;
  while (std::getline(in, line)) {
    if (text::trim(line).empty()) continue;
    xs.push_back(exchange_from_json(nlohmann::json::parse(line)));
  }
  return ReplayBackend(xs);
}

BackendReply ReplayBackend::send(const ChatRequest& request) {
  auto it = recorded_.find(replay_key(request.tag));
  if (it == recorded_.end()) {
    return BackendReply{404, fmt::format("no journal entry for segment '{}' level {}",
                                         request.tag.segment_id, request.tag.level)};
  }
  const ChatExchange& x = it->second;
  if (x.ok) return BackendReply{200, x.response_text, false, x.latency_ms};
  if (x.last_status == 0) return BackendReply{0, x.error, true, x.latency_ms};
  return BackendReply{x.last_status, x.error, false, x.latency_ms};
}

}  // namespace ppx
