#include <chrono>
#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "ppx/backends.h"
#include "ppx/text_util.h"

namespace ppx {

using nlohmann::json;

HttpBackend::HttpBackend(Options options) : options_(std::move(options)) {
  std::string_view url = text::trim(options_.endpoint);
  while (!url.empty() && url.back() == '/') url.remove_suffix(1);
  const size_t scheme_end = url.find("://");
  if (scheme_end == std::string_view::npos) {
    throw Error(ErrorCode::kInvalidInput,
                fmt::format("endpoint '{}' must start with http:// or https://", options_.endpoint));
  }
  const size_t path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string_view::npos) {
    scheme_host_port_ = std::string(url);
  } else {
    scheme_host_port_ = std::string(url.substr(0, path_start));
    base_path_ = std::string(url.substr(path_start));
  }
}

BackendReply HttpBackend::send(const ChatRequest& request) {
  httplib::Client client(scheme_host_port_);
  client.set_connection_timeout(10);
  client.set_read_timeout(options_.timeout_seconds);
  client.set_write_timeout(options_.timeout_seconds);
  httplib::Headers headers;
  if (!options_.api_key.empty()) headers.emplace("Authorization", "Bearer " + options_.api_key);

  const std::string path = base_path_ + "/chat/completions";
  auto post = [&](bool with_top_k) {
    return client.Post(path, headers, to_wire(request, with_top_k).dump(), "application/json");
  };

  const auto start = std::chrono::steady_clock::now();
  bool with_top_k = top_k_supported_.load();
  auto res = post(with_top_k);
  if (res && with_top_k && (res->status == 400 || res->status == 422) &&
      res->body.find("top_k") != std::string::npos) {
    top_k_supported_.store(false);
    res = post(false);
  }
  const auto latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  if (!res) {
    return BackendReply{0, fmt::format("transport error: {}", httplib::to_string(res.error())), true,
                        latency};
  }
  if (res->status < 200 || res->status >= 300) {
    return BackendReply{res->status, res->body, false, latency};
  }
  try {
    const json body = json::parse(res->body);
    const auto& content = body.at("choices").at(0).at("message").at("content");
    return BackendReply{res->status, content.is_string() ? content.get<std::string>() : "", false,
                        latency};
  } catch (const json::exception& e) {
    return BackendReply{502, fmt::format("malformed completion body: {}", e.what()), false, latency};
  }
}

}  // namespace ppx
