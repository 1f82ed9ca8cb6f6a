#pragma once

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <unistd.h>

#include "ppx/backends.h"
#include "ppx/llm_gateway.h"
#include "ppx/text_util.h"

namespace ppx::test {

inline std::filesystem::path source_root() { return PPX_SOURCE_ROOT; }
inline std::filesystem::path fixture(const std::string& rel) { return source_root() / "fixtures" / rel; }
inline std::filesystem::path taxonomy_file(const std::string& name) {
  return source_root() / "taxonomies" / (name + ".taxonomy");
}

inline std::string slurp(const std::filesystem::path& p) { return text::read_file(p.string()); }

inline void spit(const std::filesystem::path& p, const std::string& content) {
  std::filesystem::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << content;
}

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ppx-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  std::filesystem::path path_;
};

inline GatewayOptions fast_options(int attempts = 3, int in_flight = 4) {
  GatewayOptions o;
  o.retry.max_attempts = attempts;
  o.max_in_flight = in_flight;
  return o;
}

inline Gateway::Sleeper no_sleep() {
  return [](std::chrono::milliseconds) {};
}

inline std::shared_ptr<StubBackend> stub_from(const std::string& script) {
  return std::make_shared<StubBackend>(StubBackend::parse(script));
}

inline std::shared_ptr<StubBackend> stub_file(const std::string& rel) {
  return std::make_shared<StubBackend>(StubBackend::load(fixture(rel)));
}

}  // namespace ppx::test

namespace ppx::test {

// Compares against fixtures/goldens/<name>. With PPX_UPDATE_GOLDENS=1 the
// file is rewritten instead; review the diff before committing.
inline bool matches_golden(const std::string& name, const std::string& actual) {
  const auto path = fixture("goldens/" + name);
  if (std::getenv("PPX_UPDATE_GOLDENS")) {
    spit(path, actual);
    return true;
  }
  if (!std::filesystem::exists(path)) return false;
  return slurp(path) == actual;
}

}  // namespace ppx::test
