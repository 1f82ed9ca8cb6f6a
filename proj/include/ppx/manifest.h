#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace ppx {

inline constexpr std::string_view kToolVersion = "0.4.1";

struct RunManifest {
  std::string command;
  std::vector<std::string> arguments;
  std::map<std::string, std::string> input_digests;  // path → sha256 hex
  std::string tool_version = std::string(kToolVersion);
  std::string started_at;
  std::string finished_at;
};

std::string sha256_hex(std::string_view data);
std::string sha256_file(const std::filesystem::path& path);

// UTC, second resolution. With `pinned`, SOURCE_DATE_EPOCH (or 0) stands in
// for the clock so stub runs stay byte-identical.
std::string utc_timestamp(bool pinned);

void write_manifest(const std::filesystem::path& dir, const RunManifest& m);
RunManifest read_manifest(const std::filesystem::path& dir);

}  // namespace ppx
