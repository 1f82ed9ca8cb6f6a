#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ppx {

// Reserved outcome meaning "matches no node at this level". Never a node.
inline constexpr std::string_view kOther = "OTHER";

struct ConceptNode {
  std::string code;
  std::string name;
  std::string description;
  int level = 1;
  std::vector<std::string> parents;   // codes
  std::vector<std::string> children;  // codes, declaration order
  int line = 0;                       // 1-based source line, 0 if unknown
};

// Root-to-node chain of canonical node names. An empty path is the root
// marker; {"OTHER"} is the terminal sentinel path.
class LabelPath {
 public:
  LabelPath() = default;
  explicit LabelPath(std::vector<std::string> segments) : segments_(std::move(segments)) {}

  static LabelPath root() { return {}; }
  static LabelPath other() { return LabelPath({std::string(kOther)}); }

  bool is_root() const { return segments_.empty(); }
  bool is_other() const { return segments_.size() == 1 && segments_[0] == kOther; }
  size_t depth() const { return segments_.size(); }
  const std::vector<std::string>& segments() const { return segments_; }
  const std::string& head() const { return segments_.front(); }
  const std::string& last() const { return segments_.back(); }

  LabelPath child(std::string name) const;
  LabelPath prefix(size_t n) const;
  std::string render() const;  // joined with "."

  auto operator<=>(const LabelPath&) const = default;

 private:
  std::vector<std::string> segments_;
};

// Immutable multi-level concept DAG. Safe for concurrent reads.
class Taxonomy {
 public:
  static Taxonomy parse(std::string_view document, std::string_view source = "<memory>");
  static Taxonomy load(const std::filesystem::path& path);

  const std::string& name() const { return name_; }
  int max_level() const { return max_level_; }
  const std::vector<ConceptNode>& nodes() const { return nodes_; }
  size_t count_at_level(int level) const;

  const ConceptNode* find_code(std::string_view code) const;
  // Case-insensitive, whitespace-trimmed lookup among the nodes of one level.
  const ConceptNode* find_name(int level, std::string_view name) const;

  // Children in declaration order; level-1 nodes for the root path; empty for
  // leaves and OTHER. Throws kNonEdge/kUnknownLabel on invalid paths.
  std::vector<const ConceptNode*> children_of(const LabelPath& path) const;

  // Terminal node of a valid, non-root, non-OTHER path.
  const ConceptNode& node_at(const LabelPath& path) const;

  LabelPath parse_label_path(std::string_view text) const;
  bool is_valid(const LabelPath& path) const;

  // Every valid path of depth 1..max_depth, in declaration order.
  std::vector<LabelPath> all_paths(int max_depth) const;

 private:
  std::string name_;
  int max_level_ = 0;
  std::vector<ConceptNode> nodes_;
  std::unordered_map<std::string, size_t> by_code_;
  std::vector<size_t> roots_;

  const ConceptNode* walk(const LabelPath& path) const;
};

inline Taxonomy load_taxonomy(const std::filesystem::path& path) { return Taxonomy::load(path); }

inline std::vector<const ConceptNode*> children_of(const Taxonomy& t, const LabelPath& path) {
  return t.children_of(path);
}

inline LabelPath parse_label_path(const Taxonomy& t, std::string_view text) {
  return t.parse_label_path(text);
}

}  // namespace ppx
