#include "ppx/taxonomy.h"

#include <algorithm>
#include <fmt/format.h>
#include <functional>
#include <set>
#include <yaml-cpp/yaml.h>

#include "ppx/errors.h"
#include "ppx/text_util.h"

namespace ppx {

LabelPath LabelPath::child(std::string name) const {
  auto segs = segments_;
  segs.push_back(std::move(name));
  return LabelPath(std::move(segs));
}

LabelPath LabelPath::prefix(size_t n) const {
  n = std::min(n, segments_.size());
  return LabelPath(std::vector<std::string>(segments_.begin(), segments_.begin() + n));
}

std::string LabelPath::render() const { return text::join(segments_, "."); }

namespace {

[[noreturn]] void fail(ErrorCode code, std::string_view source, int line, const std::string& msg) {
  throw Error(code, fmt::format("{}:{}: {}", source, line, msg));
}

int line_of(const YAML::Node& n) { return n.Mark().line + 1; }

std::string required_string(const YAML::Node& node, const char* key, std::string_view source) {
  const YAML::Node v = node[key];
  if (!v || !v.IsScalar()) {
    fail(ErrorCode::kInvalidInput, source, line_of(node), fmt::format("node missing '{}'", key));
  }
  return v.as<std::string>();
}

}  // namespace

Taxonomy Taxonomy::parse(std::string_view document, std::string_view source) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(document));
  } catch (const YAML::Exception& e) {
    fail(ErrorCode::kInvalidInput, source, e.mark.line + 1, e.msg);
  }
  if (!root.IsMap()) fail(ErrorCode::kInvalidInput, source, 1, "taxonomy document must be a mapping");

  Taxonomy t;
  t.name_ = root["name"] ? root["name"].as<std::string>() : std::string();
  const YAML::Node list = root["nodes"];
  if (!list || !list.IsSequence() || list.size() == 0) {
    throw Error(ErrorCode::kEmptyTaxonomy, fmt::format("{}: taxonomy has no nodes", source));
  }

  for (const auto& item : list) {
    ConceptNode node;
    node.line = line_of(item);
    node.code = std::string(text::trim(required_string(item, "code", source)));
    node.name = std::string(text::trim(required_string(item, "name", source)));
    node.description = std::string(text::trim(required_string(item, "description", source)));
    try {
      node.level = item["level"].as<int>();
    } catch (const YAML::Exception&) {
      fail(ErrorCode::kInvalidInput, source, node.line,
           fmt::format("node '{}' has no integer level", node.code));
    }
    if (const YAML::Node parents = item["parents"]; parents && parents.IsSequence()) {
      for (const auto& p : parents) node.parents.push_back(p.as<std::string>());
    }
    if (node.code.empty() || node.name.empty()) {
      fail(ErrorCode::kInvalidInput, source, node.line, "node code and name must be non-empty");
    }
    if (node.description.empty()) {
      fail(ErrorCode::kInvalidInput, source, node.line,
           fmt::format("node '{}' has an empty description", node.code));
    }
    if (text::iequals(node.name, kOther)) {
      fail(ErrorCode::kInvalidInput, source, node.line,
           fmt::format("node '{}' uses the reserved name OTHER", node.code));
    }
    if (node.level < 1) {
      fail(ErrorCode::kLevelMismatch, source, node.line,
           fmt::format("node '{}' has level {} (must be >= 1)", node.code, node.level));
    }
    if (t.by_code_.count(node.code)) {
      fail(ErrorCode::kDuplicateCode, source, node.line,
           fmt::format("duplicate node code '{}'", node.code));
    }
    t.by_code_.emplace(node.code, t.nodes_.size());
    t.nodes_.push_back(std::move(node));
  }

  for (const auto& node : t.nodes_) {
    for (const auto& p : node.parents) {
      if (!t.by_code_.count(p)) {
        fail(ErrorCode::kDanglingParent, source, node.line,
             fmt::format("node '{}' references unknown parent '{}'", node.code, p));
      }
    }
  }

  // Cycle detection over parent edges (0 = unvisited, 1 = on stack, 2 = done).
  std::vector<int> state(t.nodes_.size(), 0);
  std::function<void(size_t)> visit = [&](size_t i) {
    state[i] = 1;
    for (const auto& p : t.nodes_[i].parents) {
      size_t j = t.by_code_.at(p);
      if (state[j] == 1) {
        fail(ErrorCode::kCycle, source, t.nodes_[i].line,
             fmt::format("cycle through node '{}' and parent '{}'", t.nodes_[i].code, p));
      }
      if (state[j] == 0) visit(j);
    }
    state[i] = 2;
  };
  for (size_t i = 0; i < t.nodes_.size(); ++i) {
    if (state[i] == 0) visit(i);
  }

  std::set<std::pair<int, std::string>> names;
  for (size_t i = 0; i < t.nodes_.size(); ++i) {
    auto& node = t.nodes_[i];
    if (node.level == 1 && !node.parents.empty()) {
      fail(ErrorCode::kLevelMismatch, source, node.line,
           fmt::format("level-1 node '{}' must not have parents", node.code));
    }
    if (node.level > 1 && node.parents.empty()) {
      fail(ErrorCode::kLevelMismatch, source, node.line,
           fmt::format("level-{} node '{}' has no parent", node.level, node.code));
    }
    for (const auto& p : node.parents) {
      auto& parent = t.nodes_[t.by_code_.at(p)];
      if (parent.level != node.level - 1) {
        fail(ErrorCode::kLevelMismatch, source, node.line,
             fmt::format("node '{}' at level {} has parent '{}' at level {}", node.code,
                         node.level, p, parent.level));
      }
      parent.children.push_back(node.code);
    }
    if (!names.emplace(node.level, text::to_lower(node.name)).second) {
      fail(ErrorCode::kDuplicateCode, source, node.line,
           fmt::format("duplicate name '{}' at level {}", node.name, node.level));
    }
    if (node.level == 1) t.roots_.push_back(i);
    t.max_level_ = std::max(t.max_level_, node.level);
  }

  if (const YAML::Node levels = root["levels"]; levels) {
    if (levels.as<int>() != t.max_level_) {
      fail(ErrorCode::kLevelMismatch, source, line_of(levels),
           fmt::format("declared levels {} but deepest node is at level {}", levels.as<int>(),
                       t.max_level_));
    }
  }
  return t;
}

Taxonomy Taxonomy::load(const std::filesystem::path& path) {
  return parse(text::read_file(path.string()), path.string());
}

size_t Taxonomy::count_at_level(int level) const {
  return static_cast<size_t>(std::count_if(nodes_.begin(), nodes_.end(),
                                           [&](const ConceptNode& n) { return n.level == level; }));
}

const ConceptNode* Taxonomy::find_code(std::string_view code) const {
  auto it = by_code_.find(std::string(code));
  return it == by_code_.end() ? nullptr : &nodes_[it->second];
}

const ConceptNode* Taxonomy::find_name(int level, std::string_view name) const {
  name = text::trim(name);
  for (const auto& n : nodes_) {
    if (n.level == level && text::iequals(n.name, name)) return &n;
  }
  return nullptr;
}

const ConceptNode* Taxonomy::walk(const LabelPath& path) const {
  const ConceptNode* current = nullptr;
  for (size_t i = 0; i < path.depth(); ++i) {
    const std::string& name = path.segments()[i];
    const ConceptNode* next = nullptr;
    if (current == nullptr) {
      for (size_t r : roots_) {
        if (nodes_[r].name == name) next = &nodes_[r];
      }
    } else {
      for (const auto& c : current->children) {
        const ConceptNode& child = nodes_[by_code_.at(c)];
        if (child.name == name) next = &child;
      }
    }
    if (next == nullptr) {
      throw Error(current ? ErrorCode::kNonEdge : ErrorCode::kUnknownLabel,
                  fmt::format("'{}' is not a valid label path in taxonomy '{}'", path.render(),
                              name_));
    }
    current = next;
  }
  return current;
}

std::vector<const ConceptNode*> Taxonomy::children_of(const LabelPath& path) const {
  std::vector<const ConceptNode*> out;
  if (path.is_other()) return out;
  if (path.is_root()) {
    for (size_t r : roots_) out.push_back(&nodes_[r]);
    return out;
  }
  const ConceptNode* node = walk(path);
  for (const auto& c : node->children) out.push_back(&nodes_[by_code_.at(c)]);
  return out;
}

const ConceptNode& Taxonomy::node_at(const LabelPath& path) const {
  if (path.is_root() || path.is_other()) {
    throw Error(ErrorCode::kPrecondition, "root and OTHER paths have no node");
  }
  return *walk(path);
}

LabelPath Taxonomy::parse_label_path(std::string_view label) const {
  std::string_view trimmed = text::trim(label);
  if (text::iequals(trimmed, kOther)) return LabelPath::other();
  if (trimmed.empty()) throw Error(ErrorCode::kUnknownLabel, "empty label path");

  std::vector<std::string> names;
  const ConceptNode* current = nullptr;
  for (const auto& raw : text::split(trimmed, '.')) {
    std::string_view part = text::trim(raw);
    if (text::iequals(part, kOther)) {
      throw Error(ErrorCode::kNonEdge,
                  fmt::format("OTHER is terminal and cannot appear inside '{}'", trimmed));
    }
    const ConceptNode* next = nullptr;
    if (current == nullptr) {
      for (size_t r : roots_) {
        if (text::iequals(nodes_[r].name, part)) next = &nodes_[r];
      }
      if (next == nullptr) {
        bool known = false;
        for (const auto& n : nodes_) known = known || text::iequals(n.name, part);
        throw Error(known ? ErrorCode::kNonEdge : ErrorCode::kUnknownLabel,
                    known ? fmt::format("'{}' is not a level-1 node ('{}')", part, trimmed)
                          : fmt::format("unknown node '{}' in '{}' (taxonomy '{}')", part, trimmed,
                                        name_));
      }
    } else {
      for (const auto& c : current->children) {
        const ConceptNode& child = nodes_[by_code_.at(c)];
        if (text::iequals(child.name, part)) next = &child;
      }
      if (next == nullptr) {
        bool known = false;
        for (const auto& n : nodes_) known = known || text::iequals(n.name, part);
        throw Error(known ? ErrorCode::kNonEdge : ErrorCode::kUnknownLabel,
                    fmt::format("'{}' is not a child of '{}' in '{}'", part, current->name, trimmed));
      }
    }
    names.push_back(next->name);
    current = next;
  }
  return LabelPath(std::move(names));
}

bool Taxonomy::is_valid(const LabelPath& path) const {
  if (path.is_other()) return true;
  if (path.is_root()) return false;
  try {
    walk(path);
    return true;
  } catch (const Error&) {
    return false;
  }
}

std::vector<LabelPath> Taxonomy::all_paths(int max_depth) const {
  std::vector<LabelPath> out;
  std::function<void(const LabelPath&)> expand = [&](const LabelPath& p) {
    if (static_cast<int>(p.depth()) >= max_depth) return;
    for (const ConceptNode* c : children_of(p)) {
      LabelPath next = p.child(c->name);
      out.push_back(next);
      expand(next);
    }
  };
  expand(LabelPath::root());
  return out;
}

}  // namespace ppx
