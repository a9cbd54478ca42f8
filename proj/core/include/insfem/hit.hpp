#pragma once

#include <string>
#include <vector>

#include "insfem/types.hpp"

namespace insfem {

struct ParamNode {
  std::string name;
  std::vector<std::pair<std::string, std::string>> params;
  std::vector<ParamNode> children;

  const std::string* find(const std::string& key) const;
  const ParamNode* child(const std::string& name) const;

  bool operator==(const ParamNode&) const = default;
};

struct ParamTree {
  // Free assignments outside any section (the substitution variables).
  std::vector<std::pair<std::string, std::string>> toplevel;
  std::vector<ParamNode> sections;

  const ParamNode* section(const std::string& name) const;

  bool operator==(const ParamTree&) const = default;
};

// Replaces each ${name} with the top-level assignment `name=value`. Single
// pass, non-recursive; an unresolved ${...} raises ParseError with its line.
std::string substitute_dbe(const std::string& text);

// Hierarchical [Section] / [./sub] ... [../] / [] syntax with key = value
// pairs, single-quoted strings and # comments.
ParamTree parse_hit(const std::string& text);

// Canonical renderer; parse_hit(render_hit(t)) == t.
std::string render_hit(const ParamTree& tree);

// Space-separated list from a quoted value.
std::vector<std::string> split_list(const std::string& value);

}  // namespace insfem
