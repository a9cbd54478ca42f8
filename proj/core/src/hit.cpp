#include "insfem/hit.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <sstream>

namespace insfem {

const std::string* ParamNode::find(const std::string& key) const {
  for (const auto& [k, v] : params)
    if (k == key) return &v;
  return nullptr;
}

const ParamNode* ParamNode::child(const std::string& cname) const {
  for (const auto& c : children)
    if (c.name == cname) return &c;
  return nullptr;
}

const ParamNode* ParamTree::section(const std::string& name) const {
  for (const auto& s : sections)
    if (s.name == name) return &s;
  return nullptr;
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

// Strips a # comment that is not inside single quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\'') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-' && c != '.')
      return false;
  return true;
}

}  // namespace

std::string substitute_dbe(const std::string& text) {
  // Collect top-level assignments.
  std::map<std::string, std::string> vars;
  {
    std::istringstream in(text);
    std::string line;
    int depth = 0;
    while (std::getline(in, line)) {
      const std::string s = trim(strip_comment(line));
      if (s.empty()) continue;
      if (s.front() == '[') {
        if (s == "[]" || s == "[../]")
          --depth;
        else
          ++depth;
        continue;
      }
      if (depth != 0) continue;
      const size_t eq = s.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = trim(s.substr(0, eq));
      const std::string val = trim(s.substr(eq + 1));
      if (valid_key(key)) vars[key] = val;
    }
  }

  std::string out;
  out.reserve(text.size());
  int lineno = 1;
  for (size_t i = 0; i < text.size();) {
    if (text[i] == '\n') ++lineno;
    if (text[i] == '$' && i + 1 < text.size() && text[i + 1] == '{') {
      const size_t close = text.find('}', i + 2);
      if (close == std::string::npos) throw ParseError("unterminated '${'", lineno);
      const std::string name = text.substr(i + 2, close - i - 2);
      auto it = vars.find(name);
      if (it == vars.end())
        throw ParseError("undefined substitution variable '" + name + "'", lineno);
      out += it->second;
      i = close + 1;
      continue;
    }
    out += text[i];
    ++i;
  }
  return out;
}

ParamTree parse_hit(const std::string& text) {
  ParamTree tree;
  std::vector<ParamNode*> stack;  // open sections, outermost first

  auto current_params = [&]() -> std::vector<std::pair<std::string, std::string>>& {
    if (stack.empty()) return tree.toplevel;
    return stack.back()->params;
  };

  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError("malformed section marker '" + line + "'", lineno);
      const std::string inner = trim(line.substr(1, line.size() - 2));
      if (inner.empty() || inner == "../") {
        // close marker: '[]' closes a top section, '[../]' a nested one
        if (stack.empty()) throw ParseError("unmatched section close", lineno);
        if (inner.empty() && stack.size() != 1)
          throw ParseError("'[]' may only close a top-level section", lineno);
        if (inner == "../" && stack.size() < 2)
          throw ParseError("'[../]' may only close a nested section", lineno);
        stack.pop_back();
        continue;
      }
      std::string name = inner;
      bool nested = false;
      if (name.rfind("./", 0) == 0) {
        nested = true;
        name = name.substr(2);
      }
      if (!valid_key(name)) throw ParseError("invalid section name '" + name + "'", lineno);
      if (nested && stack.empty())
        throw ParseError("nested section '[./" + name + "]' at top level", lineno);
      if (!nested && !stack.empty())
        throw ParseError("top-level section '[" + name + "]' opened inside '" +
                             stack.back()->name + "'",
                         lineno);
      auto& siblings = stack.empty() ? tree.sections : stack.back()->children;
      for (const auto& s : siblings)
        if (s.name == name) throw ParseError("duplicate section '" + name + "'", lineno);
      siblings.push_back(ParamNode{name, {}, {}});
      stack.push_back(&siblings.back());
      continue;
    }

    const size_t eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value', got '" + line + "'", lineno);
    const std::string key = trim(line.substr(0, eq));
    std::string val = trim(line.substr(eq + 1));
    if (!valid_key(key)) throw ParseError("invalid key '" + key + "'", lineno);
    if (!val.empty() && val.front() == '\'') {
      if (val.size() < 2 || val.back() != '\'')
        throw ParseError("unterminated quoted value", lineno);
      val = val.substr(1, val.size() - 2);
    } else if (val.find('\'') != std::string::npos) {
      throw ParseError("stray quote in value", lineno);
    }
    auto& params = current_params();
    for (const auto& [k, v] : params)
      if (k == key) throw ParseError("duplicate key '" + key + "'", lineno);
    params.emplace_back(key, val);
  }
  if (!stack.empty())
    throw ParseError("unclosed section '" + stack.back()->name + "'", lineno);
  return tree;
}

namespace {

bool needs_quotes(const std::string& v) {
  if (v.empty()) return true;
  return v.find_first_of(" \t") != std::string::npos;
}

void render_params(std::ostringstream& out, const std::vector<std::pair<std::string, std::string>>& params,
                   const std::string& indent) {
  for (const auto& [k, v] : params) {
    out << indent << k << " = ";
    if (needs_quotes(v))
      out << '\'' << v << '\'';
    else
      out << v;
    out << "\n";
  }
}

void render_node(std::ostringstream& out, const ParamNode& node, int depth) {
  const std::string indent(2 * static_cast<size_t>(depth), ' ');
  const std::string inner(2 * static_cast<size_t>(depth + 1), ' ');
  out << indent << (depth == 0 ? "[" + node.name + "]" : "[./" + node.name + "]") << "\n";
  render_params(out, node.params, inner);
  for (const auto& c : node.children) render_node(out, c, depth + 1);
  out << indent << (depth == 0 ? "[]" : "[../]") << "\n";
}

}  // namespace

std::string render_hit(const ParamTree& tree) {
  std::ostringstream out;
  render_params(out, tree.toplevel, "");
  for (const auto& s : tree.sections) {
    out << "\n";
    render_node(out, s, 0);
  }
  return out.str();
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::istringstream in(value);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

}  // namespace insfem
