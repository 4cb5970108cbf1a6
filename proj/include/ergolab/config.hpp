#pragma once

#include <istream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ergolab/rational.hpp"

namespace ergolab::config {

// Line-oriented structured text. Three line shapes:
//   name arg ... {      opens a nested block
//   }                   closes it
//   key value ...       an entry
// '#' starts a comment; blank lines are skipped. Keys and blocks may repeat;
// order is preserved.
struct Node {
  std::string name;
  std::vector<std::string> args;
  std::vector<std::pair<std::string, std::vector<std::string>>> entries;
  std::vector<Node> children;

  bool has(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return true;
    return false;
  }

  const std::vector<std::string>* find(const std::string& key) const {
    for (const auto& [k, v] : entries)
      if (k == key) return &v;
    return nullptr;
  }

  const std::vector<std::string>& values(const std::string& key) const {
    if (const auto* v = find(key)) return *v;
    throw std::invalid_argument("config: missing key '" + key + "' in block '" + name + "'");
  }

  std::string value(const std::string& key) const {
    const auto& v = values(key);
    if (v.size() != 1)
      throw std::invalid_argument("config: key '" + key + "' expects exactly one value");
    return v[0];
  }

  std::string value_or(const std::string& key, const std::string& fallback) const {
    const auto* v = find(key);
    if (!v) return fallback;
    if (v->size() != 1)
      throw std::invalid_argument("config: key '" + key + "' expects exactly one value");
    return (*v)[0];
  }

  long long integer(const std::string& key) const {
    try {
      return std::stoll(value(key));
    } catch (const std::exception&) {
      throw std::invalid_argument("config: key '" + key + "' is not an integer");
    }
  }

  long long integer_or(const std::string& key, long long fallback) const {
    return has(key) ? integer(key) : fallback;
  }

  Rational rational(const std::string& key) const { return parse_rational(value(key)); }

  std::vector<long long> integers(const std::string& key) const {
    std::vector<long long> out;
    for (const auto& tok : values(key)) {
      try {
        out.push_back(std::stoll(tok));
      } catch (const std::exception&) {
        throw std::invalid_argument("config: key '" + key + "' holds a non-integer token");
      }
    }
    return out;
  }

  std::vector<Rational> rationals(const std::string& key) const {
    std::vector<Rational> out;
    for (const auto& tok : values(key)) out.push_back(parse_rational(tok));
    return out;
  }

  const Node* find_child(const std::string& child_name) const {
    for (const auto& c : children)
      if (c.name == child_name) return &c;
    return nullptr;
  }

  const Node& child(const std::string& child_name) const {
    if (const auto* c = find_child(child_name)) return *c;
    throw std::invalid_argument("config: missing block '" + child_name + "' in '" + name + "'");
  }

  std::vector<const Node*> children_named(const std::string& child_name) const {
    std::vector<const Node*> out;
    for (const auto& c : children)
      if (c.name == child_name) out.push_back(&c);
    return out;
  }
};

namespace detail {
inline std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) {
    if (tok.front() == '#') break;
    toks.push_back(tok);
  }
  return toks;
}
}  // namespace detail

inline Node parse_config(std::istream& in) {
  Node root;
  root.name = "root";
  std::vector<Node*> stack{&root};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto toks = detail::tokenize(line);
    if (toks.empty()) continue;
    const auto where = [&] { return " (line " + std::to_string(lineno) + ")"; };
    if (toks.size() == 1 && toks[0] == "}") {
      if (stack.size() == 1) throw std::invalid_argument("config: unmatched '}'" + where());
      stack.pop_back();
      continue;
    }
    if (toks.back() == "{") {
      toks.pop_back();
      if (toks.empty()) throw std::invalid_argument("config: block without a name" + where());
      Node block;
      block.name = toks[0];
      block.args.assign(toks.begin() + 1, toks.end());
      stack.back()->children.push_back(std::move(block));
      stack.push_back(&stack.back()->children.back());
      continue;
    }
    std::vector<std::string> vals(toks.begin() + 1, toks.end());
    stack.back()->entries.emplace_back(toks[0], std::move(vals));
  }
  if (stack.size() != 1) throw std::invalid_argument("config: unclosed block at end of input");
  return root;
}

inline Node parse_config_text(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

}  // namespace ergolab::config
