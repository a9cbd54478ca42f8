#include "insfem/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <vector>

namespace insfem {

struct Expression::Node {
  enum Kind { NUM, VAR, NEG, ADD, SUB, MUL, DIV, POW, CALL } kind;
  double num = 0.0;
  int var = 0;  // 0..3 -> x,y,z,t
  int fn = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;
using Node = Expression::Node;

enum Fn { FN_SQRT, FN_SIN, FN_COS, FN_EXP, FN_LOG, FN_ABS, FN_MIN, FN_MAX, FN_COTH };

struct FnInfo {
  const char* name;
  int arity;
};
constexpr FnInfo kFns[] = {{"sqrt", 1}, {"sin", 1}, {"cos", 1}, {"exp", 1}, {"log", 1},
                           {"abs", 1},  {"min", 2}, {"max", 2}, {"coth", 1}};

NodePtr make(Node n) { return std::make_shared<const Node>(std::move(n)); }

class Parser {
 public:
  Parser(const std::string& src, const std::map<std::string, double>& constants)
      : s_(src), constants_(constants) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("expression error: " + msg + " in '" + s_ + "'",
                     1, static_cast<int>(pos_) + 1);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (consume('+'))
        lhs = make({Node::ADD, 0, 0, 0, lhs, term()});
      else if (consume('-'))
        lhs = make({Node::SUB, 0, 0, 0, lhs, term()});
      else
        return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (consume('*'))
        lhs = make({Node::MUL, 0, 0, 0, lhs, unary()});
      else if (consume('/'))
        lhs = make({Node::DIV, 0, 0, 0, lhs, unary()});
      else
        return lhs;
    }
  }

  NodePtr unary() {
    if (consume('-')) return make({Node::NEG, 0, 0, 0, unary(), nullptr});
    if (consume('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (consume('^')) return make({Node::POW, 0, 0, 0, base, unary()});
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) fail("unexpected end of expression");
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!consume(')')) fail("missing ')'");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    fail(std::string("unexpected character '") + c + "'");
  }

  NodePtr number() {
    const char* start = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(start, &end);
    if (end == start) fail("malformed number");
    pos_ += static_cast<size_t>(end - start);
    return make({Node::NUM, v, 0, 0, nullptr, nullptr});
  }

  NodePtr identifier() {
    const size_t start = pos_;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    const std::string name = s_.substr(start, pos_ - start);

    for (int f = 0; f < static_cast<int>(std::size(kFns)); ++f) {
      if (name == kFns[f].name) {
        if (!consume('(')) fail("expected '(' after '" + name + "'");
        NodePtr a = expr();
        NodePtr b;
        if (kFns[f].arity == 2) {
          if (!consume(',')) fail("'" + name + "' takes two arguments");
          b = expr();
        }
        if (!consume(')')) fail("missing ')' after arguments of '" + name + "'");
        return make({Node::CALL, 0, 0, f, a, b});
      }
    }
    if (name == "x") return make({Node::VAR, 0, 0, 0, nullptr, nullptr});
    if (name == "y") return make({Node::VAR, 0, 1, 0, nullptr, nullptr});
    if (name == "z") return make({Node::VAR, 0, 2, 0, nullptr, nullptr});
    if (name == "t") return make({Node::VAR, 0, 3, 0, nullptr, nullptr});
    auto it = constants_.find(name);
    if (it != constants_.end()) return make({Node::NUM, it->second, 0, 0, nullptr, nullptr});
    fail("unknown identifier '" + name + "'");
  }

  const std::string& s_;
  const std::map<std::string, double>& constants_;
  size_t pos_ = 0;
};

double eval_node(const Node& n, const double v[4]) {
  switch (n.kind) {
    case Node::NUM:
      return n.num;
    case Node::VAR:
      return v[n.var];
    case Node::NEG:
      return -eval_node(*n.a, v);
    case Node::ADD:
      return eval_node(*n.a, v) + eval_node(*n.b, v);
    case Node::SUB:
      return eval_node(*n.a, v) - eval_node(*n.b, v);
    case Node::MUL:
      return eval_node(*n.a, v) * eval_node(*n.b, v);
    case Node::DIV: {
      const double d = eval_node(*n.b, v);
      if (d == 0.0) throw EvalError("division by zero");
      return eval_node(*n.a, v) / d;
    }
    case Node::POW:
      return std::pow(eval_node(*n.a, v), eval_node(*n.b, v));
    case Node::CALL: {
      const double a = eval_node(*n.a, v);
      switch (n.fn) {
        case FN_SQRT:
          if (a < 0) throw EvalError("sqrt of negative value");
          return std::sqrt(a);
        case FN_SIN:
          return std::sin(a);
        case FN_COS:
          return std::cos(a);
        case FN_EXP:
          return std::exp(a);
        case FN_LOG:
          if (a <= 0) throw EvalError("log of non-positive value");
          return std::log(a);
        case FN_ABS:
          return std::abs(a);
        case FN_MIN:
          return std::min(a, eval_node(*n.b, v));
        case FN_MAX:
          return std::max(a, eval_node(*n.b, v));
        case FN_COTH: {
          if (a == 0.0) throw EvalError("coth of zero");
          return std::cosh(a) / std::sinh(a);
        }
      }
      return 0.0;
    }
  }
  return 0.0;
}

}  // namespace

const std::map<std::string, double>& Expression::default_constants() {
  static const std::map<std::string, double> k{{"pi", 3.14159265358979323846},
                                               {"e", 2.71828182845904523536}};
  return k;
}

Expression Expression::parse(const std::string& src) { return parse(src, default_constants()); }

Expression Expression::parse(const std::string& src, const std::map<std::string, double>& constants) {
  Expression e;
  e.root_ = Parser(src, constants).parse();
  e.src_ = src;
  return e;
}

double Expression::eval(double x, double y, double z, double t) const {
  if (!root_) throw EvalError("empty expression");
  const double v[4] = {x, y, z, t};
  const double r = eval_node(*root_, v);
  return r;
}

}  // namespace insfem
