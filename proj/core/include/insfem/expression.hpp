#pragma once

#include <map>
#include <memory>
#include <string>

#include "insfem/types.hpp"

namespace insfem {

// Runtime math expression over x, y, z, t with +,-,*,/,^ (right-assoc),
// unary minus, parentheses and the functions sqrt, sin, cos, exp, log, abs,
// min, max, coth. Named constants fold at parse time; unknown identifiers
// are parse errors.
class Expression {
 public:
  Expression() = default;

  static const std::map<std::string, double>& default_constants();  // pi, e

  static Expression parse(const std::string& src);
  static Expression parse(const std::string& src, const std::map<std::string, double>& constants);

  double eval(double x, double y = 0.0, double z = 0.0, double t = 0.0) const;
  bool valid() const { return root_ != nullptr; }
  const std::string& source() const { return src_; }

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string src_;
};

}  // namespace insfem
