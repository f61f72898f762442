#pragma once

#include <memory>
#include <string>
#include <string_view>

#include "pqlab/matrix.hpp"

namespace pqlab {

/// Scalar field x -> R written in a tiny arithmetic grammar.
///
///   expr    := term (('+' | '-') term)*
///   term    := unary (('*' | '/') unary)*
///   unary   := ('-' | '+') unary | power
///   power   := primary ('^' unary)?
///   primary := number | name | name '(' expr (',' expr)* ')' | '(' expr ')'
///
/// Names: x1, x2 (aliases x, y), pi. Functions: abs, sqrt, exp, log, sin,
/// cos, atan2(y, x), max, min, dist_corner(cx, cy), dist_quadrant(cx, cy, sx, sy).
/// dist_quadrant measures the distance to {sx(x1-cx) >= 0, sy(x2-cy) >= 0}.
class Expression {
 public:
  /// Zero field.
  Expression();

  static Expression parse(std::string_view text);
  static Expression constant(double value);

  double operator()(const Point& x) const;
  const std::string& text() const { return text_; }
  bool is_constant() const;

  struct Node;

 private:
  std::shared_ptr<const Node> root_;
  std::string text_;
};

}  // namespace pqlab
