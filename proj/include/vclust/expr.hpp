#pragma once

#include <memory>
#include <string>

#include "vclust/types.hpp"

namespace vclust {

/// Scalar expression in the variables x1, x2 (and r2 = x1^2 + x2^2).
/// Grammar: + - * / ^, unary minus, parentheses, numeric literals, pi,
/// and the functions sin cos tan exp log sqrt abs tanh cosh sinh.
class Expression {
 public:
  explicit Expression(const std::string& text);
  double operator()(const Vec2& x) const;
  const std::string& text() const { return text_; }

  struct Node;

 private:
  std::string text_;
  std::shared_ptr<const Node> root_;
};

}  // namespace vclust
