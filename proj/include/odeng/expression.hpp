#pragma once

#include "odeng/linalg.hpp"

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

namespace odeng {

// Arithmetic expression over the time variable `t` and parameters b1..bp.
//
// Grammar (precedence climbing):
//   expr    := term (('+' | '-') term)*            left-associative
//   term    := unary (('*' | '/') unary)*          left-associative
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?                right-associative
//   primary := number | 't' | 'b' digits | func '(' expr ')' | '(' expr ')'
//   func    := exp | log | sqrt
//
// Unary minus binds looser than '^', so -t^2 == -(t^2); function application
// binds tighter than '^', so exp(t)^2 == (exp(t))^2.
class Expression {
 public:
  struct Node;

  // Throws ParseError (with character offset) on malformed input or when a
  // parameter index is outside 1..n_params.
  static Expression parse(std::string_view text, std::size_t n_params);

  double evaluate(double t, const Vector& b) const;

  // Fully parenthesized rendering that parses back to an equivalent tree.
  std::string to_string() const;

  // Largest parameter index referenced (0 when none).
  std::size_t max_parameter() const;

  const std::string& source() const noexcept { return source_; }

 private:
  explicit Expression(std::shared_ptr<const Node> root, std::string source)
      : root_(std::move(root)), source_(std::move(source)) {}

  std::shared_ptr<const Node> root_;
  std::string source_;
};

}  // namespace odeng
