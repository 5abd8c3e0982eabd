#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace cavity {

/// Expression tree over x, y with + - * / ^, unary minus and
/// sin, cos, exp, abs, max, min.
class Expr {
 public:
  enum class Kind { Number, VarX, VarY, Neg, Add, Sub, Mul, Div, Pow, Call };

  static Expr number(double v);
  static Expr var_x();
  static Expr var_y();
  static Expr unary(Kind kind, Expr arg);
  static Expr binary(Kind kind, Expr lhs, Expr rhs);
  static Expr call(std::string name, std::vector<Expr> args);

  Kind kind() const { return node_->kind; }
  double value() const { return node_->value; }
  const std::string& name() const { return node_->name; }
  const std::vector<Expr>& args() const { return node_->args; }

  /// Tree walk; throws DivisionByZero.
  double eval(double x, double y) const;
  /// Fully parenthesized text that parses back to the same tree.
  std::string print() const;

 private:
  struct Node {
    Kind kind = Kind::Number;
    double value = 0.0;
    std::string name;
    std::vector<Expr> args;
  };
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

/// Recursive descent; throws SyntaxError whose detail starts with the
/// 0-based character position.
Expr parse_expression(std::string_view src);

inline double eval_expression(const Expr& e, double x, double y) { return e.eval(x, y); }

}  // namespace cavity
