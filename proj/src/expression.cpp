#include "cavity/expression.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "cavity/error.hpp"

namespace cavity {
namespace {

constexpr int kMaxDepth = 200;

struct FunctionInfo {
  const char* name;
  std::size_t arity;
};
constexpr FunctionInfo kFunctions[] = {{"sin", 1}, {"cos", 1}, {"exp", 1},
                                       {"abs", 1}, {"max", 2}, {"min", 2}};

const FunctionInfo* find_function(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (name == f.name) return &f;
  }
  return nullptr;
}

// expr    := term (('+' | '-') term)*
// term    := unary (('*' | '/') unary)*
// unary   := '-' unary | power
// power   := primary ('^' unary)?
// primary := number | x | y | func '(' expr (',' expr)* ')' | '(' expr ')'
class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse() {
    Expr e = expr();
    skip();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::SyntaxError, std::to_string(pos_) + ": " + what);
  }

  void skip() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(char c) {
    skip();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  struct Depth {
    explicit Depth(Parser& p) : p(p) {
      if (++p.depth_ > kMaxDepth) p.fail("expression nested too deeply");
    }
    ~Depth() { --p.depth_; }
    Parser& p;
  };

  Expr expr() {
    Depth d(*this);
    Expr lhs = term();
    for (;;) {
      if (eat('+')) {
        lhs = Expr::binary(Expr::Kind::Add, lhs, term());
      } else if (eat('-')) {
        lhs = Expr::binary(Expr::Kind::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = unary();
    for (;;) {
      if (eat('*')) {
        lhs = Expr::binary(Expr::Kind::Mul, lhs, unary());
      } else if (eat('/')) {
        lhs = Expr::binary(Expr::Kind::Div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  Expr unary() {
    Depth d(*this);
    if (eat('-')) return Expr::unary(Expr::Kind::Neg, unary());
    return power();
  }

  Expr power() {
    Expr base = primary();
    if (eat('^')) return Expr::binary(Expr::Kind::Pow, base, unary());
    return base;
  }

  Expr primary() {
    skip();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    if (eat('(')) {
      Expr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) {
      ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        while (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) ++p;
        pos_ = p;
      }
    }
    double v = 0.0;
    const auto [end, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc() || end != src_.data() + pos_) {
      pos_ = start;
      fail("malformed number");
    }
    return Expr::number(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && std::isalnum(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (name == "x") return Expr::var_x();
    if (name == "y") return Expr::var_y();
    const FunctionInfo* f = find_function(name);
    if (!f) {
      pos_ = start;
      fail("unknown identifier '" + std::string(name) + "'");
    }
    if (!eat('(')) fail("expected '(' after " + std::string(name));
    std::vector<Expr> args;
    args.push_back(expr());
    while (eat(',')) args.push_back(expr());
    if (!eat(')')) fail("expected ')'");
    if (args.size() != f->arity) {
      fail(std::string(name) + " takes " + std::to_string(f->arity) + " argument(s)");
    }
    return Expr::call(std::string(name), std::move(args));
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Expr Expr::number(double v) { return Expr(std::make_shared<const Node>(Node{Kind::Number, v, {}, {}})); }
Expr Expr::var_x() { return Expr(std::make_shared<const Node>(Node{Kind::VarX, 0.0, {}, {}})); }
Expr Expr::var_y() { return Expr(std::make_shared<const Node>(Node{Kind::VarY, 0.0, {}, {}})); }

Expr Expr::unary(Kind kind, Expr arg) {
  return Expr(std::make_shared<const Node>(Node{kind, 0.0, {}, {std::move(arg)}}));
}

Expr Expr::binary(Kind kind, Expr lhs, Expr rhs) {
  return Expr(std::make_shared<const Node>(Node{kind, 0.0, {}, {std::move(lhs), std::move(rhs)}}));
}

Expr Expr::call(std::string name, std::vector<Expr> args) {
  return Expr(std::make_shared<const Node>(Node{Kind::Call, 0.0, std::move(name), std::move(args)}));
}

double Expr::eval(double x, double y) const {
  const Node& n = *node_;
  switch (n.kind) {
    case Kind::Number: return n.value;
    case Kind::VarX: return x;
    case Kind::VarY: return y;
    case Kind::Neg: return -n.args[0].eval(x, y);
    case Kind::Add: return n.args[0].eval(x, y) + n.args[1].eval(x, y);
    case Kind::Sub: return n.args[0].eval(x, y) - n.args[1].eval(x, y);
    case Kind::Mul: return n.args[0].eval(x, y) * n.args[1].eval(x, y);
    case Kind::Div: {
      const double num = n.args[0].eval(x, y);
      const double den = n.args[1].eval(x, y);
      if (den == 0.0) throw Error(Errc::DivisionByZero, "division by zero at (" + format_number(x) + ", " + format_number(y) + ")");
      return num / den;
    }
    case Kind::Pow: return std::pow(n.args[0].eval(x, y), n.args[1].eval(x, y));
    case Kind::Call: {
      const double a = n.args[0].eval(x, y);
      if (n.name == "sin") return std::sin(a);
      if (n.name == "cos") return std::cos(a);
      if (n.name == "exp") return std::exp(a);
      if (n.name == "abs") return std::abs(a);
      const double b = n.args[1].eval(x, y);
      return n.name == "max" ? std::max(a, b) : std::min(a, b);
    }
  }
  return 0.0;
}

std::string Expr::print() const {
  const Node& n = *node_;
  auto bin = [&](const char* op) {
    return "(" + n.args[0].print() + " " + op + " " + n.args[1].print() + ")";
  };
  switch (n.kind) {
    case Kind::Number: {
      // Negative literals only come from constructed trees; keep them reparseable.
      const std::string s = format_number(n.value);
      return n.value < 0.0 || std::signbit(n.value) ? "(" + s + ")" : s;
    }
    case Kind::VarX: return "x";
    case Kind::VarY: return "y";
    case Kind::Neg: return "(-" + n.args[0].print() + ")";
    case Kind::Add: return bin("+");
    case Kind::Sub: return bin("-");
    case Kind::Mul: return bin("*");
    case Kind::Div: return bin("/");
    case Kind::Pow: return bin("^");
    case Kind::Call: {
      std::string s = n.name + "(";
      for (std::size_t k = 0; k < n.args.size(); ++k) {
        if (k) s += ", ";
        s += n.args[k].print();
      }
      return s + ")";
    }
  }
  return {};
}

Expr parse_expression(std::string_view src) { return Parser(src).parse(); }

}  // namespace cavity
