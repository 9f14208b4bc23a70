#ifndef CONTACTLAB_EXPR_HPP
#define CONTACTLAB_EXPR_HPP

#include <cctype>
#include <memory>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "contactlab/dual.hpp"
#include "contactlab/errors.hpp"

namespace contactlab {

/// Grammar:
///   expr   := term (('+'|'-') term)*
///   term   := factor (('*'|'/') factor)*
///   factor := base ('^' signed_integer)?
///   base   := number | ident | fn '(' expr ')' | '(' expr ')' | '-' base
/// Functions: sin cos tan sinh cosh exp ln sqrt abs.  Only integer
/// exponents; pi and e are reserved constants.
enum class AstKind { Constant, Variable, Neg, Add, Sub, Mul, Div, Pow, Call };

enum class Fn { Sin, Cos, Tan, Sinh, Cosh, Exp, Ln, Sqrt, Abs };

struct AstNode {
  AstKind kind;
  double constant = 0.0;          // Constant
  int var_index = -1;             // Variable (position in free_vars)
  std::string var_name;           // Variable
  long long exponent = 0;         // Pow
  Fn fn = Fn::Sin;                // Call
  std::unique_ptr<AstNode> lhs;   // unary operand lives here
  std::unique_ptr<AstNode> rhs;
};

namespace detail {

struct Token {
  enum Kind { Number, Ident, Op, LParen, RParen, End } kind;
  std::string text;
  double number = 0.0;
  std::size_t pos = 0;
};

inline std::vector<Token> tokenize(std::string_view src) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      std::size_t start = i;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) ++i;
      }
      // exponent part only when digits follow, so "2*e" keeps e as an identifier
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
        if (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {
          ++j;
          while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
          i = j;
        }
      }
      Token t{Token::Number, std::string(src.substr(start, i - start)), 0.0, start};
      t.number = std::stod(t.text);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = i;
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
        ++i;
      }
      out.push_back({Token::Ident, std::string(src.substr(start, i - start)), 0.0, start});
      continue;
    }
    if (c == '(') {
      out.push_back({Token::LParen, "(", 0.0, i});
      ++i;
      continue;
    }
    if (c == ')') {
      out.push_back({Token::RParen, ")", 0.0, i});
      ++i;
      continue;
    }
    if (c == '+' || c == '-' || c == '*' || c == '/' || c == '^') {
      out.push_back({Token::Op, std::string(1, c), 0.0, i});
      ++i;
      continue;
    }
    throw SyntaxError(i, "a token (found '" + std::string(1, c) + "')");
  }
  out.push_back({Token::End, "", 0.0, src.size()});
  return out;
}

inline bool fn_from_name(const std::string& name, Fn& fn) {
  if (name == "sin") fn = Fn::Sin;
  else if (name == "cos") fn = Fn::Cos;
  else if (name == "tan") fn = Fn::Tan;
  else if (name == "sinh") fn = Fn::Sinh;
  else if (name == "cosh") fn = Fn::Cosh;
  else if (name == "exp") fn = Fn::Exp;
  else if (name == "ln") fn = Fn::Ln;
  else if (name == "sqrt") fn = Fn::Sqrt;
  else if (name == "abs") fn = Fn::Abs;
  else return false;
  return true;
}

inline const char* fn_name(Fn fn) {
  switch (fn) {
    case Fn::Sin: return "sin";
    case Fn::Cos: return "cos";
    case Fn::Tan: return "tan";
    case Fn::Sinh: return "sinh";
    case Fn::Cosh: return "cosh";
    case Fn::Exp: return "exp";
    case Fn::Ln: return "ln";
    case Fn::Sqrt: return "sqrt";
    case Fn::Abs: return "abs";
  }
  return "?";
}

class Parser {
 public:
  Parser(std::vector<Token> tokens, std::span<const std::string> vars)
      : toks_(std::move(tokens)), vars_(vars) {}

  std::unique_ptr<AstNode> parse() {
    auto e = parse_expr();
    if (cur().kind != Token::End) throw SyntaxError(cur().pos, "end of input");
    return e;
  }

 private:
  const Token& cur() const { return toks_[idx_]; }
  void advance() { ++idx_; }
  bool accept_op(char op) {
    if (cur().kind == Token::Op && cur().text[0] == op) {
      advance();
      return true;
    }
    return false;
  }

  std::unique_ptr<AstNode> parse_expr() {
    auto lhs = parse_term();
    for (;;) {
      if (accept_op('+')) lhs = binary(AstKind::Add, std::move(lhs), parse_term());
      else if (accept_op('-')) lhs = binary(AstKind::Sub, std::move(lhs), parse_term());
      else return lhs;
    }
  }

  std::unique_ptr<AstNode> parse_term() {
    auto lhs = parse_factor();
    for (;;) {
      if (accept_op('*')) lhs = binary(AstKind::Mul, std::move(lhs), parse_factor());
      else if (accept_op('/')) lhs = binary(AstKind::Div, std::move(lhs), parse_factor());
      else return lhs;
    }
  }

  std::unique_ptr<AstNode> parse_factor() {
    auto base = parse_base();
    if (accept_op('^')) {
      bool neg = false;
      if (accept_op('-')) neg = true;
      if (cur().kind != Token::Number) throw SyntaxError(cur().pos, "an integer exponent");
      const Token& t = cur();
      if (t.text.find('.') != std::string::npos || t.text.find('e') != std::string::npos ||
          t.text.find('E') != std::string::npos) {
        throw SyntaxError(t.pos, "an integer exponent");
      }
      long long k = std::stoll(t.text);
      advance();
      auto node = std::make_unique<AstNode>();
      node->kind = AstKind::Pow;
      node->exponent = neg ? -k : k;
      node->lhs = std::move(base);
      return node;
    }
    return base;
  }

  std::unique_ptr<AstNode> parse_base() {
    const Token& t = cur();
    switch (t.kind) {
      case Token::Number: {
        auto node = std::make_unique<AstNode>();
        node->kind = AstKind::Constant;
        node->constant = t.number;
        advance();
        return node;
      }
      case Token::Ident: {
        std::string name = t.text;
        advance();
        Fn fn;
        if (cur().kind == Token::LParen && fn_from_name(name, fn)) {
          advance();
          auto arg = parse_expr();
          if (cur().kind != Token::RParen) throw SyntaxError(cur().pos, "')'");
          advance();
          auto node = std::make_unique<AstNode>();
          node->kind = AstKind::Call;
          node->fn = fn;
          node->lhs = std::move(arg);
          return node;
        }
        if (name == "pi") {
          auto node = std::make_unique<AstNode>();
          node->kind = AstKind::Constant;
          node->constant = 3.14159265358979323846;
          return node;
        }
        if (name == "e") {
          auto node = std::make_unique<AstNode>();
          node->kind = AstKind::Constant;
          node->constant = 2.71828182845904523536;
          return node;
        }
        for (std::size_t i = 0; i < vars_.size(); ++i) {
          if (vars_[i] == name) {
            auto node = std::make_unique<AstNode>();
            node->kind = AstKind::Variable;
            node->var_index = static_cast<int>(i);
            node->var_name = name;
            return node;
          }
        }
        throw UnknownIdentifier(name);
      }
      case Token::LParen: {
        advance();
        auto inner = parse_expr();
        if (cur().kind != Token::RParen) throw SyntaxError(cur().pos, "')'");
        advance();
        return inner;
      }
      case Token::Op:
        if (t.text == "-") {
          advance();
          auto node = std::make_unique<AstNode>();
          node->kind = AstKind::Neg;
          node->lhs = parse_base();
          return node;
        }
        throw SyntaxError(t.pos, "a value");
      default:
        throw SyntaxError(t.pos, "a value");
    }
  }

  static std::unique_ptr<AstNode> binary(AstKind kind, std::unique_ptr<AstNode> lhs,
                                         std::unique_ptr<AstNode> rhs) {
    auto node = std::make_unique<AstNode>();
    node->kind = kind;
    node->lhs = std::move(lhs);
    node->rhs = std::move(rhs);
    return node;
  }

  std::vector<Token> toks_;
  std::span<const std::string> vars_;
  std::size_t idx_ = 0;
};

template <class S>
S eval_node(const AstNode& n, std::span<const S> point) {
  switch (n.kind) {
    case AstKind::Constant: return S(n.constant);
    case AstKind::Variable: return point[static_cast<std::size_t>(n.var_index)];
    case AstKind::Neg: return -eval_node(*n.lhs, point);
    case AstKind::Add: return eval_node(*n.lhs, point) + eval_node(*n.rhs, point);
    case AstKind::Sub: return eval_node(*n.lhs, point) - eval_node(*n.rhs, point);
    case AstKind::Mul: return eval_node(*n.lhs, point) * eval_node(*n.rhs, point);
    case AstKind::Div: return checked_div(eval_node(*n.lhs, point), eval_node(*n.rhs, point));
    case AstKind::Pow: return ipow(eval_node(*n.lhs, point), n.exponent);
    case AstKind::Call: {
      S arg = eval_node(*n.lhs, point);
      switch (n.fn) {
        case Fn::Sin: return sin(arg);
        case Fn::Cos: return cos(arg);
        case Fn::Tan: return tan(arg);
        case Fn::Sinh: return sinh(arg);
        case Fn::Cosh: return cosh(arg);
        case Fn::Exp: return exp(arg);
        case Fn::Ln: return log_checked(arg);
        case Fn::Sqrt: return sqrt_checked(arg);
        case Fn::Abs: return abs(arg);
      }
      throw DomainError("unreachable function kind");
    }
  }
  throw DomainError("unreachable node kind");
}

inline void print_node(const AstNode& n, std::ostringstream& out) {
  switch (n.kind) {
    case AstKind::Constant: {
      std::ostringstream tmp;
      tmp.precision(17);
      tmp << n.constant;
      out << tmp.str();
      return;
    }
    case AstKind::Variable: out << n.var_name; return;
    case AstKind::Neg:
      out << "(-";
      print_node(*n.lhs, out);
      out << ")";
      return;
    case AstKind::Add:
    case AstKind::Sub:
    case AstKind::Mul:
    case AstKind::Div: {
      const char* op = n.kind == AstKind::Add   ? "+"
                       : n.kind == AstKind::Sub ? "-"
                       : n.kind == AstKind::Mul ? "*"
                                                : "/";
      out << "(";
      print_node(*n.lhs, out);
      out << op;
      print_node(*n.rhs, out);
      out << ")";
      return;
    }
    case AstKind::Pow:
      out << "(";
      print_node(*n.lhs, out);
      out << "^" << n.exponent << ")";
      return;
    case AstKind::Call:
      out << fn_name(n.fn) << "(";
      print_node(*n.lhs, out);
      out << ")";
      return;
  }
}

inline bool nodes_equal(const AstNode& x, const AstNode& y) {
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case AstKind::Constant: return x.constant == y.constant;
    case AstKind::Variable: return x.var_index == y.var_index && x.var_name == y.var_name;
    case AstKind::Neg: return nodes_equal(*x.lhs, *y.lhs);
    case AstKind::Pow: return x.exponent == y.exponent && nodes_equal(*x.lhs, *y.lhs);
    case AstKind::Call: return x.fn == y.fn && nodes_equal(*x.lhs, *y.lhs);
    default: return nodes_equal(*x.lhs, *y.lhs) && nodes_equal(*x.rhs, *y.rhs);
  }
}

}  // namespace detail

/// A parsed coefficient function over an ordered list of free variables.
/// Immutable after parse; evaluation is pure and thread-safe.
class Expression {
 public:
  Expression(std::shared_ptr<const AstNode> ast, std::vector<std::string> free_vars)
      : ast_(std::move(ast)), free_vars_(std::move(free_vars)) {}

  const std::vector<std::string>& free_vars() const { return free_vars_; }
  const AstNode& ast() const { return *ast_; }

  template <class S>
  S eval(std::span<const S> point) const {
    if (point.size() != free_vars_.size()) {
      throw DimensionMismatch("expression expects " + std::to_string(free_vars_.size()) +
                              " coordinates, got " + std::to_string(point.size()));
    }
    return detail::eval_node<S>(*ast_, point);
  }

  std::string print() const {
    std::ostringstream out;
    detail::print_node(*ast_, out);
    return out.str();
  }

  bool structurally_equal(const Expression& other) const {
    return detail::nodes_equal(*ast_, *other.ast_);
  }

 private:
  std::shared_ptr<const AstNode> ast_;
  std::vector<std::string> free_vars_;
};

inline Expression parse(std::string_view source, std::vector<std::string> allowed_vars) {
  if (source.empty()) throw SyntaxError(0, "a nonempty expression");
  detail::Parser p(detail::tokenize(source), allowed_vars);
  std::shared_ptr<const AstNode> ast{p.parse().release()};
  return Expression(std::move(ast), std::move(allowed_vars));
}

/// Value and full gradient by one forward-mode pass per variable.
inline std::pair<double, std::vector<double>> eval_with_gradient(
    const Expression& e, std::span<const double> point) {
  const std::size_t n = point.size();
  std::vector<double> grad(n, 0.0);
  double value = e.eval<double>(point);
  std::vector<Dual1> dp(n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < n; ++i) dp[i] = Dual1(point[i], i == j ? 1.0 : 0.0);
    grad[j] = e.eval<Dual1>(std::span<const Dual1>(dp)).b;
  }
  return {value, std::move(grad)};
}

}  // namespace contactlab

#endif
