#pragma once

// Small closed-form expression evaluator for scenario trace definitions.
// Grammar: sum of products with unary minus, '^' for powers, function calls,
// named variables resolved at evaluation time.

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace inflow::expr {

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

class EvalError : public std::runtime_error {
 public:
  explicit EvalError(const std::string& msg) : std::runtime_error(msg) {}
};

using VarMap = std::map<std::string, double>;

namespace detail {

struct Node {
  enum class Kind { Const, Var, Unary, Binary, Call } kind;
  double value = 0.0;
  std::string name;
  char op = 0;
  std::vector<std::unique_ptr<Node>> args;
};

using NodePtr = std::unique_ptr<Node>;

// C^inf bump: exp(-1/(1-t^2)) for |t|<1, 0 outside. Normalized to bump(0)=1.
inline double bump(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

inline double call_fn(const std::string& name, const std::vector<double>& a) {
  auto need = [&](std::size_t n) {
    if (a.size() != n)
      throw EvalError("function '" + name + "' expects " + std::to_string(n) + " argument(s)");
  };
  if (name == "sin") { need(1); return std::sin(a[0]); }
  if (name == "cos") { need(1); return std::cos(a[0]); }
  if (name == "tan") { need(1); return std::tan(a[0]); }
  if (name == "exp") { need(1); return std::exp(a[0]); }
  if (name == "log") { need(1); return std::log(a[0]); }
  if (name == "sqrt") { need(1); return std::sqrt(a[0]); }
  if (name == "abs") { need(1); return std::abs(a[0]); }
  if (name == "tanh") { need(1); return std::tanh(a[0]); }
  if (name == "bump") { need(1); return bump(a[0]); }
  if (name == "pow") { need(2); return std::pow(a[0], a[1]); }
  if (name == "min") { need(2); return std::min(a[0], a[1]); }
  if (name == "max") { need(2); return std::max(a[0], a[1]); }
  throw EvalError("unknown function '" + name + "'");
}

class Parser {
 public:
  explicit Parser(const std::string& src) : src_(src) {}

  NodePtr parse() {
    auto n = parse_sum();
    skip_ws();
    if (pos_ != src_.size())
      throw ParseError("unexpected character '" + std::string(1, src_[pos_]) +
                       "' at position " + std::to_string(pos_));
    return n;
  }

 private:
  NodePtr parse_sum() {
    auto lhs = parse_product();
    for (;;) {
      skip_ws();
      if (peek() == '+' || peek() == '-') {
        const char op = take();
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::Binary;
        n->op = op;
        n->args.push_back(std::move(lhs));
        n->args.push_back(parse_product());
        lhs = std::move(n);
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_product() {
    auto lhs = parse_unary();
    for (;;) {
      skip_ws();
      if (peek() == '*' || peek() == '/') {
        const char op = take();
        auto n = std::make_unique<Node>();
        n->kind = Node::Kind::Binary;
        n->op = op;
        n->args.push_back(std::move(lhs));
        n->args.push_back(parse_unary());
        lhs = std::move(n);
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    skip_ws();
    if (peek() == '-') {
      take();
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::Unary;
      n->op = '-';
      n->args.push_back(parse_unary());
      return n;
    }
    if (peek() == '+') take();
    return parse_power();
  }

  NodePtr parse_power() {
    auto base = parse_primary();
    skip_ws();
    if (peek() == '^') {
      take();
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::Binary;
      n->op = '^';
      n->args.push_back(std::move(base));
      n->args.push_back(parse_unary());  // right-associative
      return n;
    }
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    const char c = peek();
    if (c == '(') {
      take();
      auto n = parse_sum();
      expect(')');
      return n;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_ident();
    throw ParseError("expected a value at position " + std::to_string(pos_));
  }

  NodePtr parse_number() {
    std::size_t end = pos_;
    while (end < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[end])) || src_[end] == '.' ||
            src_[end] == 'e' || src_[end] == 'E' ||
            ((src_[end] == '+' || src_[end] == '-') && end > pos_ &&
             (src_[end - 1] == 'e' || src_[end - 1] == 'E'))))
      ++end;
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Const;
    try {
      n->value = std::stod(src_.substr(pos_, end - pos_));
    } catch (const std::exception&) {
      throw ParseError("bad number at position " + std::to_string(pos_));
    }
    pos_ = end;
    return n;
  }

  NodePtr parse_ident() {
    std::size_t end = pos_;
    while (end < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
      ++end;
    std::string name = src_.substr(pos_, end - pos_);
    pos_ = end;
    skip_ws();
    if (peek() == '(') {
      take();
      auto n = std::make_unique<Node>();
      n->kind = Node::Kind::Call;
      n->name = std::move(name);
      skip_ws();
      if (peek() != ')') {
        n->args.push_back(parse_sum());
        skip_ws();
        while (peek() == ',') {
          take();
          n->args.push_back(parse_sum());
          skip_ws();
        }
      }
      expect(')');
      return n;
    }
    auto n = std::make_unique<Node>();
    n->kind = Node::Kind::Var;
    n->name = std::move(name);
    return n;
  }

  char peek() const { return pos_ < src_.size() ? src_[pos_] : '\0'; }
  char take() { return src_[pos_++]; }
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }
  void expect(char c) {
    skip_ws();
    if (peek() != c)
      throw ParseError(std::string("expected '") + c + "' at position " + std::to_string(pos_));
    take();
  }

  const std::string& src_;
  std::size_t pos_ = 0;
};

inline double eval_node(const Node& n, const VarMap& vars) {
  switch (n.kind) {
    case Node::Kind::Const:
      return n.value;
    case Node::Kind::Var: {
      if (n.name == "pi") return M_PI;
      if (n.name == "e") return M_E;
      auto it = vars.find(n.name);
      if (it == vars.end()) throw EvalError("unknown variable '" + n.name + "'");
      return it->second;
    }
    case Node::Kind::Unary:
      return -eval_node(*n.args[0], vars);
    case Node::Kind::Binary: {
      const double a = eval_node(*n.args[0], vars);
      const double b = eval_node(*n.args[1], vars);
      switch (n.op) {
        case '+': return a + b;
        case '-': return a - b;
        case '*': return a * b;
        case '/': return a / b;
        case '^': return std::pow(a, b);
      }
      throw EvalError("bad operator");
    }
    case Node::Kind::Call: {
      std::vector<double> a;
      a.reserve(n.args.size());
      for (const auto& arg : n.args) a.push_back(eval_node(*arg, vars));
      return call_fn(n.name, a);
    }
  }
  throw EvalError("bad node");
}

}  // namespace detail

/// A parsed closed-form expression; evaluate with named variables.
class Expression {
 public:
  Expression() = default;
  explicit Expression(const std::string& src)
      : src_(src), root_(detail::Parser(src).parse()) {}

  double operator()(const VarMap& vars) const {
    if (!root_) throw EvalError("empty expression");
    return detail::eval_node(*root_, vars);
  }

  const std::string& source() const { return src_; }
  bool empty() const { return !root_; }

 private:
  std::string src_;
  std::shared_ptr<const detail::Node> root_;
};

}  // namespace inflow::expr
