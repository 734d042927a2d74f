#include "linsys/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>

namespace linsys {

struct Expr::Node {
  enum class Op { Literal, Mean, Var, Add, Sub, Mul, Div, Pow, Neg };
  Op op;
  double value = 0.0;  // Literal
  Index index = 0;     // Mean
  std::shared_ptr<const Node> lhs, rhs;
};

namespace {

using Node = Expr::Node;
using NodePtr = std::shared_ptr<const Node>;

NodePtr make(Node::Op op, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  Parser(const std::string& s, Index arity) : s_(s), arity_(arity) {}

  NodePtr run() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) fail("unexpected trailing input");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("expression error at position " +
                                std::to_string(pos_) + ": " + msg);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
      ++pos_;
  }

  bool eat(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  char peek() {
    skip_ws();
    return pos_ < s_.size() ? s_[pos_] : '\0';
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (eat('+')) lhs = make(Node::Op::Add, lhs, term());
      else if (eat('-')) lhs = make(Node::Op::Sub, lhs, term());
      else return lhs;
    }
  }

  NodePtr term() {
    NodePtr lhs = factor();
    for (;;) {
      if (eat('*')) lhs = make(Node::Op::Mul, lhs, factor());
      else if (eat('/')) lhs = make(Node::Op::Div, lhs, factor());
      else return lhs;
    }
  }

  NodePtr factor() {
    if (eat('-')) return make(Node::Op::Neg, factor());
    if (eat('+')) return factor();
    NodePtr base = atom();
    if (eat('^')) return make(Node::Op::Pow, base, factor());
    return base;
  }

  NodePtr atom() {
    const char c = peek();
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      if (!eat(')')) fail("expected ')'");
      return e;
    }
    if (c == 'm') {
      ++pos_;
      if (!eat('[')) fail("expected '[' after 'm'");
      skip_ws();
      std::size_t start = pos_;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
        ++pos_;
      if (pos_ == start) fail("expected index in m[...]");
      const long idx = std::strtol(s_.c_str() + start, nullptr, 10);
      if (!eat(']')) fail("expected ']'");
      if (idx < 0 || idx >= arity_)
        fail("mean index " + std::to_string(idx) + " out of range [0, " +
             std::to_string(arity_) + ")");
      auto n = std::make_shared<Node>();
      n->op = Node::Op::Mean;
      n->index = idx;
      return n;
    }
    if (c == 'v') {
      ++pos_;
      return make(Node::Op::Var);
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const char* begin = s_.c_str() + pos_;
      char* end = nullptr;
      const double val = std::strtod(begin, &end);
      if (end == begin) fail("invalid number");
      pos_ += static_cast<std::size_t>(end - begin);
      auto n = std::make_shared<Node>();
      n->op = Node::Op::Literal;
      n->value = val;
      return n;
    }
    fail("unexpected character");
  }

  const std::string& s_;
  Index arity_;
  std::size_t pos_ = 0;
};

double eval_node(const Node& n, const Vector& means, double v) {
  switch (n.op) {
    case Node::Op::Literal: return n.value;
    case Node::Op::Mean: return means(n.index);
    case Node::Op::Var: return v;
    case Node::Op::Add: return eval_node(*n.lhs, means, v) + eval_node(*n.rhs, means, v);
    case Node::Op::Sub: return eval_node(*n.lhs, means, v) - eval_node(*n.rhs, means, v);
    case Node::Op::Mul: return eval_node(*n.lhs, means, v) * eval_node(*n.rhs, means, v);
    case Node::Op::Div: return eval_node(*n.lhs, means, v) / eval_node(*n.rhs, means, v);
    case Node::Op::Pow: return std::pow(eval_node(*n.lhs, means, v), eval_node(*n.rhs, means, v));
    case Node::Op::Neg: return -eval_node(*n.lhs, means, v);
  }
  return 0.0;
}

bool node_uses_v(const Node& n) {
  if (n.op == Node::Op::Var) return true;
  if (n.lhs && node_uses_v(*n.lhs)) return true;
  if (n.rhs && node_uses_v(*n.rhs)) return true;
  return false;
}

}  // namespace

Expr Expr::parse(const std::string& source, Index arity) {
  Expr e;
  e.node_ = Parser(source, arity).run();
  e.source_ = source;
  return e;
}

double Expr::eval(const Vector& means, double v) const {
  require(node_ != nullptr, "Expr::eval on empty expression");
  return eval_node(*node_, means, v);
}

bool Expr::uses_v() const { return node_ && node_uses_v(*node_); }

}  // namespace linsys
