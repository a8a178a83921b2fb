#include "vclust/expr.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "vclust/error.hpp"

namespace vclust {

struct Expression::Node {
  enum Kind { Num, X1, X2, R2, Neg, Add, Sub, Mul, Div, Pow, Call } kind = Num;
  double value = 0.0;
  double (*fn)(double) = nullptr;
  std::shared_ptr<const Node> a, b;

  double eval(const Vec2& x) const {
    switch (kind) {
      case Num: return value;
      case X1: return x[0];
      case X2: return x[1];
      case R2: return x.squaredNorm();
      case Neg: return -a->eval(x);
      case Add: return a->eval(x) + b->eval(x);
      case Sub: return a->eval(x) - b->eval(x);
      case Mul: return a->eval(x) * b->eval(x);
      case Div: return a->eval(x) / b->eval(x);
      case Pow: return std::pow(a->eval(x), b->eval(x));
      case Call: return fn(a->eval(x));
    }
    return 0.0;
  }
};

namespace {

using NodePtr = std::shared_ptr<const Expression::Node>;

NodePtr make(Expression::Node::Kind k, NodePtr a = nullptr, NodePtr b = nullptr) {
  auto n = std::make_shared<Expression::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

struct Function {
  const char* name;
  double (*fn)(double);
};

const Function kFunctions[] = {
    {"sin", [](double v) { return std::sin(v); }},   {"cos", [](double v) { return std::cos(v); }},
    {"tan", [](double v) { return std::tan(v); }},   {"exp", [](double v) { return std::exp(v); }},
    {"log", [](double v) { return std::log(v); }},   {"sqrt", [](double v) { return std::sqrt(v); }},
    {"abs", [](double v) { return std::fabs(v); }},  {"tanh", [](double v) { return std::tanh(v); }},
    {"cosh", [](double v) { return std::cosh(v); }}, {"sinh", [](double v) { return std::sinh(v); }},
};

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  NodePtr parse() {
    NodePtr n = sum();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return n;
  }

 private:
  const std::string& s_;
  size_t pos_ = 0;

  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("b_expr: " + what + " at offset " + std::to_string(pos_) + " in \"" + s_ + "\"");
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr sum() {
    NodePtr n = product();
    for (;;) {
      if (eat('+')) n = make(Expression::Node::Add, n, product());
      else if (eat('-')) n = make(Expression::Node::Sub, n, product());
      else return n;
    }
  }
  NodePtr product() {
    NodePtr n = unary();
    for (;;) {
      if (eat('*')) n = make(Expression::Node::Mul, n, unary());
      else if (eat('/')) n = make(Expression::Node::Div, n, unary());
      else return n;
    }
  }
  NodePtr unary() {
    if (eat('-')) return make(Expression::Node::Neg, unary());
    if (eat('+')) return unary();
    return power();
  }
  // right associative; binds tighter than unary minus on its left
  NodePtr power() {
    NodePtr base = atom();
    if (eat('^')) return make(Expression::Node::Pow, base, unary());
    return base;
  }
  NodePtr atom() {
    skip();
    if (pos_ >= s_.size()) fail("unexpected end");
    if (eat('(')) {
      NodePtr n = sum();
      if (!eat(')')) fail("expected ')'");
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(s_.substr(pos_), &used);
      } catch (const std::exception&) {
        fail("bad number");
      }
      pos_ += used;
      auto n = std::make_shared<Expression::Node>();
      n->value = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      size_t start = pos_;
      while (pos_ < s_.size() && std::isalnum(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      const std::string id = s_.substr(start, pos_ - start);
      if (id == "x1" || id == "x") return make(Expression::Node::X1);
      if (id == "x2" || id == "y") return make(Expression::Node::X2);
      if (id == "r2") return make(Expression::Node::R2);
      if (id == "pi") {
        auto n = std::make_shared<Expression::Node>();
        n->value = kPi;
        return n;
      }
      for (const auto& f : kFunctions) {
        if (id == f.name) {
          if (!eat('(')) fail("expected '(' after " + id);
          auto n = std::make_shared<Expression::Node>();
          n->kind = Expression::Node::Call;
          n->fn = f.fn;
          n->a = sum();
          if (!eat(')')) fail("expected ')'");
          return n;
        }
      }
      pos_ = start;
      fail("unknown identifier '" + id + "'");
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }
};

}  // namespace

Expression::Expression(const std::string& text) : text_(text), root_(Parser(text_).parse()) {}

double Expression::operator()(const Vec2& x) const { return root_->eval(x); }

}  // namespace vclust
