#include "odeng/expression.hpp"

#include "odeng/error.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

namespace odeng {

struct Expression::Node {
  enum class Kind { number, time, parameter, negate, add, sub, mul, div, pow, exp, log, sqrt };

  Kind kind;
  double value = 0.0;      // number
  std::size_t index = 0;   // parameter, 1-based
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

namespace {

using Node = Expression::Node;
using NodePtr = std::shared_ptr<const Node>;
using Kind = Node::Kind;

NodePtr make_leaf(Kind kind, double value = 0.0, std::size_t index = 0) {
  return std::make_shared<const Node>(Node{kind, value, index, nullptr, nullptr});
}

NodePtr make_node(Kind kind, NodePtr lhs, NodePtr rhs = nullptr) {
  return std::make_shared<const Node>(Node{kind, 0.0, 0, std::move(lhs), std::move(rhs)});
}

class Parser {
 public:
  Parser(std::string_view text, std::size_t n_params) : text_(text), n_params_(n_params) {}

  NodePtr parse() {
    NodePtr root = expr();
    skip_space();
    if (pos_ != text_.size()) {
      throw ParseError(std::string("unexpected character '") + text_[pos_] + "'", pos_);
    }
    return root;
  }

 private:
  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr expr() {
    NodePtr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Kind::add, lhs, term());
      } else if (accept('-')) {
        lhs = make_node(Kind::sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    NodePtr lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Kind::mul, lhs, unary());
      } else if (accept('/')) {
        lhs = make_node(Kind::div, lhs, unary());
      } else {
        return lhs;
      }
    }
  }

  NodePtr unary() {
    if (accept('-')) return make_node(Kind::negate, unary());
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) return make_node(Kind::pow, base, unary());
    return base;
  }

  NodePtr primary() {
    skip_space();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = text_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return identifier();
    if (accept('(')) {
      NodePtr inner = expr();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  NodePtr number() {
    const std::size_t start = pos_;
    const std::string tail(text_.substr(pos_));
    char* end = nullptr;
    const double value = std::strtod(tail.c_str(), &end);
    const std::size_t used = static_cast<std::size_t>(end - tail.c_str());
    if (used == 0) throw ParseError("malformed number", start);
    pos_ += used;
    return make_leaf(Kind::number, value);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    if (name == "t") return make_leaf(Kind::time);
    if (name.size() > 1 && name[0] == 'b' &&
        name.find_first_not_of("0123456789", 1) == std::string_view::npos) {
      const std::size_t index = std::stoul(std::string(name.substr(1)));
      if (index == 0 || index > n_params_) {
        throw ParseError("parameter index out of range: " + std::string(name) + " (model has " +
                             std::to_string(n_params_) + " parameters)",
                         start);
      }
      return make_leaf(Kind::parameter, 0.0, index);
    }
    Kind fn;
    if (name == "exp") {
      fn = Kind::exp;
    } else if (name == "log") {
      fn = Kind::log;
    } else if (name == "sqrt") {
      fn = Kind::sqrt;
    } else {
      throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    }
    if (!accept('(')) throw ParseError("expected '(' after function name", pos_);
    NodePtr arg = expr();
    if (!accept(')')) throw ParseError("expected ')'", pos_);
    return make_node(fn, arg);
  }

  std::string_view text_;
  std::size_t n_params_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, double t, const Vector& b) {
  switch (n.kind) {
    case Kind::number: return n.value;
    case Kind::time: return t;
    case Kind::parameter: return b(static_cast<Eigen::Index>(n.index - 1));
    case Kind::negate: return -eval(*n.lhs, t, b);
    case Kind::add: return eval(*n.lhs, t, b) + eval(*n.rhs, t, b);
    case Kind::sub: return eval(*n.lhs, t, b) - eval(*n.rhs, t, b);
    case Kind::mul: return eval(*n.lhs, t, b) * eval(*n.rhs, t, b);
    case Kind::div: return eval(*n.lhs, t, b) / eval(*n.rhs, t, b);
    case Kind::pow: return std::pow(eval(*n.lhs, t, b), eval(*n.rhs, t, b));
    case Kind::exp: return std::exp(eval(*n.lhs, t, b));
    case Kind::log: return std::log(eval(*n.lhs, t, b));
    case Kind::sqrt: return std::sqrt(eval(*n.lhs, t, b));
  }
  return std::nan("");
}

void render(const Node& n, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    render(*n.lhs, out);
    out += op;
    render(*n.rhs, out);
    out += ')';
  };
  auto call = [&](const char* fn) {
    out += fn;
    out += '(';
    render(*n.lhs, out);
    out += ')';
  };
  switch (n.kind) {
    case Kind::number: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", n.value);
      out += buf;
      return;
    }
    case Kind::time: out += 't'; return;
    case Kind::parameter: out += 'b' + std::to_string(n.index); return;
    case Kind::negate:
      out += "(-";
      render(*n.lhs, out);
      out += ')';
      return;
    case Kind::add: binary("+"); return;
    case Kind::sub: binary("-"); return;
    case Kind::mul: binary("*"); return;
    case Kind::div: binary("/"); return;
    case Kind::pow: binary("^"); return;
    case Kind::exp: call("exp"); return;
    case Kind::log: call("log"); return;
    case Kind::sqrt: call("sqrt"); return;
  }
}

std::size_t max_index(const Node& n) {
  std::size_t m = n.kind == Kind::parameter ? n.index : 0;
  if (n.lhs) m = std::max(m, max_index(*n.lhs));
  if (n.rhs) m = std::max(m, max_index(*n.rhs));
  return m;
}

}  // namespace

Expression Expression::parse(std::string_view text, std::size_t n_params) {
  Parser parser(text, n_params);
  return Expression(parser.parse(), std::string(text));
}

double Expression::evaluate(double t, const Vector& b) const { return eval(*root_, t, b); }

std::string Expression::to_string() const {
  std::string out;
  render(*root_, out);
  return out;
}

std::size_t Expression::max_parameter() const { return max_index(*root_); }

}  // namespace odeng
