// Copyright 2026 The bnecert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// A tiny math language for utilities and densities over (theta1, theta2).
//
// Grammar (lowest to highest precedence):
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?
//   primary := number | 'theta1' | 'theta2' | func '(' args ')' | '(' expr ')'
//
// so '^' binds tighter than unary minus ("-2^2" is -4) and is
// right-associative ("2^3^2" is 512). Functions: min, max (two arguments),
// abs, exp, log, sqrt, sin, cos (one argument).

#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "bnecert/error.hpp"

namespace bnecert::expr {

enum class Op : std::uint8_t {
  kConst,
  kTheta1,
  kTheta2,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kPow,
  kNeg,
  kMin,
  kMax,
  kAbs,
  kExp,
  kLog,
  kSqrt,
  kSin,
  kCos,
};

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op = Op::kConst;
  double value = 0.0;  // kConst only
  std::vector<NodePtr> args;
};

inline NodePtr make_const(double v) {
  return std::make_shared<const Node>(Node{Op::kConst, v, {}});
}
inline NodePtr make_var(int index) {
  return std::make_shared<const Node>(
      Node{index == 1 ? Op::kTheta1 : Op::kTheta2, 0.0, {}});
}
inline NodePtr make_node(Op op, std::vector<NodePtr> args) {
  return std::make_shared<const Node>(Node{op, 0.0, std::move(args)});
}

inline std::size_t arity(Op op) {
  switch (op) {
    case Op::kConst:
    case Op::kTheta1:
    case Op::kTheta2:
      return 0;
    case Op::kNeg:
    case Op::kAbs:
    case Op::kExp:
    case Op::kLog:
    case Op::kSqrt:
    case Op::kSin:
    case Op::kCos:
      return 1;
    default:
      return 2;
  }
}

inline std::string_view function_name(Op op) {
  switch (op) {
    case Op::kMin: return "min";
    case Op::kMax: return "max";
    case Op::kAbs: return "abs";
    case Op::kExp: return "exp";
    case Op::kLog: return "log";
    case Op::kSqrt: return "sqrt";
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    default: return "";
  }
}

namespace detail {

// Applies one operator; shared by the compiled evaluator and tree walkers so
// every evaluation path rounds identically.
inline double apply_unary(Op op, double a) {
  switch (op) {
    case Op::kNeg:
      return -a;
    case Op::kAbs:
      return std::fabs(a);
    case Op::kExp:
      return std::exp(a);
    case Op::kLog:
      if (a < 0.0) throw DomainError("log of a negative number");
      return std::log(a);
    case Op::kSqrt:
      if (a < 0.0) throw DomainError("sqrt of a negative number");
      return std::sqrt(a);
    case Op::kSin:
      return std::sin(a);
    case Op::kCos:
      return std::cos(a);
    default:
      throw InvalidArgument("not a unary operator");
  }
}

inline double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::kAdd:
      return a + b;
    case Op::kSub:
      return a - b;
    case Op::kMul:
      return a * b;
    case Op::kDiv:
      if (b == 0.0) throw DomainError("division by zero");
      return a / b;
    case Op::kPow:
      if (a < 0.0 && std::trunc(b) != b) {
        throw DomainError("non-integer power of a negative base");
      }
      return std::pow(a, b);
    case Op::kMin:
      return std::fmin(a, b);
    case Op::kMax:
      return std::fmax(a, b);
    default:
      throw InvalidArgument("not a binary operator");
  }
}

struct Instr {
  Op op;
  double value;
};

inline void compile(const Node& node, std::vector<Instr>& code, int depth,
                    int& max_depth) {
  // Postfix order; depth tracks the operand stack height after this node.
  int d = depth;
  for (const auto& child : node.args) {
    compile(*child, code, d, max_depth);
    ++d;
  }
  if (depth + 1 > max_depth) max_depth = depth + 1;
  code.push_back({node.op, node.value});
}

inline void format_number(std::string& out, double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  std::string_view text(buf.data(), static_cast<std::size_t>(ptr - buf.data()));
  if (v < 0.0 || std::signbit(v)) {
    out += '(';
    out += text;
    out += ')';
  } else {
    out += text;
  }
}

inline void print(const Node& node, std::string& out) {
  switch (node.op) {
    case Op::kConst:
      format_number(out, node.value);
      return;
    case Op::kTheta1:
      out += "theta1";
      return;
    case Op::kTheta2:
      out += "theta2";
      return;
    case Op::kNeg:
      out += "(-";
      print(*node.args[0], out);
      out += ')';
      return;
    case Op::kAdd:
    case Op::kSub:
    case Op::kMul:
    case Op::kDiv:
    case Op::kPow: {
      static constexpr std::string_view kSymbols = "+-*/^";
      const char symbol = kSymbols[static_cast<int>(node.op) -
                                   static_cast<int>(Op::kAdd)];
      out += '(';
      print(*node.args[0], out);
      out += ' ';
      out += symbol;
      out += ' ';
      print(*node.args[1], out);
      out += ')';
      return;
    }
    default:
      out += function_name(node.op);
      out += '(';
      for (std::size_t i = 0; i < node.args.size(); ++i) {
        if (i > 0) out += ", ";
        print(*node.args[i], out);
      }
      out += ')';
      return;
  }
}

}  // namespace detail

// Immutable parsed expression. Copies share the tree; evaluation runs a
// compiled postfix program and is safe to call concurrently.
class Expr {
 public:
  Expr() : Expr(make_const(0.0)) {}
  explicit Expr(NodePtr root) : root_(std::move(root)) {
    int max_depth = 0;
    detail::compile(*root_, code_, 0, max_depth);
    stack_size_ = static_cast<std::size_t>(max_depth);
    for (const auto& ins : code_) {
      if (ins.op == Op::kTheta1) uses_theta1_ = true;
      if (ins.op == Op::kTheta2) uses_theta2_ = true;
    }
  }

  double operator()(double theta1, double theta2) const {
    return stack_size_ <= kInlineStack ? run<kInlineStack>(theta1, theta2)
                                       : run_heap(theta1, theta2);
  }

  const Node& root() const noexcept { return *root_; }
  NodePtr root_ptr() const noexcept { return root_; }

  bool uses_theta1() const noexcept { return uses_theta1_; }
  bool uses_theta2() const noexcept { return uses_theta2_; }

  // Fully parenthesized text that parses back to an equivalent tree;
  // literals are printed in shortest round-trip form.
  std::string to_string() const {
    std::string out;
    detail::print(*root_, out);
    return out;
  }

 private:
  static constexpr std::size_t kInlineStack = 32;

  template <std::size_t N>
  double run(double theta1, double theta2) const {
    std::array<double, N> stack;
    return execute(stack.data(), theta1, theta2);
  }

  double run_heap(double theta1, double theta2) const {
    std::vector<double> stack(stack_size_);
    return execute(stack.data(), theta1, theta2);
  }

  double execute(double* stack, double theta1, double theta2) const {
    std::size_t top = 0;
    for (const auto& ins : code_) {
      switch (arity(ins.op)) {
        case 0:
          stack[top++] = ins.op == Op::kConst    ? ins.value
                         : ins.op == Op::kTheta1 ? theta1
                                                 : theta2;
          break;
        case 1:
          stack[top - 1] = detail::apply_unary(ins.op, stack[top - 1]);
          break;
        default:
          stack[top - 2] =
              detail::apply_binary(ins.op, stack[top - 2], stack[top - 1]);
          --top;
          break;
      }
    }
    return stack[0];
  }

  NodePtr root_;
  std::vector<detail::Instr> code_;
  std::size_t stack_size_ = 0;
  bool uses_theta1_ = false;
  bool uses_theta2_ = false;
};

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  NodePtr parse() {
    NodePtr root = parse_expr();
    skip_space();
    if (pos_ != text_.size()) {
      throw SyntaxError(pos_, std::string("unexpected '") + text_[pos_] + "'");
    }
    return root;
  }

 private:
  static constexpr int kMaxNesting = 200;

  struct DepthGuard {
    explicit DepthGuard(Parser& p) : parser(p) {
      if (++parser.depth_ > kMaxNesting) {
        throw SyntaxError(parser.pos_, "expression nested too deeply");
      }
    }
    ~DepthGuard() { --parser.depth_; }
    Parser& parser;
  };

  void skip_space() {
    while (pos_ < text_.size() &&
           (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n' ||
            text_[pos_] == '\r')) {
      ++pos_;
    }
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      throw SyntaxError(pos_, std::string("expected '") + c + "'");
    }
  }

  NodePtr parse_expr() {
    DepthGuard guard(*this);
    NodePtr lhs = parse_term();
    while (true) {
      if (accept('+')) {
        lhs = make_node(Op::kAdd, {lhs, parse_term()});
      } else if (accept('-')) {
        lhs = make_node(Op::kSub, {lhs, parse_term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    while (true) {
      if (accept('*')) {
        lhs = make_node(Op::kMul, {lhs, parse_unary()});
      } else if (accept('/')) {
        lhs = make_node(Op::kDiv, {lhs, parse_unary()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr parse_unary() {
    DepthGuard guard(*this);
    if (accept('-')) return make_node(Op::kNeg, {parse_unary()});
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_primary();
    if (accept('^')) return make_node(Op::kPow, {base, parse_unary()});
    return base;
  }

  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) {
    return is_ident_start(c) || (c >= '0' && c <= '9');
  }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  NodePtr parse_primary() {
    skip_space();
    if (pos_ >= text_.size()) throw SyntaxError(pos_, "unexpected end of input");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (is_digit(c) || c == '.') return parse_number();
    if (is_ident_start(c)) return parse_identifier();
    throw SyntaxError(pos_, std::string("unexpected '") + c + "'");
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    if (pos_ < text_.size() && text_[pos_] == '.') {
      ++pos_;
      while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
    }
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < text_.size() && (text_[p] == '+' || text_[p] == '-')) ++p;
      if (p < text_.size() && is_digit(text_[p])) {
        pos_ = p;
        while (pos_ < text_.size() && is_digit(text_[pos_])) ++pos_;
      }
    }
    double value = 0.0;
    auto [ptr, ec] =
        std::from_chars(text_.data() + start, text_.data() + pos_, value);
    if (ec != std::errc() || ptr != text_.data() + pos_ || !std::isfinite(value)) {
      throw SyntaxError(start, "malformed number");
    }
    return make_const(value);
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_ident_char(text_[pos_])) ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    skip_space();
    const bool call = pos_ < text_.size() && text_[pos_] == '(';
    if (!call) {
      if (name == "theta1") return make_var(1);
      if (name == "theta2") return make_var(2);
      throw UnknownIdentifier("unknown variable '" + std::string(name) +
                              "' at offset " + std::to_string(start));
    }
    const Op op = lookup_function(name, start);
    ++pos_;  // '('
    std::vector<NodePtr> args;
    args.push_back(parse_expr());
    while (accept(',')) args.push_back(parse_expr());
    skip_space();
    const std::size_t close = pos_;
    expect(')');
    if (args.size() != arity(op)) {
      throw SyntaxError(close, std::string(name) + " takes " +
                                   std::to_string(arity(op)) + " argument(s)");
    }
    return make_node(op, std::move(args));
  }

  static Op lookup_function(std::string_view name, std::size_t offset) {
    static constexpr std::array<Op, 8> kFunctions = {
        Op::kMin, Op::kMax, Op::kAbs, Op::kExp,
        Op::kLog, Op::kSqrt, Op::kSin, Op::kCos};
    for (Op op : kFunctions) {
      if (function_name(op) == name) return op;
    }
    throw UnknownIdentifier("unknown function '" + std::string(name) +
                            "' at offset " + std::to_string(offset));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  int depth_ = 0;
};

}  // namespace detail

inline Expr parse(std::string_view text) {
  return Expr(detail::Parser(text).parse());
}

inline double eval(const Expr& e, double theta1, double theta2) {
  return e(theta1, theta2);
}

}  // namespace bnecert::expr
