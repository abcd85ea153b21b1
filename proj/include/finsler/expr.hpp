#pragma once

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace finsler {

enum class Axis : std::uint8_t { X, Y };

enum class UnaryOp : std::uint8_t { Neg, Sqrt, Exp, Log, Sin, Cos, Atan };
enum class BinaryOp : std::uint8_t { Add, Sub, Mul, Div, Pow };

struct ParseError : std::runtime_error {
  std::size_t position;
  ParseError(const std::string& msg, std::size_t pos)
      : std::runtime_error(msg + " at position " + std::to_string(pos)),
        position(pos) {}
};

struct EvalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Plain-real part of a scalar; jets overload this.
inline double value_part(double v) { return v; }

/// x^e over any ring scalar. Integer exponents use repeated multiplication
/// (valid for any base), everything else goes through exp(e*log(x)) so one
/// code path serves reals and jets alike.
template <class S>
S pow_scalar(const S& base, double expo) {
  if (expo == std::nearbyint(expo) && std::abs(expo) < 1e15) {
    long long k = static_cast<long long>(expo);
    bool invert = k < 0;
    unsigned long long m = invert ? -static_cast<unsigned long long>(k) : k;
    S acc(1.0);
    S sq = base;
    while (m != 0) {
      if (m & 1) acc = acc * sq;
      m >>= 1;
      if (m != 0) sq = sq * sq;
    }
    if (invert) return S(1.0) / acc;
    return acc;
  }
  using std::exp;
  using std::log;
  return exp(expo * log(base));
}

/// Immutable AST of a scalar function of coordinates x1..xn, y1..yn.
/// Nodes live in a flat arena; children are referenced by index.
class Expr {
 public:
  struct Node {
    enum class Kind : std::uint8_t { Constant, Coord, Unary, Binary } kind;
    // Constant
    double value = 0.0;
    long long num = 0, den = 0;  // den > 0 when written as integer/fraction
    // Coord
    Axis axis = Axis::X;
    int index = 0;  // 1-based, as written
    // Unary / Binary
    UnaryOp uop = UnaryOp::Neg;
    BinaryOp bop = BinaryOp::Add;
    int a = -1, b = -1;
    std::size_t pos = 0;  // source position, for diagnostics
  };

  Expr() = default;

  static Expr parse(std::string_view text, int n);

  int dim() const { return dim_; }
  int root() const { return root_; }
  const std::vector<Node>& nodes() const { return nodes_; }

  /// Evaluate over any commutative-ring scalar (double or a jet type).
  template <class S>
  S eval(std::span<const S> x, std::span<const S> y) const {
    if (root_ < 0) throw EvalError("empty expression");
    return eval_node<S>(root_, x, y);
  }

  template <class S>
  S eval(const std::vector<S>& x, const std::vector<S>& y) const {
    return eval(std::span<const S>(x), std::span<const S>(y));
  }

  /// Canonical text form; reparsing yields a structurally identical AST.
  std::string str() const { return root_ < 0 ? std::string() : print_node(root_, 0); }

  bool contains_axis(Axis a) const {
    for (const Node& nd : nodes_)
      if (nd.kind == Node::Kind::Coord && nd.axis == a) return true;
    return false;
  }

  /// Structural ASTs builders (used e.g. to form exp(sigma)*F).
  static Expr combine(BinaryOp op, const Expr& a, const Expr& b);
  static Expr apply(UnaryOp op, const Expr& a);

  bool identical(const Expr& other) const {
    if (dim_ != other.dim_) return false;
    if ((root_ < 0) != (other.root_ < 0)) return false;
    return root_ < 0 || identical_nodes(root_, other, other.root_);
  }

 private:
  std::vector<Node> nodes_;
  int root_ = -1;
  int dim_ = 0;

  int add(Node nd) {
    nodes_.push_back(nd);
    return static_cast<int>(nodes_.size()) - 1;
  }

  template <class S>
  S eval_node(int id, std::span<const S> x, std::span<const S> y) const {
    const Node& nd = nodes_[id];
    switch (nd.kind) {
      case Node::Kind::Constant:
        return S(nd.value);
      case Node::Kind::Coord: {
        std::span<const S> v = nd.axis == Axis::X ? x : y;
        if (nd.index < 1 || static_cast<std::size_t>(nd.index) > v.size())
          throw EvalError("no value assigned to coordinate in '" + print_node(id, 0) + "'");
        return v[nd.index - 1];
      }
      case Node::Kind::Unary: {
        S a = eval_node<S>(nd.a, x, y);
        using std::atan;
        using std::cos;
        using std::exp;
        using std::log;
        using std::sin;
        using std::sqrt;
        switch (nd.uop) {
          case UnaryOp::Neg:
            return -a;
          case UnaryOp::Sqrt:
            if (!(value_part(a) > 0.0))
              throw EvalError("sqrt of non-positive value in '" + print_node(id, 0) + "'");
            return sqrt(a);
          case UnaryOp::Exp:
            return exp(a);
          case UnaryOp::Log:
            if (!(value_part(a) > 0.0))
              throw EvalError("log of non-positive value in '" + print_node(id, 0) + "'");
            return log(a);
          case UnaryOp::Sin:
            return sin(a);
          case UnaryOp::Cos:
            return cos(a);
          case UnaryOp::Atan:
            return atan(a);
        }
        break;
      }
      case Node::Kind::Binary: {
        if (nd.bop == BinaryOp::Pow) {
          S base = eval_node<S>(nd.a, x, y);
          // The exponent subtree is coordinate-free; evaluate it as a plain real.
          double e = eval_node<double>(nd.b, std::span<const double>(), std::span<const double>());
          bool integral = e == std::nearbyint(e) && std::abs(e) < 1e15;
          if (integral) {
            if (e < 0.0 && value_part(base) == 0.0)
              throw EvalError("negative power of zero value in '" + print_node(id, 0) + "'");
          } else if (!(value_part(base) > 0.0)) {
            throw EvalError("non-integer power of non-positive value in '" + print_node(id, 0) + "'");
          }
          return pow_scalar(base, e);
        }
        S a = eval_node<S>(nd.a, x, y);
        S b = eval_node<S>(nd.b, x, y);
        switch (nd.bop) {
          case BinaryOp::Add:
            return a + b;
          case BinaryOp::Sub:
            return a - b;
          case BinaryOp::Mul:
            return a * b;
          case BinaryOp::Div:
            if (value_part(b) == 0.0)
              throw EvalError("division by zero value in '" + print_node(id, 0) + "'");
            return a / b;
          case BinaryOp::Pow:
            break;
        }
        break;
      }
    }
    throw EvalError("malformed expression node");
  }

  // Precedence levels: 1 add/sub, 2 mul/div, 3 unary minus, 4 pow, 5 atom.
  std::string print_node(int id, int parentLevel) const;
  static std::string format_decimal(double v);

  bool identical_nodes(int id, const Expr& other, int oid) const {
    const Node& a = nodes_[id];
    const Node& b = other.nodes_[oid];
    if (a.kind != b.kind) return false;
    switch (a.kind) {
      case Node::Kind::Constant:
        return a.value == b.value && a.num == b.num && a.den == b.den;
      case Node::Kind::Coord:
        return a.axis == b.axis && a.index == b.index;
      case Node::Kind::Unary:
        return a.uop == b.uop && identical_nodes(a.a, other, b.a);
      case Node::Kind::Binary:
        return a.bop == b.bop && identical_nodes(a.a, other, b.a) &&
               identical_nodes(a.b, other, b.b);
    }
    return false;
  }

  int copy_into(std::vector<Node>& out, int id) const {
    Node nd = nodes_[id];
    if (nd.kind == Node::Kind::Unary) {
      nd.a = copy_into(out, nd.a);
    } else if (nd.kind == Node::Kind::Binary) {
      nd.a = copy_into(out, nd.a);
      nd.b = copy_into(out, nd.b);
    }
    out.push_back(nd);
    return static_cast<int>(out.size()) - 1;
  }

  class Parser;
};

inline Expr Expr::combine(BinaryOp op, const Expr& a, const Expr& b) {
  Expr r;
  r.dim_ = a.dim_ > b.dim_ ? a.dim_ : b.dim_;
  int na = a.copy_into(r.nodes_, a.root_);
  int nb = b.copy_into(r.nodes_, b.root_);
  Node nd;
  nd.kind = Node::Kind::Binary;
  nd.bop = op;
  nd.a = na;
  nd.b = nb;
  r.root_ = r.add(nd);
  return r;
}

inline Expr Expr::apply(UnaryOp op, const Expr& a) {
  Expr r;
  r.dim_ = a.dim_;
  int na = a.copy_into(r.nodes_, a.root_);
  Node nd;
  nd.kind = Node::Kind::Unary;
  nd.uop = op;
  nd.a = na;
  r.root_ = r.add(nd);
  return r;
}

// ---------------------------------------------------------------------------
// Parser
//
// expr   := term (("+"|"-") term)*
// term   := unary (("*"|"/") unary)*
// unary  := "-" unary | factor
// factor := base ("^" factor)?        -- exponent must be coordinate-free
// base   := number | coord | "(" expr ")" | func "(" expr ")"
// number := digit+ ("." digit+)? | digit+ "/" digit+   (fraction lexed only
//           when written without spaces)
// ---------------------------------------------------------------------------

class Expr::Parser {
 public:
  Parser(std::string_view text, int n, Expr& out) : text_(text), n_(n), out_(out) {}

  void run() {
    if (n_ < 2) throw ParseError("dimension must be at least 2", 0);
    out_.dim_ = n_;
    skip_ws();
    out_.root_ = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError("unexpected trailing input", pos_);
  }

 private:
  std::string_view text_;
  int n_;
  Expr& out_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }
  bool eat(char c) {
    skip_ws();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  int parse_expr() {
    int lhs = parse_term();
    for (;;) {
      skip_ws();
      std::size_t at = pos_;
      if (eat('+'))
        lhs = make_binary(BinaryOp::Add, lhs, parse_term(), at);
      else if (eat('-'))
        lhs = make_binary(BinaryOp::Sub, lhs, parse_term(), at);
      else
        return lhs;
    }
  }

  int parse_term() {
    int lhs = parse_unary();
    for (;;) {
      skip_ws();
      std::size_t at = pos_;
      if (eat('*'))
        lhs = make_binary(BinaryOp::Mul, lhs, parse_unary(), at);
      else if (eat('/'))
        lhs = make_binary(BinaryOp::Div, lhs, parse_unary(), at);
      else
        return lhs;
    }
  }

  int parse_unary() {
    skip_ws();
    std::size_t at = pos_;
    if (eat('-')) {
      Node nd;
      nd.kind = Node::Kind::Unary;
      nd.uop = UnaryOp::Neg;
      nd.a = parse_unary();
      nd.pos = at;
      return out_.add(nd);
    }
    return parse_factor();
  }

  int parse_factor() {
    int base = parse_base();
    skip_ws();
    std::size_t at = pos_;
    if (eat('^')) {
      int expo = parse_factor();
      check_constant(expo);
      return make_binary(BinaryOp::Pow, base, expo, at);
    }
    return base;
  }

  int parse_base() {
    skip_ws();
    std::size_t at = pos_;
    char c = peek();
    if (c == '(') {
      ++pos_;
      int inner = parse_expr();
      if (!eat(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c))) return parse_number(at);
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_ident(at);
    throw ParseError(pos_ >= text_.size() ? "unexpected end of input" : "unexpected character",
                     pos_);
  }

  int parse_number(std::size_t at) {
    std::size_t start = pos_;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    Node nd;
    nd.kind = Node::Kind::Constant;
    nd.pos = at;
    if (peek() == '.' && pos_ + 1 < text_.size() &&
        std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
      ++pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      std::string_view tok = text_.substr(start, pos_ - start);
      double v = 0.0;
      std::from_chars(tok.data(), tok.data() + tok.size(), v);
      nd.value = v;
      nd.den = 0;
    } else if (peek() == '/' && pos_ + 1 < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
      std::string_view numTok = text_.substr(start, pos_ - start);
      ++pos_;
      std::size_t dstart = pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      std::string_view denTok = text_.substr(dstart, pos_ - dstart);
      long long num = 0, den = 0;
      std::from_chars(numTok.data(), numTok.data() + numTok.size(), num);
      std::from_chars(denTok.data(), denTok.data() + denTok.size(), den);
      if (den == 0) throw ParseError("zero denominator in literal", dstart);
      nd.num = num;
      nd.den = den;
      nd.value = static_cast<double>(num) / static_cast<double>(den);
    } else {
      std::string_view tok = text_.substr(start, pos_ - start);
      long long num = 0;
      std::from_chars(tok.data(), tok.data() + tok.size(), num);
      nd.num = num;
      nd.den = 1;
      nd.value = static_cast<double>(num);
    }
    return out_.add(nd);
  }

  int parse_ident(std::size_t at) {
    std::size_t start = pos_;
    while (std::isalpha(static_cast<unsigned char>(peek()))) ++pos_;
    std::string_view name = text_.substr(start, pos_ - start);
    if ((name == "x" || name == "y") && std::isdigit(static_cast<unsigned char>(peek()))) {
      std::size_t dstart = pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      std::string_view idxTok = text_.substr(dstart, pos_ - dstart);
      int idx = 0;
      std::from_chars(idxTok.data(), idxTok.data() + idxTok.size(), idx);
      if (idx < 1 || idx > n_) throw ParseError("coordinate index out of range 1.." + std::to_string(n_), at);
      Node nd;
      nd.kind = Node::Kind::Coord;
      nd.axis = name == "x" ? Axis::X : Axis::Y;
      nd.index = idx;
      nd.pos = at;
      return out_.add(nd);
    }
    UnaryOp op;
    if (name == "sqrt")
      op = UnaryOp::Sqrt;
    else if (name == "exp")
      op = UnaryOp::Exp;
    else if (name == "log")
      op = UnaryOp::Log;
    else if (name == "sin")
      op = UnaryOp::Sin;
    else if (name == "cos")
      op = UnaryOp::Cos;
    else if (name == "atan")
      op = UnaryOp::Atan;
    else
      throw ParseError("unknown identifier '" + std::string(name) + "'", at);
    if (!eat('(')) throw ParseError("expected '(' after function name", pos_);
    int arg = parse_expr();
    if (!eat(')')) throw ParseError("expected ')'", pos_);
    Node nd;
    nd.kind = Node::Kind::Unary;
    nd.uop = op;
    nd.a = arg;
    nd.pos = at;
    return out_.add(nd);
  }

  int make_binary(BinaryOp op, int a, int b, std::size_t at) {
    Node nd;
    nd.kind = Node::Kind::Binary;
    nd.bop = op;
    nd.a = a;
    nd.b = b;
    nd.pos = at;
    return out_.add(nd);
  }

  void check_constant(int id) {
    const Node& nd = out_.nodes_[id];
    switch (nd.kind) {
      case Node::Kind::Constant:
        return;
      case Node::Kind::Coord:
        throw ParseError("non-constant exponent", nd.pos);
      case Node::Kind::Unary:
        check_constant(nd.a);
        return;
      case Node::Kind::Binary:
        check_constant(nd.a);
        check_constant(nd.b);
        return;
    }
  }
};

inline Expr Expr::parse(std::string_view text, int n) {
  Expr e;
  Parser(text, n, e).run();
  return e;
}

inline std::string Expr::format_decimal(double v) {
  char buf[512];
  auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  std::string s(buf, res.ptr);
  if (s.find('.') == std::string::npos) s += ".0";
  return s;
}

inline std::string Expr::print_node(int id, int parentLevel) const {
  const Node& nd = nodes_[id];
  std::string out;
  int level = 5;
  switch (nd.kind) {
    case Node::Kind::Constant:
      if (nd.den == 1)
        out = std::to_string(nd.num);
      else if (nd.den > 1)
        out = std::to_string(nd.num) + "/" + std::to_string(nd.den);
      else
        out = format_decimal(nd.value);
      break;
    case Node::Kind::Coord:
      out = (nd.axis == Axis::X ? "x" : "y") + std::to_string(nd.index);
      break;
    case Node::Kind::Unary:
      if (nd.uop == UnaryOp::Neg) {
        level = 3;
        out = "-" + print_node(nd.a, 3);
      } else {
        const char* fn = nullptr;
        switch (nd.uop) {
          case UnaryOp::Sqrt: fn = "sqrt"; break;
          case UnaryOp::Exp: fn = "exp"; break;
          case UnaryOp::Log: fn = "log"; break;
          case UnaryOp::Sin: fn = "sin"; break;
          case UnaryOp::Cos: fn = "cos"; break;
          case UnaryOp::Atan: fn = "atan"; break;
          case UnaryOp::Neg: break;
        }
        out = std::string(fn) + "(" + print_node(nd.a, 0) + ")";
      }
      break;
    case Node::Kind::Binary: {
      const char* sym = nullptr;
      switch (nd.bop) {
        case BinaryOp::Add: level = 1; sym = " + "; break;
        case BinaryOp::Sub: level = 1; sym = " - "; break;
        case BinaryOp::Mul: level = 2; sym = "*"; break;
        case BinaryOp::Div: level = 2; sym = "/"; break;
        case BinaryOp::Pow: level = 4; sym = "^"; break;
      }
      if (nd.bop == BinaryOp::Pow) {
        // base must be an atom; exponent re-enters at factor level
        out = print_node(nd.a, 5) + sym + print_node(nd.b, 4);
      } else {
        std::string rhs = print_node(nd.b, level + 1);
        // an integer/integer division would re-lex as a fraction literal
        if (nd.bop == BinaryOp::Div && nodes_[nd.a].kind == Node::Kind::Constant &&
            nodes_[nd.b].kind == Node::Kind::Constant)
          rhs = "(" + rhs + ")";
        out = print_node(nd.a, level) + sym + rhs;
      }
      break;
    }
  }
  if (level < parentLevel) return "(" + out + ")";
  return out;
}

}  // namespace finsler
