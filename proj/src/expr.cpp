// Copyright 2026 The sanode Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sanode/expr.hpp"

#include "sanode/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <optional>
#include <sstream>

namespace sanode {

namespace {

constexpr std::array<std::pair<std::string_view, Function>, 10> function_table{{
  {"sin", Function::Sin},
  {"cos", Function::Cos},
  {"tan", Function::Tan},
  {"tanh", Function::Tanh},
  {"sech", Function::Sech},
  {"exp", Function::Exp},
  {"log", Function::Log},
  {"sqrt", Function::Sqrt},
  {"abs", Function::Abs},
  {"arctan", Function::Arctan},
}};

std::optional<Function> lookup_function(std::string_view name)
{
  for (auto const &[n, fn] : function_table) {
    if (n == name) {
      return fn;
    }
  }
  return std::nullopt;
}

std::string format_number(double v)
{
  std::array<char, 64> buf{};
  auto const res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

} // namespace

std::string_view function_name(Function fn)
{
  for (auto const &[n, f] : function_table) {
    if (f == fn) {
      return n;
    }
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Construction

Expr Expr::make(Node node)
{
  return Expr(std::make_shared<Node const>(std::move(node)));
}

Expr Expr::constant(double value)
{
  return make(Node{Kind::Constant, value});
}

Expr Expr::variable(int index)
{
  return make(Node{Kind::Variable, 0.0, index});
}

Expr Expr::time()
{
  return make(Node{Kind::Time});
}

Expr Expr::negate(Expr a)
{
  Node n{Kind::Negate};
  n.lhs = a.node_;
  return make(std::move(n));
}

Expr Expr::binary(Kind kind, Expr a, Expr b)
{
  Node n{kind};
  n.lhs = a.node_;
  n.rhs = b.node_;
  return make(std::move(n));
}

Expr Expr::power(Expr base, int exponent)
{
  Node n{Kind::Pow, 0.0, exponent};
  n.lhs = base.node_;
  return make(std::move(n));
}

Expr Expr::call(Function fn, Expr arg)
{
  Node n{Kind::Call};
  n.fn = fn;
  n.lhs = arg.node_;
  return make(std::move(n));
}

bool operator==(Expr const &a, Expr const &b)
{
  if (a.node_ == b.node_) {
    return true;
  }
  if (a.kind() != b.kind()) {
    return false;
  }
  switch (a.kind()) {
  case Expr::Kind::Constant:
    return a.value() == b.value();
  case Expr::Kind::Variable:
    return a.index() == b.index();
  case Expr::Kind::Time:
    return true;
  case Expr::Kind::Negate:
    return a.lhs() == b.lhs();
  case Expr::Kind::Pow:
    return a.exponent() == b.exponent() && a.lhs() == b.lhs();
  case Expr::Kind::Call:
    return a.function() == b.function() && a.lhs() == b.lhs();
  default:
    return a.lhs() == b.lhs() && a.rhs() == b.rhs();
  }
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

enum class Tok
{
  Number,
  Ident,
  Plus,
  Minus,
  Star,
  Slash,
  Caret,
  LParen,
  RParen,
  Comma,
  End
};

struct Token
{
  Tok kind;
  std::string_view text;
  std::size_t offset;
};

std::vector<Token> lex(std::string_view src)
{
  std::vector<Token> out;
  std::size_t i = 0;
  auto is_digit = [](char c) { return c >= '0' && c <= '9'; };
  auto is_alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  while (i < src.size()) {
    char const c = src[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++i;
      continue;
    }
    std::size_t const start = i;
    if (is_digit(c) || (c == '.' && i + 1 < src.size() && is_digit(src[i + 1]))) {
      while (i < src.size() && is_digit(src[i]))
        ++i;
      if (i < src.size() && src[i] == '.') {
        ++i;
        while (i < src.size() && is_digit(src[i]))
          ++i;
      }
      if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
        std::size_t j = i + 1;
        if (j < src.size() && (src[j] == '+' || src[j] == '-'))
          ++j;
        if (j < src.size() && is_digit(src[j])) {
          i = j;
          while (i < src.size() && is_digit(src[i]))
            ++i;
        }
      }
      out.push_back({Tok::Number, src.substr(start, i - start), start});
      continue;
    }
    if (is_alpha(c)) {
      while (i < src.size() && (is_alpha(src[i]) || is_digit(src[i])))
        ++i;
      out.push_back({Tok::Ident, src.substr(start, i - start), start});
      continue;
    }
    Tok kind;
    switch (c) {
    case '+':
      kind = Tok::Plus;
      break;
    case '-':
      kind = Tok::Minus;
      break;
    case '*':
      kind = Tok::Star;
      break;
    case '/':
      kind = Tok::Slash;
      break;
    case '^':
      kind = Tok::Caret;
      break;
    case '(':
      kind = Tok::LParen;
      break;
    case ')':
      kind = Tok::RParen;
      break;
    case ',':
      kind = Tok::Comma;
      break;
    default:
      throw ParseError(std::string("unexpected character '") + c + "'", start);
    }
    out.push_back({kind, src.substr(start, 1), start});
    ++i;
  }
  out.push_back({Tok::End, {}, src.size()});
  return out;
}

} // namespace

class ExprParser
{
public:
  ExprParser(std::string_view src, Index dim)
    : tokens_(lex(src))
    , dim_(dim)
  {
  }

  Expr parse()
  {
    Expr e = expression();
    if (peek().kind != Tok::End) {
      throw ParseError("unexpected trailing '" + std::string(peek().text) + "'", peek().offset);
    }
    return e;
  }

private:
  Token const &peek() const { return tokens_[pos_]; }
  Token const &next() { return tokens_[pos_++]; }

  Expr at(Expr e, std::size_t offset)
  {
    Expr::Node n = *e.node_;
    n.offset = offset;
    return Expr::make(std::move(n));
  }

  Expr expression()
  {
    Expr lhs = term();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      Token const op = next();
      Expr rhs = term();
      lhs = at(Expr::binary(op.kind == Tok::Plus ? Expr::Kind::Add : Expr::Kind::Sub, lhs, rhs), op.offset);
    }
    return lhs;
  }

  Expr term()
  {
    Expr lhs = unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      Token const op = next();
      Expr rhs = unary();
      lhs = at(Expr::binary(op.kind == Tok::Star ? Expr::Kind::Mul : Expr::Kind::Div, lhs, rhs), op.offset);
    }
    return lhs;
  }

  Expr unary()
  {
    if (peek().kind == Tok::Minus) {
      Token const op = next();
      return at(Expr::negate(unary()), op.offset);
    }
    return power();
  }

  Expr power()
  {
    Expr base = primary();
    while (peek().kind == Tok::Caret) {
      Token const op = next();
      bool negative = false;
      if (peek().kind == Tok::Minus) {
        next();
        negative = true;
      }
      Token const num = next();
      if (num.kind != Tok::Number) {
        throw ParseError("exponent must be an integer constant", num.offset);
      }
      double const v = parse_number(num);
      if (v != std::floor(v) || v > 1e6) {
        throw ParseError("exponent must be an integer constant", num.offset);
      }
      int const n = static_cast<int>(v);
      base = at(Expr::power(base, negative ? -n : n), op.offset);
    }
    return base;
  }

  static double parse_number(Token const &tok)
  {
    std::string const text(tok.text);
    char *end = nullptr;
    double const v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || !std::isfinite(v)) {
      throw ParseError("malformed number '" + text + "'", tok.offset);
    }
    return v;
  }

  Expr primary()
  {
    Token const tok = next();
    switch (tok.kind) {
    case Tok::Number:
      return at(Expr::constant(parse_number(tok)), tok.offset);
    case Tok::LParen: {
      Expr inner = expression();
      expect(Tok::RParen, "')'");
      return inner;
    }
    case Tok::Ident:
      return identifier(tok);
    case Tok::End:
      throw ParseError("unexpected end of expression", tok.offset);
    default:
      throw ParseError("unexpected '" + std::string(tok.text) + "'", tok.offset);
    }
  }

  Expr identifier(Token const &tok)
  {
    std::string_view const name = tok.text;
    if (auto fn = lookup_function(name)) {
      if (peek().kind != Tok::LParen) {
        throw ParseError("function '" + std::string(name) + "' needs an argument list", peek().offset);
      }
      next();
      if (peek().kind == Tok::RParen) {
        throw ParseError("function '" + std::string(name) + "' takes 1 argument, got 0", peek().offset);
      }
      Expr arg = expression();
      if (peek().kind == Tok::Comma) {
        throw ParseError("function '" + std::string(name) + "' takes 1 argument", peek().offset);
      }
      expect(Tok::RParen, "')'");
      return at(Expr::call(*fn, arg), tok.offset);
    }
    if (name == "t") {
      return at(Expr::time(), tok.offset);
    }
    if (name == "pi") {
      return at(Expr::constant(M_PI), tok.offset);
    }
    if (name.size() >= 2 && name[0] == 'x' && name.find_first_not_of("0123456789", 1) == std::string_view::npos) {
      long const k = std::strtol(std::string(name.substr(1)).c_str(), nullptr, 10);
      if (k < 1 || k > dim_) {
        throw ParseError("variable '" + std::string(name) + "' out of range for dimension " + std::to_string(dim_),
                         tok.offset);
      }
      return at(Expr::variable(static_cast<int>(k - 1)), tok.offset);
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", tok.offset);
  }

  void expect(Tok kind, char const *what)
  {
    if (peek().kind != kind) {
      throw ParseError(std::string("expected ") + what, peek().offset);
    }
    next();
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  Index dim_;
};

Expr parse_expr(std::string_view source, Index dim)
{
  return ExprParser(source, dim).parse();
}

// ---------------------------------------------------------------------------
// Printing

namespace {

int precedence(Expr const &e)
{
  switch (e.kind()) {
  case Expr::Kind::Add:
  case Expr::Kind::Sub:
    return 1;
  case Expr::Kind::Mul:
  case Expr::Kind::Div:
    return 2;
  case Expr::Kind::Negate:
    return 3;
  case Expr::Kind::Pow:
    return 4;
  case Expr::Kind::Constant:
    return std::signbit(e.value()) ? 0 : 5;
  default:
    return 5;
  }
}

void print(Expr const &e, std::string &out);

void print_wrapped(Expr const &e, bool wrap, std::string &out)
{
  if (wrap) {
    out += '(';
  }
  print(e, out);
  if (wrap) {
    out += ')';
  }
}

void print(Expr const &e, std::string &out)
{
  switch (e.kind()) {
  case Expr::Kind::Constant:
    out += format_number(e.value());
    return;
  case Expr::Kind::Variable:
    out += 'x';
    out += std::to_string(e.index() + 1);
    return;
  case Expr::Kind::Time:
    out += 't';
    return;
  case Expr::Kind::Negate:
    out += '-';
    print_wrapped(e.lhs(), precedence(e.lhs()) < 3, out);
    return;
  case Expr::Kind::Pow:
    print_wrapped(e.lhs(), precedence(e.lhs()) < 5, out);
    out += '^';
    out += std::to_string(e.exponent());
    return;
  case Expr::Kind::Call:
    out += function_name(e.function());
    out += '(';
    print(e.lhs(), out);
    out += ')';
    return;
  default: {
    int const p = precedence(e);
    char const *op = e.kind() == Expr::Kind::Add   ? " + "
                     : e.kind() == Expr::Kind::Sub ? " - "
                     : e.kind() == Expr::Kind::Mul ? " * "
                                                   : " / ";
    print_wrapped(e.lhs(), precedence(e.lhs()) < p, out);
    out += op;
    print_wrapped(e.rhs(), precedence(e.rhs()) <= p, out);
  }
  }
}

} // namespace

std::string to_string(Expr const &e)
{
  std::string out;
  print(e, out);
  return out;
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

[[noreturn]] void domain_fail(std::string const &what, Expr const &e)
{
  throw DomainError(what + " in '" + to_string(e) + "'");
}

double apply(Function fn, double u, Expr const &e)
{
  switch (fn) {
  case Function::Sin:
    return std::sin(u);
  case Function::Cos:
    return std::cos(u);
  case Function::Tan:
    return std::tan(u);
  case Function::Tanh:
    return std::tanh(u);
  case Function::Sech:
    return 1.0 / std::cosh(u);
  case Function::Exp:
    return std::exp(u);
  case Function::Log:
    if (!(u > 0)) {
      domain_fail("log of non-positive value", e);
    }
    return std::log(u);
  case Function::Sqrt:
    if (u < 0) {
      domain_fail("sqrt of negative value", e);
    }
    return std::sqrt(u);
  case Function::Abs:
    return std::abs(u);
  case Function::Arctan:
    return std::atan(u);
  }
  return 0.0;
}

double evaluate(Expr const &e, Eigen::Ref<Vector const> const &x, double t)
{
  double v = 0.0;
  switch (e.kind()) {
  case Expr::Kind::Constant:
    return e.value();
  case Expr::Kind::Variable:
    return x[e.index()];
  case Expr::Kind::Time:
    return t;
  case Expr::Kind::Negate:
    return -evaluate(e.lhs(), x, t);
  case Expr::Kind::Add:
    v = evaluate(e.lhs(), x, t) + evaluate(e.rhs(), x, t);
    break;
  case Expr::Kind::Sub:
    v = evaluate(e.lhs(), x, t) - evaluate(e.rhs(), x, t);
    break;
  case Expr::Kind::Mul:
    v = evaluate(e.lhs(), x, t) * evaluate(e.rhs(), x, t);
    break;
  case Expr::Kind::Div: {
    double const den = evaluate(e.rhs(), x, t);
    if (den == 0.0) {
      domain_fail("division by zero", e);
    }
    v = evaluate(e.lhs(), x, t) / den;
    break;
  }
  case Expr::Kind::Pow: {
    double const base = evaluate(e.lhs(), x, t);
    if (base == 0.0 && e.exponent() < 0) {
      domain_fail("division by zero", e);
    }
    v = std::pow(base, e.exponent());
    break;
  }
  case Expr::Kind::Call:
    v = apply(e.function(), evaluate(e.lhs(), x, t), e);
    break;
  }
  if (!std::isfinite(v)) {
    domain_fail("non-finite value", e);
  }
  return v;
}

} // namespace

double eval_expr(Expr const &e, Eigen::Ref<Vector const> x, double t)
{
  return evaluate(e, x, t);
}

// ---------------------------------------------------------------------------
// Differentiation

namespace {

bool is_const(Expr const &e)
{
  return e.kind() == Expr::Kind::Constant;
}

Expr c(double v)
{
  return Expr::constant(v);
}

Expr neg(Expr const &a)
{
  if (is_const(a)) {
    return c(-a.value());
  }
  if (a.kind() == Expr::Kind::Negate) {
    return a.lhs();
  }
  return Expr::negate(a);
}

Expr add(Expr const &a, Expr const &b)
{
  if (is_const(a) && is_const(b)) {
    return c(a.value() + b.value());
  }
  if (a.is_constant(0.0)) {
    return b;
  }
  if (b.is_constant(0.0)) {
    return a;
  }
  return Expr::binary(Expr::Kind::Add, a, b);
}

Expr sub(Expr const &a, Expr const &b)
{
  if (is_const(a) && is_const(b)) {
    return c(a.value() - b.value());
  }
  if (b.is_constant(0.0)) {
    return a;
  }
  if (a.is_constant(0.0)) {
    return neg(b);
  }
  return Expr::binary(Expr::Kind::Sub, a, b);
}

Expr mul(Expr const &a, Expr const &b)
{
  if (is_const(a) && is_const(b)) {
    return c(a.value() * b.value());
  }
  if (a.is_constant(0.0) || b.is_constant(0.0)) {
    return c(0.0);
  }
  if (a.is_constant(1.0)) {
    return b;
  }
  if (b.is_constant(1.0)) {
    return a;
  }
  if (a.is_constant(-1.0)) {
    return neg(b);
  }
  if (b.is_constant(-1.0)) {
    return neg(a);
  }
  return Expr::binary(Expr::Kind::Mul, a, b);
}

Expr div(Expr const &a, Expr const &b)
{
  if (is_const(a) && is_const(b) && b.value() != 0.0) {
    return c(a.value() / b.value());
  }
  if (a.is_constant(0.0)) {
    return c(0.0);
  }
  if (b.is_constant(1.0)) {
    return a;
  }
  return Expr::binary(Expr::Kind::Div, a, b);
}

Expr pow(Expr const &a, int n)
{
  if (n == 0) {
    return c(1.0);
  }
  if (n == 1) {
    return a;
  }
  if (is_const(a) && !(a.value() == 0.0 && n < 0)) {
    return c(std::pow(a.value(), n));
  }
  return Expr::power(a, n);
}

Expr call(Function fn, Expr const &a)
{
  if (is_const(a)) {
    try {
      return c(apply(fn, a.value(), a));
    } catch (DomainError const &) {
    }
  }
  return Expr::call(fn, a);
}

} // namespace

Expr differentiate(Expr const &e, DiffVar var)
{
  switch (e.kind()) {
  case Expr::Kind::Constant:
    return c(0.0);
  case Expr::Kind::Variable:
    return c(var.index == e.index() ? 1.0 : 0.0);
  case Expr::Kind::Time:
    return c(var.index == DiffVar::time_index ? 1.0 : 0.0);
  case Expr::Kind::Negate:
    return neg(differentiate(e.lhs(), var));
  case Expr::Kind::Add:
    return add(differentiate(e.lhs(), var), differentiate(e.rhs(), var));
  case Expr::Kind::Sub:
    return sub(differentiate(e.lhs(), var), differentiate(e.rhs(), var));
  case Expr::Kind::Mul: {
    Expr const a = e.lhs();
    Expr const b = e.rhs();
    return add(mul(differentiate(a, var), b), mul(a, differentiate(b, var)));
  }
  case Expr::Kind::Div: {
    Expr const a = e.lhs();
    Expr const b = e.rhs();
    Expr const da = differentiate(a, var);
    Expr const db = differentiate(b, var);
    if (db.is_constant(0.0)) {
      return div(da, b);
    }
    return div(sub(mul(da, b), mul(a, db)), pow(b, 2));
  }
  case Expr::Kind::Pow: {
    Expr const u = e.lhs();
    int const n = e.exponent();
    return mul(mul(c(n), pow(u, n - 1)), differentiate(u, var));
  }
  case Expr::Kind::Call: {
    Expr const u = e.lhs();
    Expr const du = differentiate(u, var);
    if (du.is_constant(0.0)) {
      return c(0.0);
    }
    Expr outer = c(0.0);
    switch (e.function()) {
    case Function::Sin:
      outer = call(Function::Cos, u);
      break;
    case Function::Cos:
      outer = neg(call(Function::Sin, u));
      break;
    case Function::Tan:
      outer = add(c(1.0), pow(call(Function::Tan, u), 2));
      break;
    case Function::Tanh:
      outer = pow(call(Function::Sech, u), 2);
      break;
    case Function::Sech:
      outer = neg(mul(call(Function::Sech, u), call(Function::Tanh, u)));
      break;
    case Function::Exp:
      outer = call(Function::Exp, u);
      break;
    case Function::Log:
      return div(du, u);
    case Function::Sqrt:
      return div(du, mul(c(2.0), call(Function::Sqrt, u)));
    case Function::Abs:
      outer = div(u, call(Function::Abs, u));
      break;
    case Function::Arctan:
      return div(du, add(c(1.0), pow(u, 2)));
    }
    return mul(outer, du);
  }
  }
  return c(0.0);
}

// ---------------------------------------------------------------------------
// Fields

ExprField make_expr_field(std::vector<std::string> const &sources, Index dim)
{
  if (dim < 1) {
    throw DomainError("field dimension must be positive");
  }
  if (static_cast<Index>(sources.size()) != dim) {
    throw ShapeError("field of dimension " + std::to_string(dim) + " needs " + std::to_string(dim) +
                     " components, got " + std::to_string(sources.size()));
  }
  ExprField field;
  field.dim = dim;
  for (Index j = 0; j < dim; ++j) {
    field.components.push_back(parse_expr(sources[j], dim));
    field.divergence_components.push_back(differentiate(field.components.back(), DiffVar::state(static_cast<int>(j))));
  }
  return field;
}

namespace {

std::string line_col(std::string_view text, std::size_t offset)
{
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

[[noreturn]] void file_error(std::string_view text, std::string const &message, std::size_t offset)
{
  throw ParseError(message + " (" + line_col(text, offset) + ")", offset);
}

} // namespace

ExprField parse_field_file(std::string_view text)
{
  struct Line
  {
    std::string_view content;
    std::size_t offset;
  };
  std::vector<Line> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view const raw = text.substr(start, end - start);
    std::size_t const first = raw.find_first_not_of(" \t\r");
    if (first != std::string_view::npos && raw[first] != '#') {
      lines.push_back({raw, start});
    }
    start = end + 1;
  }
  if (lines.empty()) {
    file_error(text, "empty field file", 0);
  }
  Line const header = lines.front();
  std::string compact;
  for (char ch : header.content) {
    if (ch != ' ' && ch != '\t' && ch != '\r') {
      compact += ch;
    }
  }
  if (compact.rfind("d=", 0) != 0) {
    file_error(text, "first line must be 'd=<int>'", header.offset);
  }
  char *end = nullptr;
  long const dim = std::strtol(compact.c_str() + 2, &end, 10);
  if (end != compact.c_str() + compact.size() || dim < 1) {
    file_error(text, "invalid dimension in header", header.offset);
  }
  if (static_cast<long>(lines.size()) - 1 != dim) {
    std::size_t const where = lines.size() > static_cast<std::size_t>(dim) + 1 ? lines[dim + 1].offset : text.size();
    file_error(text,
               "expected " + std::to_string(dim) + " component lines, found " + std::to_string(lines.size() - 1),
               where);
  }
  ExprField field;
  field.dim = dim;
  for (long j = 0; j < dim; ++j) {
    Line const &ln = lines[j + 1];
    try {
      field.components.push_back(parse_expr(ln.content, dim));
    } catch (ParseError const &e) {
      file_error(text, e.message(), ln.offset + e.offset());
    }
    field.divergence_components.push_back(differentiate(field.components.back(), DiffVar::state(static_cast<int>(j))));
  }
  return field;
}

ExprField load_field_file(std::string const &path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open field file '" + path + "'");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_field_file(ss.str());
}

AnalyticField to_analytic_field(ExprField const &field, std::string name)
{
  AnalyticField out;
  out.dim = field.dim;
  out.name = std::move(name);
  out.rhs = [components = field.components](Vector const &x, double t) {
    Vector v(static_cast<Index>(components.size()));
    for (std::size_t j = 0; j < components.size(); ++j) {
      v[static_cast<Index>(j)] = eval_expr(components[j], x, t);
    }
    return v;
  };
  out.divergence = [parts = field.divergence_components](Vector const &x, double t) {
    double div = 0.0;
    for (auto const &p : parts) {
      div += eval_expr(p, x, t);
    }
    return div;
  };
  return out;
}

} // namespace sanode
