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

#pragma once

#include "sanode/field.hpp"

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace sanode {

enum class Function
{
  Sin,
  Cos,
  Tan,
  Tanh,
  Sech,
  Exp,
  Log,
  Sqrt,
  Abs,
  Arctan
};

std::string_view function_name(Function fn);

/// Immutable expression tree over constants, the state variables x1..xd, time t,
/// unary minus, + − * /, integer powers and the unary functions above.
class Expr
{
public:
  enum class Kind
  {
    Constant,
    Variable,
    Time,
    Negate,
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Call
  };

  static Expr constant(double value);
  /// State variable x_{index+1} (index is 0-based).
  static Expr variable(int index);
  static Expr time();
  static Expr negate(Expr a);
  static Expr binary(Kind kind, Expr a, Expr b);
  static Expr power(Expr base, int exponent);
  static Expr call(Function fn, Expr arg);

  Kind kind() const { return node_->kind; }
  double value() const { return node_->value; }
  int index() const { return node_->index; }
  int exponent() const { return node_->index; }
  Function function() const { return node_->fn; }
  Expr lhs() const { return Expr(node_->lhs); }
  Expr rhs() const { return Expr(node_->rhs); }
  /// Byte offset in the source for parsed nodes, 0 for constructed ones.
  std::size_t offset() const { return node_->offset; }

  bool is_constant(double v) const { return kind() == Kind::Constant && value() == v; }

  /// Structural equality (constants compared bitwise by value).
  friend bool operator==(Expr const &a, Expr const &b);

private:
  struct Node
  {
    Kind kind;
    double value = 0.0;
    int index = 0;
    Function fn = Function::Sin;
    std::shared_ptr<Node const> lhs{};
    std::shared_ptr<Node const> rhs{};
    std::size_t offset = 0;
  };

  explicit Expr(std::shared_ptr<Node const> node)
    : node_(std::move(node))
  {
  }

  friend class ExprParser;
  static Expr make(Node node);

  std::shared_ptr<Node const> node_;
};

/// Parses `source` for a field of dimension `dim`. Precedence, tightest first:
/// ^ (integer exponent only), unary −, * /, + −; binary operators associate
/// left. Throws ParseError with the byte offset of the offending token.
Expr parse_expr(std::string_view source, Index dim);

/// Canonical text form; parse_expr(to_string(e)) reproduces parsed trees.
std::string to_string(Expr const &e);

/// IEEE evaluation. Division by zero, log/sqrt outside their domain and any
/// non-finite intermediate raise DomainError naming the sub-expression.
double eval_expr(Expr const &e, Eigen::Ref<Vector const> x, double t);

/// Differentiation variable: a state coordinate (0-based) or time.
struct DiffVar
{
  static constexpr int time_index = -1;
  int index;

  static DiffVar state(int k) { return {k}; }
  static DiffVar time() { return {time_index}; }
};

/// Symbolic partial derivative with constant folding and the identities
/// 0 + a, a·1, a·0, a/1, a^1, a^0.
Expr differentiate(Expr const &e, DiffVar var);

/// d component expressions with their symbolic diagonal derivatives ∂f_j/∂x_j.
struct ExprField
{
  Index dim = 0;
  std::vector<Expr> components;
  std::vector<Expr> divergence_components;
};

ExprField make_expr_field(std::vector<std::string> const &sources, Index dim);

/// Field file: first meaningful line "d=<int>", then one component per line.
/// Blank lines and lines starting with '#' are ignored. ParseError offsets are
/// relative to the whole text; messages carry line and column.
ExprField parse_field_file(std::string_view text);
ExprField load_field_file(std::string const &path);

AnalyticField to_analytic_field(ExprField const &field, std::string name);

} // namespace sanode
