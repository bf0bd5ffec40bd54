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

#include "sanode/sa_field.hpp"
#include "sanode/vanilla_field.hpp"

#include <Eigen/Core>

#include <functional>
#include <string>
#include <variant>

namespace sanode {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A closed-form right-hand side, optionally with its divergence.
struct AnalyticField
{
  Index dim = 0;
  std::function<Vector(Vector const &, double)> rhs;
  std::function<double(Vector const &, double)> divergence;
  std::string name;
};

using SaField = SaParams<double>;
using VanillaField = VanillaParams<double>;
using FieldHandle = std::variant<SaField, VanillaField, AnalyticField>;

Index field_dim(FieldHandle const &f);
std::string field_kind(FieldHandle const &f);

/// f(x, t). For vanilla fields `anchor` selects the governing step (default: the
/// step containing t); RK4 passes the step midpoint so that every stage of one
/// step uses the same block.
Vector field_eval(FieldHandle const &f, Vector const &x, double t);
Vector field_eval(FieldHandle const &f, Vector const &x, double t, double anchor);

bool has_divergence(FieldHandle const &f);
/// Throws UnsupportedField when the field kind does not expose a divergence.
double field_divergence(FieldHandle const &f, Vector const &x, double t);

/// Allocation-free repeated evaluation of one field handle; one per thread.
class FieldEvaluator
{
public:
  explicit FieldEvaluator(FieldHandle const &f);

  Index dim() const { return dim_; }
  void eval(Vector const &x, double t, double anchor, Vector &out);
  double divergence(Vector const &x, double t);

private:
  FieldHandle const *field_;
  Index dim_;
  std::variant<std::monostate, SaWorkspace<double>, VanillaWorkspace<double>> ws_;
};

} // namespace sanode
