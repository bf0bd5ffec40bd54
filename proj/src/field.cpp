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

#include "sanode/field.hpp"

namespace sanode {

namespace {

template <class... Ts> struct overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

Index field_dim(FieldHandle const &f)
{
  return std::visit(overloaded{[](SaField const &p) { return p.dim(); }, [](VanillaField const &p) { return p.dim(); },
                               [](AnalyticField const &a) { return a.dim; }},
                    f);
}

std::string field_kind(FieldHandle const &f)
{
  return std::visit(overloaded{[](SaField const &) { return std::string("sa"); },
                               [](VanillaField const &) { return std::string("vanilla"); },
                               [](AnalyticField const &a) { return "analytic:" + a.name; }},
                    f);
}

Vector field_eval(FieldHandle const &f, Vector const &x, double t)
{
  return field_eval(f, x, t, t);
}

Vector field_eval(FieldHandle const &f, Vector const &x, double t, double anchor)
{
  FieldEvaluator ev(f);
  Vector out;
  ev.eval(x, t, anchor, out);
  return out;
}

bool has_divergence(FieldHandle const &f)
{
  return std::visit(overloaded{[](SaField const &) { return true; }, [](VanillaField const &) { return false; },
                               [](AnalyticField const &a) { return static_cast<bool>(a.divergence); }},
                    f);
}

double field_divergence(FieldHandle const &f, Vector const &x, double t)
{
  FieldEvaluator ev(f);
  return ev.divergence(x, t);
}

FieldEvaluator::FieldEvaluator(FieldHandle const &f)
  : field_(&f)
  , dim_(field_dim(f))
{
  if (auto const *sa = std::get_if<SaField>(&f)) {
    ws_.emplace<SaWorkspace<double>>(*sa);
  } else if (auto const *va = std::get_if<VanillaField>(&f)) {
    ws_.emplace<VanillaWorkspace<double>>(*va);
  }
}

void FieldEvaluator::eval(Vector const &x, double t, double anchor, Vector &out)
{
  if (auto const *sa = std::get_if<SaField>(field_)) {
    std::get<SaWorkspace<double>>(ws_).eval(*sa, x, t, out);
  } else if (auto const *va = std::get_if<VanillaField>(field_)) {
    std::get<VanillaWorkspace<double>>(ws_).eval_step(*va, va->step_of(anchor), x, out);
  } else {
    auto const &an = std::get<AnalyticField>(*field_);
    if (x.size() != an.dim) {
      throw ShapeError("field '" + an.name + "' of dimension " + std::to_string(an.dim) +
                       " evaluated at a state of size " + std::to_string(x.size()));
    }
    out = an.rhs(x, t);
  }
}

double FieldEvaluator::divergence(Vector const &x, double t)
{
  if (auto const *sa = std::get_if<SaField>(field_)) {
    return std::get<SaWorkspace<double>>(ws_).divergence(*sa, x, t);
  }
  if (std::holds_alternative<VanillaField>(*field_)) {
    throw UnsupportedField("vanilla fields do not expose a divergence");
  }
  auto const &an = std::get<AnalyticField>(*field_);
  if (!an.divergence) {
    throw UnsupportedField("field '" + an.name + "' has no divergence");
  }
  if (x.size() != an.dim) {
    throw ShapeError("field '" + an.name + "': state size mismatch");
  }
  return an.divergence(x, t);
}

std::string to_string(ModelKind kind)
{
  return kind == ModelKind::SemiAutonomous ? "sa" : "vanilla";
}

ModelKind parse_model_kind(std::string const &name)
{
  if (name == "sa" || name == "semi-autonomous") {
    return ModelKind::SemiAutonomous;
  }
  if (name == "vanilla") {
    return ModelKind::Vanilla;
  }
  throw DomainError("unknown model kind '" + name + "'");
}

DofReport dof_report(ModelKind kind, long long neurons, long long dim, long long steps)
{
  if (kind == ModelKind::SemiAutonomous) {
    return {2 * neurons * dim * (dim + 1), neurons * (dim * dim + 3 * dim)};
  }
  long long const n = (2 * dim + 1) * steps * neurons;
  return {n, n};
}

} // namespace sanode
