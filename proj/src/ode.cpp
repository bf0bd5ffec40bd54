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

#include "sanode/ode.hpp"

#include <limits>

namespace sanode {

TimeGrid::TimeGrid(double t0, double t1, Index steps)
  : t0_(t0)
  , t1_(t1)
  , steps_(steps)
{
  if (steps < 1) {
    throw DomainError("TimeGrid: need at least one step");
  }
  if (!(t1 > t0) || !std::isfinite(t0) || !std::isfinite(t1)) {
    throw DomainError("TimeGrid: need finite t0 < t1");
  }
}

TimeGrid TimeGrid::with_step(double t0, double t1, double dt)
{
  if (!(dt > 0)) {
    throw DomainError("TimeGrid: dt must be positive");
  }
  double const n = (t1 - t0) / dt;
  double const rounded = std::round(n);
  if (rounded < 1 || std::abs(n - rounded) > 1e-9 * std::max(1.0, n)) {
    throw DomainError("TimeGrid: dt = " + std::to_string(dt) + " does not divide [" + std::to_string(t0) + ", " +
                      std::to_string(t1) + "]");
  }
  return TimeGrid(t0, t1, static_cast<Index>(rounded));
}

namespace {

void check_bounded(Vector const &x, double t, Index step)
{
  if (!x.allFinite() || x.cwiseAbs().maxCoeff() > blowup_threshold) {
    throw IntegrationBlowup("integration blew up at step " + std::to_string(step) + " (t = " + std::to_string(t) + ")",
                            t, step);
  }
}

void check_initial(FieldHandle const &f, Vector const &x0)
{
  if (x0.size() != field_dim(f)) {
    throw ShapeError("initial state of size " + std::to_string(x0.size()) + " for a field of dimension " +
                     std::to_string(field_dim(f)));
  }
  if (!x0.allFinite()) {
    throw DomainError("initial state is not finite");
  }
}

} // namespace

Vector rk4_step(FieldHandle const &f, Vector const &x, double t, double dt)
{
  if (!(dt > 0)) {
    throw DomainError("rk4_step: dt must be positive");
  }
  check_initial(f, x);
  FieldEvaluator ev(f);
  double const anchor = t + 0.5 * dt;
  Rk4Scratch s;
  Vector y = x;
  rk4_advance([&](Vector const &z, double tz, Vector &out) { ev.eval(z, tz, anchor, out); }, y, t, dt, s);
  return y;
}

Trajectory integrate(FieldHandle const &f, Vector const &x0, TimeGrid const &grid)
{
  check_initial(f, x0);
  FieldEvaluator ev(f);
  Trajectory traj{grid, Matrix(grid.knots(), x0.size()), std::nullopt};
  traj.states.row(0) = x0.transpose();
  Vector x = x0;
  Rk4Scratch s;
  double const h = grid.dt();
  for (Index l = 0; l < grid.steps(); ++l) {
    double const t = grid.knot(l);
    double const anchor = t + 0.5 * h;
    try {
      rk4_advance([&](Vector const &z, double tz, Vector &out) { ev.eval(z, tz, anchor, out); }, x, t, h, s);
    } catch (IntegrationBlowup const &e) {
      throw IntegrationBlowup(std::string(e.what()) + " in step " + std::to_string(l), e.time(), l);
    }
    check_bounded(x, grid.knot(l + 1), l + 1);
    traj.states.row(l + 1) = x.transpose();
  }
  return traj;
}

Trajectory integrate_backward(FieldHandle const &f, Vector const &xT, TimeGrid const &grid)
{
  check_initial(f, xT);
  FieldEvaluator ev(f);
  Trajectory traj{grid, Matrix(grid.knots(), xT.size()), std::nullopt};
  Index const M = grid.steps();
  traj.states.row(M) = xT.transpose();
  Vector x = xT;
  Rk4Scratch s;
  double const h = grid.dt();
  for (Index l = M; l > 0; --l) {
    double const t = grid.knot(l);
    double const anchor = t - 0.5 * h;
    try {
      rk4_advance([&](Vector const &z, double tz, Vector &out) { ev.eval(z, tz, anchor, out); }, x, t, -h, s);
    } catch (IntegrationBlowup const &e) {
      throw IntegrationBlowup(std::string(e.what()) + " in backward step " + std::to_string(l), e.time(), l);
    }
    check_bounded(x, grid.knot(l - 1), l - 1);
    traj.states.row(l - 1) = x.transpose();
  }
  return traj;
}

namespace {

// Augmented right-hand side for (x, ℓ) with ℓ' = sign · div f(x, t).
struct MassRhs
{
  FieldEvaluator &ev;
  Index d;
  double sign;
  Vector x, fx;

  void operator()(Vector const &y, double t, Vector &out)
  {
    x = y.head(d);
    ev.eval(x, t, t, fx);
    out.resize(d + 1);
    out.head(d) = fx;
    out[d] = sign * ev.divergence(x, t);
  }
};

} // namespace

Trajectory integrate_with_mass(FieldHandle const &f, Vector const &x0, double rho0, TimeGrid const &grid)
{
  if (!(rho0 >= 0)) {
    throw DomainError("integrate_with_mass: initial mass must be non-negative");
  }
  if (!has_divergence(f)) {
    throw UnsupportedField("integrate_with_mass: field '" + field_kind(f) + "' has no divergence");
  }
  check_initial(f, x0);
  Index const d = x0.size();
  if (rho0 == 0) {
    Trajectory traj = integrate(f, x0, grid);
    traj.logmass = Vector::Constant(grid.knots(), -std::numeric_limits<double>::infinity());
    return traj;
  }
  FieldEvaluator ev(f);
  MassRhs rhs{ev, d, -1.0, Vector(d), Vector(d)};
  Trajectory traj{grid, Matrix(grid.knots(), d), Vector(grid.knots())};
  Vector y(d + 1);
  y.head(d) = x0;
  y[d] = 0.0;
  traj.states.row(0) = x0.transpose();
  (*traj.logmass)[0] = 0.0;
  Rk4Scratch s;
  double const h = grid.dt();
  for (Index l = 0; l < grid.steps(); ++l) {
    rk4_advance(rhs, y, grid.knot(l), h, s);
    check_bounded(y, grid.knot(l + 1), l + 1);
    traj.states.row(l + 1) = y.head(d).transpose();
    (*traj.logmass)[l + 1] = y[d];
  }
  return traj;
}

Vector mass_along(Trajectory const &traj, double rho0)
{
  if (!traj.logmass) {
    throw DomainError("mass_along: trajectory carries no mass");
  }
  if (rho0 == 0) {
    return Vector::Zero(traj.logmass->size());
  }
  return rho0 * traj.logmass->array().exp();
}

CharacteristicFoot trace_characteristic(FieldHandle const &f, Vector const &x, TimeGrid const &grid)
{
  if (!has_divergence(f)) {
    throw UnsupportedField("trace_characteristic: field '" + field_kind(f) + "' has no divergence");
  }
  check_initial(f, x);
  Index const d = x.size();
  FieldEvaluator ev(f);
  // Integrating backward with ℓ' = +div accumulates ℓ(t0) = −∫_{t0}^{t1} div;
  // negate at the end.
  MassRhs rhs{ev, d, 1.0, Vector(d), Vector(d)};
  Vector y(d + 1);
  y.head(d) = x;
  y[d] = 0.0;
  Rk4Scratch s;
  double const h = grid.dt();
  for (Index l = grid.steps(); l > 0; --l) {
    rk4_advance(rhs, y, grid.knot(l), -h, s);
    check_bounded(y, grid.knot(l - 1), l - 1);
  }
  return {y.head(d), -y[d]};
}

} // namespace sanode
