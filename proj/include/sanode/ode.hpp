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

#include "sanode/errors.hpp"
#include "sanode/field.hpp"

#include <Eigen/Core>

#include <cmath>
#include <optional>
#include <string>

namespace sanode {

/// Uniform grid t_l = t0 + l·dt, l = 0..M, dt = (t1 − t0)/M. Knots are computed
/// from the integer index, never by accumulation.
class TimeGrid
{
public:
  TimeGrid(double t0, double t1, Index steps);

  /// Grid with step count round((t1 − t0)/dt); rejects a dt that does not divide
  /// the interval to within 1e-9 relative.
  static TimeGrid with_step(double t0, double t1, double dt);

  double t0() const { return t0_; }
  double t1() const { return t1_; }
  Index steps() const { return steps_; }
  Index knots() const { return steps_ + 1; }
  double dt() const { return (t1_ - t0_) / static_cast<double>(steps_); }
  double knot(Index l) const { return t0_ + static_cast<double>(l) * dt(); }

  bool operator==(TimeGrid const &) const = default;

private:
  double t0_;
  double t1_;
  Index steps_;
};

/// One solution path: states is (M + 1) × d, row l at knot l. `logmass`, when
/// present, holds log ρ(t_l) − log ρ(t_0) along the path.
struct Trajectory
{
  TimeGrid grid;
  Matrix states;
  std::optional<Vector> logmass;
};

/// State components beyond this magnitude abort integration.
inline constexpr double blowup_threshold = 1e12;

struct Rk4Scratch
{
  Vector k1, k2, k3, k4, y;
};

/// One classical RK4 step of signed size h for a callable f(x, t, out). The
/// callable sees the stage inputs in order; non-finite stage values throw.
template <typename F> void rk4_advance(F &&f, Vector &x, double t, double h, Rk4Scratch &s)
{
  auto check = [t](Vector const &k) {
    if (!k.allFinite()) {
      throw IntegrationBlowup("non-finite RK4 stage value near t = " + std::to_string(t), t, -1);
    }
  };
  double const half = 0.5 * h;
  f(x, t, s.k1);
  check(s.k1);
  s.y = x + half * s.k1;
  f(s.y, t + half, s.k2);
  check(s.k2);
  s.y = x + half * s.k2;
  f(s.y, t + half, s.k3);
  check(s.k3);
  s.y = x + h * s.k3;
  f(s.y, t + h, s.k4);
  check(s.k4);
  x += (h / 6.0) * (s.k1 + 2.0 * s.k2 + 2.0 * s.k3 + s.k4);
}

/// Single RK4 step of size dt > 0 from (x, t).
Vector rk4_step(FieldHandle const &f, Vector const &x, double t, double dt);

/// Forward RK4 on the grid; states row l is the iterate at knot l.
Trajectory integrate(FieldHandle const &f, Vector const &x0, TimeGrid const &grid);

/// Integrates ẋ = f(x, t) from t1 down to t0 starting at xT; rows are stored in
/// forward time order, so the last row equals xT.
Trajectory integrate_backward(FieldHandle const &f, Vector const &xT, TimeGrid const &grid);

/// Jointly integrates the state and dρ/dt = −div f · ρ (as log ρ). A zero initial
/// mass short-circuits to a zero-mass trajectory (logmass = −∞). Requires a
/// field with a divergence.
Trajectory integrate_with_mass(FieldHandle const &f, Vector const &x0, double rho0, TimeGrid const &grid);

/// Density along a trajectory carrying logmass: ρ0 · exp(logmass).
Vector mass_along(Trajectory const &traj, double rho0);

/// Foot point of the characteristic through (x, t1) and ∫_{t0}^{t1} div f ds along it.
struct CharacteristicFoot
{
  Vector foot;
  double divergence_integral;
};

/// Traces the characteristic ending at x at time grid.t1() back to grid.t0(),
/// integrating the augmented state (x, ∫div) by RK4 with negative steps.
CharacteristicFoot trace_characteristic(FieldHandle const &f, Vector const &x, TimeGrid const &grid);

} // namespace sanode
