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
#include "sanode/systems.hpp"

#include <Eigen/LU>
#include <gtest/gtest.h>

namespace sanode {
namespace {

AnalyticField scalar_field(std::function<double(double, double)> f, std::function<double(double, double)> div = {})
{
  AnalyticField a;
  a.dim = 1;
  a.rhs = [f](Vector const &x, double t) { return Vector::Constant(1, f(x[0], t)); };
  if (div) {
    a.divergence = [div](Vector const &x, double t) { return div(x[0], t); };
  }
  a.name = "scalar";
  return a;
}

// e^{At} for A = [[0, 1], [-2, -3]] (eigenvalues -1, -2), by Cayley-Hamilton.
Matrix dissipative_propagator(double t)
{
  Matrix A(2, 2);
  A << 0, 1, -2, -3;
  double const e1 = std::exp(-t), e2 = std::exp(-2 * t);
  return (2 * e1 - e2) * Matrix::Identity(2, 2) + (e1 - e2) * A;
}

TEST(TimeGrid, KnotsFromIndex)
{
  TimeGrid const g = TimeGrid::with_step(0.0, 5.0, 0.05);
  EXPECT_EQ(g.steps(), 100);
  EXPECT_EQ(g.knots(), 101);
  EXPECT_EQ(g.knot(100), 5.0);
  EXPECT_EQ(g.knot(40), 2.0);
  EXPECT_THROW(TimeGrid::with_step(0.0, 1.0, 0.3), DomainError);
  EXPECT_THROW(TimeGrid(1.0, 1.0, 3), DomainError);
}

TEST(Rk4Step, ZeroFieldKeepsState)
{
  FieldHandle const f = scalar_field([](double, double) { return 0.0; });
  EXPECT_EQ(rk4_step(f, Vector::Constant(1, 2.5), 0.3, 0.1)[0], 2.5);
}

TEST(Rk4Step, ExactOnCubicInTime)
{
  FieldHandle const f = scalar_field([](double, double t) { return t * t * t; });
  EXPECT_DOUBLE_EQ(rk4_step(f, Vector::Zero(1), 0.0, 1.0)[0], 0.25);
}

TEST(Rk4Step, NonFiniteStageThrows)
{
  FieldHandle const f = scalar_field([](double x, double) { return 1.0 / x; });
  EXPECT_THROW(rk4_step(f, Vector::Zero(1), 0.0, 0.1), IntegrationBlowup);
}

TEST(Integrate, ExponentialDecay)
{
  FieldHandle const f = scalar_field([](double x, double) { return -x; });
  Trajectory const tr = integrate(f, Vector::Ones(1), TimeGrid(0.0, 5.0, 100));
  ASSERT_EQ(tr.states.rows(), 101);
  EXPECT_EQ(tr.states(0, 0), 1.0);
  // One RK4 step multiplies by the degree-4 Taylor polynomial of e^{-h}.
  double const h = 0.05;
  double const factor = 1 - h + h * h / 2 - h * h * h / 6 + h * h * h * h / 24;
  EXPECT_NEAR(tr.states(100, 0), std::pow(factor, 100), 1e-16);
  EXPECT_NEAR(tr.states(100, 0), std::exp(-5.0), 2e-9);
}

TEST(Integrate, DissipativeMatchesMatrixExponential)
{
  BenchmarkSystem const sys = make_system(SystemId::Dissipative);
  Vector x0(2);
  x0 << 1, 0;
  TimeGrid const grid = TimeGrid::with_step(0.0, 5.0, 0.05);
  Trajectory const tr = integrate(sys.rhs, x0, grid);
  double worst = 0;
  for (Index l = 0; l < grid.knots(); ++l) {
    Vector const ref = dissipative_propagator(grid.knot(l)) * x0;
    worst = std::max(worst, (tr.states.row(l).transpose() - ref).norm());
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Integrate, BlowupIsReported)
{
  FieldHandle const f = scalar_field([](double x, double) { return x * x; });
  try {
    integrate(f, Vector::Ones(1), TimeGrid(0.0, 2.0, 200));
    FAIL() << "expected blow-up";
  } catch (IntegrationBlowup const &e) {
    EXPECT_GT(e.time(), 0.5);
    EXPECT_LT(e.time(), 2.0);
  }
}

TEST(IntegrateBackward, ZeroFieldIsConstant)
{
  FieldHandle const f = scalar_field([](double, double) { return 0.0; });
  Trajectory const tr = integrate_backward(f, Vector::Constant(1, 3.0), TimeGrid(0.0, 1.0, 10));
  EXPECT_TRUE((tr.states.array() == 3.0).all());
}

// Forward then backward RK4 on a linear system multiplies each eigenmode by
// R(λh)^M R(−λh)^M, R the RK4 stability polynomial; the round trip must match
// that prediction, which for the fast mode (λ = −2) leaves about 1.4e-6 per unit.
TEST(IntegrateBackward, RoundTripDissipative)
{
  BenchmarkSystem const sys = make_system(SystemId::Dissipative);
  TimeGrid const grid = TimeGrid::with_step(0.0, 5.0, 0.05);
  auto R = [](double z) { return 1 + z + z * z / 2 + z * z * z / 6 + z * z * z * z / 24; };
  Matrix V(2, 2);
  V << 1, 1, -1, -2;
  Vector const slow = V.col(0);
  for (Vector const &x0 : {Vector(slow), Vector(V.col(1)), Vector(Vector::Unit(2, 0))}) {
    Trajectory const fwd = integrate(sys.rhs, x0, grid);
    Trajectory const back = integrate_backward(sys.rhs, fwd.states.bottomRows(1).transpose(), grid);
    EXPECT_EQ(back.states.bottomRows(1), fwd.states.bottomRows(1));
    Vector const c = V.fullPivLu().solve(x0);
    double const h = grid.dt();
    Vector predicted = Vector::Zero(2);
    double const lambda[2] = {-1.0, -2.0};
    for (int m = 0; m < 2; ++m) {
      predicted += c[m] * std::pow(R(lambda[m] * h) * R(-lambda[m] * h), 100) * V.col(m);
    }
    EXPECT_LE((back.states.row(0).transpose() - predicted).norm(), 1e-12);
  }
  Trajectory const fwd = integrate(sys.rhs, slow, grid);
  Trajectory const back = integrate_backward(sys.rhs, fwd.states.bottomRows(1).transpose(), grid);
  EXPECT_LE((back.states.row(0).transpose() - slow).norm(), 1e-6);
}

TEST(IntegrateBackward, ExponentialTimeReversal)
{
  FieldHandle const f = scalar_field([](double x, double) { return -x; });
  Trajectory const tr = integrate_backward(f, Vector::Constant(1, std::exp(-5.0)), TimeGrid(0.0, 5.0, 500));
  EXPECT_NEAR(tr.states(0, 0), 1.0, 1e-8);
}

TEST(IntegrateWithMass, DivergenceFreeKeepsMass)
{
  BenchmarkSystem const sys = make_system(SystemId::Doswell);
  Vector x0(2);
  x0 << 0.7, -1.2;
  Trajectory const tr = integrate_with_mass(sys.rhs, x0, 0.4, TimeGrid(0.0, 4.0, 80));
  ASSERT_TRUE(tr.logmass.has_value());
  EXPECT_LE(tr.logmass->cwiseAbs().maxCoeff(), 1e-10);
}

TEST(IntegrateWithMass, ExpandingFlowThinsDensity)
{
  FieldHandle const f = scalar_field([](double x, double) { return x; }, [](double, double) { return 1.0; });
  Trajectory const tr = integrate_with_mass(f, Vector::Constant(1, 0.5), 1.0, TimeGrid(0.0, 1.0, 20));
  EXPECT_NEAR(mass_along(tr, 1.0)[20], std::exp(-1.0), 1e-9);
}

TEST(IntegrateWithMass, ZeroMassStaysZero)
{
  FieldHandle const f = scalar_field([](double x, double) { return x; }, [](double, double) { return 1.0; });
  Trajectory const tr = integrate_with_mass(f, Vector::Constant(1, 0.5), 0.0, TimeGrid(0.0, 1.0, 20));
  EXPECT_TRUE((mass_along(tr, 0.0).array() == 0.0).all());
}

TEST(IntegrateWithMass, NeedsDivergence)
{
  FieldHandle const f = scalar_field([](double x, double) { return x; });
  EXPECT_THROW(integrate_with_mass(f, Vector::Ones(1), 1.0, TimeGrid(0.0, 1.0, 4)), UnsupportedField);
  VanillaField const v(2, 1, 4, 0.0, 1.0, Activation::ReLU);
  EXPECT_THROW(integrate_with_mass(v, Vector::Ones(1), 1.0, TimeGrid(0.0, 1.0, 4)), UnsupportedField);
}

TEST(TraceCharacteristic, LinearFlow)
{
  FieldHandle const f = scalar_field([](double x, double) { return x; }, [](double, double) { return 1.0; });
  CharacteristicFoot const foot = trace_characteristic(f, Vector::Constant(1, std::exp(1.0)), TimeGrid(0.0, 1.0, 100));
  EXPECT_NEAR(foot.foot[0], 1.0, 1e-9);
  EXPECT_NEAR(foot.divergence_integral, 1.0, 1e-12);
}

TEST(Integrate, VanillaUsesStepBlocks)
{
  VanillaField p(1, 1, 2, 0.0, 1.0, Activation::ReLU);
  p.b(0, 0) = 1;
  p.w(0, 0, 0) = 1;
  p.b(1, 0) = 1;
  p.w(1, 0, 0) = 3;
  Trajectory const tr = integrate(p, Vector::Zero(1), TimeGrid(0.0, 1.0, 2));
  EXPECT_DOUBLE_EQ(tr.states(1, 0), 0.5);
  EXPECT_DOUBLE_EQ(tr.states(2, 0), 2.0);
}

} // namespace
} // namespace sanode
