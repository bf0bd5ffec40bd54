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

#include "sanode/dataset.hpp"
#include "sanode/systems.hpp"
#include "support.hpp"

#include <Eigen/LU>
#include <gtest/gtest.h>

#include <algorithm>

namespace sanode {
namespace {

using testing::TempDir;

Vector xy(double a, double b)
{
  Vector v(2);
  v << a, b;
  return v;
}

TEST(Systems, SpotValues)
{
  auto rhs = [](SystemId id, Vector const &z, double t) { return make_system(id).rhs.rhs(z, t); };
  EXPECT_EQ(rhs(SystemId::Dissipative, xy(1, 0), 0), xy(0, -2));
  EXPECT_EQ(rhs(SystemId::Dissipative, xy(0, 1), 0), xy(1, -3));
  EXPECT_EQ(rhs(SystemId::Pendulum, xy(M_PI / 2, 0), 0), xy(0, -1));
  EXPECT_EQ(rhs(SystemId::Pendulum, xy(0, 2), 0), xy(2, 0));
  EXPECT_EQ(rhs(SystemId::LinearNonAut, xy(1, 2), 3), xy(1, -2));
  EXPECT_EQ(rhs(SystemId::Duffing, xy(2, 1), 0), xy(1, 2 - 8 + 0.1));
  EXPECT_NEAR(rhs(SystemId::Duffing, xy(0, 0), 1)[1], -0.1, 1e-15);
  EXPECT_EQ(rhs(SystemId::TransportSinField, xy(M_PI / 2, -M_PI / 2), 1), xy(0.5, -0.5));
  EXPECT_EQ(rhs(SystemId::TransportSinField, xy(0, M_PI / 2), 0), xy(0, 1));
  EXPECT_EQ(rhs(SystemId::Doswell, xy(0, 0), 0), xy(0, 0));
}

TEST(Systems, DoswellSpeed)
{
  EXPECT_EQ(doswell_speed(0.0, 2.59807), 2.59807);
  EXPECT_NEAR(doswell_speed(1e-6, 2.59807), 2.59807, 1e-9);
  double const r = 1.3;
  EXPECT_NEAR(doswell_speed(r, 2.59807), 2.59807 * std::tanh(r) / (r * std::cosh(r) * std::cosh(r)), 1e-15);
  EXPECT_EQ(make_system(SystemId::Doswell).params.vbar, 2.59807);
}

TEST(Systems, Names)
{
  for (auto id : {SystemId::Dissipative, SystemId::Pendulum, SystemId::LinearNonAut, SystemId::Duffing,
                  SystemId::TransportSinField, SystemId::Doswell}) {
    EXPECT_EQ(parse_system_id(to_string(id)), id);
  }
  EXPECT_THROW(parse_system_id("lorenz"), DomainError);
}

TEST(ExactFlow, DissipativeDecay)
{
  BenchmarkSystem const sys = make_system(SystemId::Dissipative);
  Matrix V(2, 2);
  V << 1, 1, -1, -2;
  Vector const x0 = xy(1, 1);
  double const C = V.norm() * V.inverse().norm() * x0.norm();
  Vector const x5 = exact_flow(sys, x0, 5.0);
  EXPECT_LE(x5.norm(), std::exp(-5.0) * C);
  Vector const coeffs = V.inverse() * x0;
  Vector const ref = coeffs[0] * std::exp(-5.0) * V.col(0) + coeffs[1] * std::exp(-10.0) * V.col(1);
  EXPECT_LE((x5 - ref).norm(), 1e-14);
}

TEST(ExactFlow, DoswellKeepsRadius)
{
  BenchmarkSystem const sys = make_system(SystemId::Doswell);
  Vector const x0 = xy(1.2, -0.4);
  for (double t : {0.5, 2.0, 4.0}) {
    EXPECT_NEAR(exact_flow(sys, x0, t).norm(), x0.norm(), 1e-15);
  }
  double const angle = doswell_speed(x0.norm(), 2.59807) * 2.0;
  Vector const ref = xy(std::cos(angle) * 1.2 + std::sin(angle) * 0.4, std::sin(angle) * 1.2 - std::cos(angle) * 0.4);
  EXPECT_LE((exact_flow(sys, x0, 2.0) - ref).norm(), 1e-14);
}

TEST(ExactFlow, TransportSinClosedForm)
{
  BenchmarkSystem const sys = make_system(SystemId::TransportSinField);
  Vector const x0 = xy(0.5, -2.0);
  Vector const fine = integrate(sys.rhs, x0, TimeGrid(0.0, 3.0, 30000)).states.bottomRows(1).transpose();
  EXPECT_LE((exact_flow(sys, x0, 3.0) - fine).norm(), 1e-12);
}

TEST(ExactFlow, FineStepSelfConsistency)
{
  BenchmarkSystem const sys = make_system(SystemId::LinearNonAut);
  Vector const x0 = xy(0.3, -0.7);
  Vector const a = exact_flow(sys, x0, 5.0);
  Vector const b = integrate(sys.rhs, x0, TimeGrid(0.0, 5.0, 100000)).states.bottomRows(1).transpose();
  EXPECT_LE((a - b).norm(), 1e-10);
}

// Backward RK4 on (x, y, ∫div) written out independently of the ode module.
double traced_density(BenchmarkSystem const &sys, Density2D const &rho0, Vector const &x, double t, Index steps)
{
  auto f = [&](Eigen::Vector3d const &s, double tau) {
    Vector const z = s.head<2>();
    Vector const v = sys.rhs.rhs(z, tau);
    return Eigen::Vector3d(v[0], v[1], sys.rhs.divergence(z, tau));
  };
  Eigen::Vector3d s(x[0], x[1], 0.0);
  double const h = -t / static_cast<double>(steps);
  for (Index n = 0; n < steps; ++n) {
    double const tau = t + static_cast<double>(n) * h;
    Eigen::Vector3d const k1 = f(s, tau);
    Eigen::Vector3d const k2 = f(s + 0.5 * h * k1, tau + 0.5 * h);
    Eigen::Vector3d const k3 = f(s + 0.5 * h * k2, tau + 0.5 * h);
    Eigen::Vector3d const k4 = f(s + h * k3, tau + h);
    s += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return rho0(s[0], s[1]) * std::exp(s[2]);
}

TEST(ExactTransportDensity, InitialTime)
{
  BenchmarkSystem const sys = make_system(SystemId::TransportSinField);
  EXPECT_EQ(exact_transport_density(sys, densities::gaussian_narrow, xy(0.3, 0.4), 0.0),
            densities::gaussian_narrow(0.3, 0.4));
}

TEST(ExactTransportDensity, TransportSinMatchesTracedCharacteristic)
{
  BenchmarkSystem const sys = make_system(SystemId::TransportSinField);
  double const ref = traced_density(sys, densities::gaussian_narrow, xy(0.5, 0.5), 1.0, 10000);
  EXPECT_NEAR(exact_transport_density(sys, densities::gaussian_narrow, xy(0.5, 0.5), 1.0), ref, 1e-7);
}

TEST(ExactTransportDensity, DoswellBackRotation)
{
  BenchmarkSystem const sys = make_system(SystemId::Doswell);
  Vector const x = xy(0.8, 1.1);
  double const t = 3.0;
  double const angle = doswell_speed(x.norm(), 2.59807) * t;
  double const y_back = -std::sin(angle) * x[0] + std::cos(angle) * x[1];
  EXPECT_NEAR(exact_transport_density(sys, densities::tanh_y, x, t), std::tanh(y_back), 1e-14);
}

TEST(Densities, Formulas)
{
  EXPECT_EQ(densities::gaussian_narrow(1, 1), std::exp(-2.0));
  EXPECT_EQ(densities::gaussian_wide(1, 1), std::exp(-0.5));
  EXPECT_EQ(densities::tanh_y(5, 0.5), std::tanh(0.5));
  EXPECT_EQ(densities::tanh_10y(5, 0.05), std::tanh(0.5));
}

TEST(Dataset, DefaultShape)
{
  TrajectoryDataset const ds = generate_dataset(make_system(SystemId::Dissipative), 0);
  EXPECT_EQ(ds.size(), 81);
  EXPECT_EQ(ds.train.size(), 40u);
  EXPECT_EQ(ds.test.size(), 41u);
  EXPECT_EQ(ds.grid.steps(), 100);
  EXPECT_EQ(ds.states.front().rows(), 101);
  EXPECT_EQ(ds.initial_point(0), xy(-2, -2));
  EXPECT_EQ(ds.initial_point(1), xy(-2, -1.5));
  EXPECT_EQ(ds.initial_point(80), xy(2, 2));
  EXPECT_NO_THROW(validate(ds));
}

TEST(Dataset, SplitIsSeeded)
{
  Split const a = random_half_split(81, 3);
  Split const b = random_half_split(81, 3);
  EXPECT_EQ(a.train, b.train);
  EXPECT_EQ(a.test, b.test);
  EXPECT_NE(a.train, random_half_split(81, 4).train);
  std::vector<Index> all = a.train;
  all.insert(all.end(), a.test.begin(), a.test.end());
  std::sort(all.begin(), all.end());
  for (Index k = 0; k < 81; ++k) {
    EXPECT_EQ(all[k], k);
  }
  EXPECT_TRUE(std::is_sorted(a.train.begin(), a.train.end()));
}

TEST(Dataset, TrajectoriesMatchIntegrator)
{
  BenchmarkSystem const sys = make_system(SystemId::Pendulum);
  TrajectoryDataset const ds = generate_dataset(sys, 1);
  EXPECT_EQ(ds.states[17], integrate(sys.rhs, ds.initial_point(17), ds.grid).states);
}

TEST(Dataset, BinaryAndCsvRoundTrip)
{
  TempDir dir("dataset");
  TrajectoryDataset const ds = generate_dataset(make_system(SystemId::Duffing), 5);
  write_dataset_binary(ds, dir / "d.bin");
  write_dataset_csv(ds, dir / "csv");
  for (TrajectoryDataset const &back : {read_dataset(dir / "d.bin"), read_dataset(dir / "csv")}) {
    EXPECT_EQ(back.system, ds.system);
    EXPECT_EQ(back.grid, ds.grid);
    EXPECT_EQ(back.train, ds.train);
    EXPECT_EQ(back.test, ds.test);
    EXPECT_EQ(back.seed, ds.seed);
    ASSERT_EQ(back.size(), ds.size());
    for (Index k = 0; k < ds.size(); ++k) {
      ASSERT_EQ(back.states[k], ds.states[k]);
    }
    EXPECT_EQ(dataset_fingerprint(back), dataset_fingerprint(ds));
  }
}

TEST(Dataset, CorruptInputs)
{
  TrajectoryDataset const ds = generate_dataset(make_system(SystemId::Dissipative), 0);
  std::string bytes = dataset_to_binary(ds);
  EXPECT_THROW(dataset_from_binary(bytes.substr(0, bytes.size() - 3)), CorruptFile);
  EXPECT_THROW(dataset_from_binary("NOPE" + bytes.substr(4)), CorruptFile);
  bytes[4] = 9;
  EXPECT_THROW(dataset_from_binary(bytes), VersionMismatch);
  EXPECT_THROW(read_dataset("/nonexistent/dataset.bin"), IoError);
}

} // namespace
} // namespace sanode
