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
#include "sanode/transport.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

namespace sanode {
namespace {

using testing::random_sa;
using testing::TempDir;

Vector xy(double a, double b)
{
  Vector v(2);
  v << a, b;
  return v;
}

double brute_force_w1(PointCloud const &a, PointCloud const &b)
{
  std::vector<Index> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double total = 0;
    for (Index i = 0; i < a.size(); ++i) {
      total += std::hypot(a.points(i, 0) - b.points(perm[i], 0), a.points(i, 1) - b.points(perm[i], 1));
    }
    best = std::min(best, total);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(a.size());
}

PointCloud random_cloud(Rng &rng, Index n)
{
  PointCloud c{Matrix(n, 2)};
  for (Index i = 0; i < n; ++i) {
    c.points.row(i) << rng.uniform(-2, 2), rng.uniform(-2, 2);
  }
  return c;
}

TEST(Reconstruct, InitialTimeSamplesDensity)
{
  GridSpec const g{-2, 2, -2, 2, 9, 7};
  GridDensity const r = reconstruct_density(make_system(SystemId::TransportSinField).rhs, densities::gaussian_wide, g, 0.0);
  EXPECT_EQ(r.values, sample_density(densities::gaussian_wide, g).values);
  EXPECT_EQ(r.at(3, 2), densities::gaussian_wide(g.x(3), g.y(2)));
}

TEST(Reconstruct, ZeroFieldKeepsDensity)
{
  GridSpec const g{-2, 2, -2, 2, 8, 8};
  GridDensity const r = reconstruct_density(SaField(3, 2, Activation::Sigmoid), densities::gaussian_narrow, g, 2.5);
  EXPECT_EQ(r.values, sample_density(densities::gaussian_narrow, g).values);
}

TEST(Reconstruct, ExactTransportSinField)
{
  BenchmarkSystem const sys = make_system(SystemId::TransportSinField);
  GridSpec const g{-4, 4, -4, 4, 21, 21};
  GridDensity const r = reconstruct_density(sys.rhs, densities::gaussian_wide, g, 2.0);
  double worst = 0;
  for (Index iy = 0; iy < g.ny; ++iy) {
    for (Index ix = 0; ix < g.nx; ++ix) {
      double const ref = exact_transport_density(sys, densities::gaussian_wide, xy(g.x(ix), g.y(iy)), 2.0);
      worst = std::max(worst, std::abs(r.at(ix, iy) - ref));
    }
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Reconstruct, ExactDoswell)
{
  BenchmarkSystem const sys = make_system(SystemId::Doswell);
  GridSpec const g{-3, 3, -3, 3, 15, 15};
  GridDensity const r = reconstruct_density(sys.rhs, densities::tanh_y, g, 2.0);
  double worst = 0;
  for (Index iy = 0; iy < g.ny; ++iy) {
    for (Index ix = 0; ix < g.nx; ++ix) {
      double const x = g.x(ix), y = g.y(iy);
      double const angle = doswell_speed(std::hypot(x, y), 2.59807) * 2.0;
      worst = std::max(worst, std::abs(r.at(ix, iy) - std::tanh(-std::sin(angle) * x + std::cos(angle) * y)));
    }
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Reconstruct, SaFieldMatchesMassIntegration)
{
  SaField const p = random_sa(4, 2, Activation::Sigmoid, 3, 0.5);
  GridSpec const g{-1, 1, -1, 1, 3, 3};
  GridDensity const r = reconstruct_density(p, densities::gaussian_narrow, g, 1.0, 0.001);
  CharacteristicFoot const foot = trace_characteristic(p, xy(g.x(2), g.y(0)), TimeGrid(0.0, 1.0, 1000));
  Trajectory const fwd = integrate_with_mass(p, foot.foot, densities::gaussian_narrow(foot.foot[0], foot.foot[1]),
                                             TimeGrid(0.0, 1.0, 1000));
  EXPECT_NEAR(r.at(2, 0), mass_along(fwd, densities::gaussian_narrow(foot.foot[0], foot.foot[1]))[1000], 1e-9);
}

TEST(Reconstruct, Errors)
{
  GridSpec const g{-1, 1, -1, 1, 3, 3};
  EXPECT_THROW(reconstruct_density(VanillaField(2, 2, 4, 0.0, 1.0, Activation::ReLU), densities::tanh_y, g, 0.5),
               UnsupportedField);
  EXPECT_THROW(reconstruct_density(SaField(2, 3, Activation::ReLU), densities::tanh_y, g, 0.5), ShapeError);
  EXPECT_THROW(reconstruct_density(SaField(2, 2, Activation::ReLU), densities::tanh_y, g, -1.0), DomainError);
  EXPECT_THROW((GridSpec{1, -1, -1, 1, 3, 3}.validate()), DomainError);
}

TEST(CharacteristicMap, SharedAcrossDensities)
{
  BenchmarkSystem const sys = make_system(SystemId::TransportSinField);
  GridSpec const g{-2, 2, -2, 2, 6, 6};
  CharacteristicMap const map = characteristic_map(sys.rhs, g, 1.5);
  for (auto rho : {Density2D(densities::gaussian_narrow), Density2D(densities::gaussian_wide)}) {
    EXPECT_EQ(apply_density(map, rho).values, reconstruct_density(sys.rhs, rho, g, 1.5).values);
  }
}

TEST(L1, HandValues)
{
  GridSpec const g{0, 2, 0, 2, 2, 2};
  GridDensity exact{g, 0.0, Vector::Constant(4, 0.5)};
  EXPECT_EQ(l1_norm(exact), 2.0);
  EXPECT_EQ(l1_error(exact, exact, l1_norm(exact)), 0.0);
  GridDensity doubled{g, 0.0, 2 * exact.values};
  EXPECT_DOUBLE_EQ(l1_error(doubled, exact, l1_norm(exact)), 1.0);
  GridDensity checker{g, 0.0, Vector(4)};
  checker.values << 1, 0, 0, 1;
  EXPECT_DOUBLE_EQ(l1_error(checker, exact, l1_norm(exact)), 1.0);
  EXPECT_DOUBLE_EQ(l1_error(checker, exact, 1.0), 2.0);
  GridDensity other{GridSpec{0, 2, 0, 2, 4, 1}, 0.0, Vector::Zero(4)};
  EXPECT_THROW(l1_error(other, exact, 1.0), ShapeError);
  EXPECT_THROW(l1_error(exact, exact, 0.0), DomainError);
}

TEST(PushForward, ZeroFieldAndSeeds)
{
  RejectionSampler const s{densities::gaussian_narrow, -4, 4, -4, 4, 1.0};
  PointCloud const a = s.sample(50, 9);
  EXPECT_EQ(a.size(), 50);
  EXPECT_EQ(a.points, s.sample(50, 9).points);
  EXPECT_NE(a.points, s.sample(50, 10).points);
  EXPECT_EQ(sample_pushforward(SaField(2, 2, Activation::ReLU), s, 50, 3.0, 9).points, a.points);
}

TEST(PushForward, DoswellKeepsRadii)
{
  RejectionSampler const s{densities::gaussian_wide, -4, 4, -4, 4, 1.0};
  PointCloud const a = s.sample(100, 1);
  PointCloud const b = push_forward(make_system(SystemId::Doswell).rhs, a, 4.0);
  for (Index i = 0; i < a.size(); ++i) {
    EXPECT_NEAR(b.points.row(i).norm(), a.points.row(i).norm(), 1e-6);
  }
}

TEST(PushForward, SamplerFailures)
{
  RejectionSampler const zero{[](double, double) { return 0.0; }, -1, 1, -1, 1, 1.0, 1000};
  EXPECT_THROW(zero.sample(3, 0), DomainError);
  RejectionSampler const low{densities::gaussian_narrow, -1, 1, -1, 1, 0.1};
  EXPECT_THROW(low.sample(100, 0), DomainError);
}

TEST(W1, HandCases)
{
  Rng rng(3);
  PointCloud const a = random_cloud(rng, 20);
  EXPECT_EQ(w1_empirical(a, a), 0.0);
  PointCloud p{Matrix(2, 2)}, q{Matrix(2, 2)};
  p.points << 0, 0, 1, 0;
  q.points << 0, 1, 1, 1;
  EXPECT_EQ(w1_empirical(p, q), 1.0);
  PointCloud r{Matrix(3, 2)};
  EXPECT_THROW(w1_empirical(p, r), ShapeError);
}

TEST(W1, EqualsPermutationBruteForce)
{
  Rng rng(77);
  for (int instance = 0; instance < 50; ++instance) {
    Index const n = 1 + static_cast<Index>(rng.below(6));
    PointCloud const a = random_cloud(rng, n);
    PointCloud const b = random_cloud(rng, n);
    EXPECT_EQ(w1_empirical(a, b), brute_force_w1(a, b)) << "instance " << instance;
  }
}

TEST(W1, MetricProperties)
{
  Rng rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    Index const n = 2 + static_cast<Index>(rng.below(30));
    PointCloud const a = random_cloud(rng, n), b = random_cloud(rng, n), c = random_cloud(rng, n);
    double const ab = w1_empirical(a, b);
    EXPECT_NEAR(ab, w1_empirical(b, a), 1e-12);
    EXPECT_LE(ab, w1_empirical(a, c) + w1_empirical(c, b) + 1e-12);
    PointCloud shifted = a;
    double const dx = rng.uniform(-1, 1), dy = rng.uniform(-1, 1);
    shifted.points.col(0).array() += dx;
    shifted.points.col(1).array() += dy;
    EXPECT_NEAR(w1_empirical(a, shifted), std::hypot(dx, dy), 1e-12);
  }
}

TEST(Assignment, SmallMatrix)
{
  Matrix cost(3, 3);
  cost << 4, 1, 3, 2, 0, 5, 3, 2, 2;
  EXPECT_EQ(min_cost_assignment(cost), (std::vector<Index>{1, 0, 2}));
}

TEST(DensityCsv, RoundTrip)
{
  TempDir dir("density");
  GridSpec const g{-1.5, 2, -3, 1, 5, 4};
  GridDensity d = sample_density(densities::gaussian_wide, g);
  d.time = 1.25;
  write_density_csv(d, dir / "d.csv");
  GridDensity const back = read_density_csv(dir / "d.csv");
  EXPECT_EQ(back.grid, g);
  EXPECT_EQ(back.time, 1.25);
  EXPECT_EQ(back.values, d.values);
  EXPECT_THROW(density_from_csv("bounds,0,1,0,1\n"), CorruptFile);
}

} // namespace
} // namespace sanode
