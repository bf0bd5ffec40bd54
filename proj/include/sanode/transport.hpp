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
#include "sanode/systems.hpp"

#include <cstdint>
#include <filesystem>
#include <string>

namespace sanode {

/// nx × ny cells covering [xmin, xmax] × [ymin, ymax]; values live at cell centers.
struct GridSpec
{
  double xmin = -4.0;
  double xmax = 4.0;
  double ymin = -4.0;
  double ymax = 4.0;
  Index nx = 81;
  Index ny = 81;

  void validate() const;
  double hx() const { return (xmax - xmin) / static_cast<double>(nx); }
  double hy() const { return (ymax - ymin) / static_cast<double>(ny); }
  double cell_area() const { return hx() * hy(); }
  double x(Index ix) const { return xmin + (static_cast<double>(ix) + 0.5) * hx(); }
  double y(Index iy) const { return ymin + (static_cast<double>(iy) + 0.5) * hy(); }
  Index cells() const { return nx * ny; }

  bool operator==(GridSpec const &) const = default;
};

/// Density samples at the cell centers, row-major: values[iy·nx + ix].
struct GridDensity
{
  GridSpec grid;
  double time = 0.0;
  Vector values;

  double at(Index ix, Index iy) const { return values[iy * grid.nx + ix]; }
};

/// ρ0 sampled at the cell centers.
GridDensity sample_density(Density2D const &rho0, GridSpec const &grid);

/// Foot points X(0; x, t) of the characteristics through every cell center at
/// time t and the divergence integrals ∫₀ᵗ div f along them.
struct CharacteristicMap
{
  GridSpec grid;
  double time = 0.0;
  Matrix feet;              ///< cells × 2, row-major cell order
  Vector divergence_integral; ///< per cell
};

CharacteristicMap characteristic_map(FieldHandle const &field, GridSpec const &grid, double t, double dt = 0.01);

/// ρ0(foot) · exp(−∫ div f) per cell.
GridDensity apply_density(CharacteristicMap const &map, Density2D const &rho0);

/// ρ(x, t) = ρ0(X(0; x, t)) · exp(−∫₀ᵗ div f(X(s), s) ds) on every cell center,
/// tracing each characteristic backward with RK4 steps of at most `dt`.
/// Requires a field with a divergence (SA or analytic).
GridDensity reconstruct_density(FieldHandle const &field, Density2D const &rho0, GridSpec const &grid, double t,
                                double dt = 0.01);

/// Closed-form / reference density of a benchmark system on the grid.
GridDensity exact_density_grid(BenchmarkSystem const &sys, Density2D const &rho0, GridSpec const &grid, double t);

/// Cell-area-weighted Σ |ρ|.
double l1_norm(GridDensity const &g);

/// (cell-area-weighted Σ |approx − exact|) / rho0_norm.
double l1_error(GridDensity const &approx, GridDensity const &exact, double rho0_norm);

/// n points in the plane, one per row, with equal weights 1/n.
struct PointCloud
{
  Matrix points; ///< n × 2

  Index size() const { return points.rows(); }
};

/// Rejection sampler for a non-negative density bounded by `bound` on a box.
struct RejectionSampler
{
  Density2D density;
  double xmin, xmax, ymin, ymax;
  double bound;
  /// Proposals allowed per accepted point before giving up.
  Index max_attempts = 100000;

  PointCloud sample(Index n, std::uint64_t seed) const;
};

/// Pushes every point through the forward flow of `field` to time t (RK4 steps
/// of at most dt).
PointCloud push_forward(FieldHandle const &field, PointCloud const &cloud, double t, double dt = 0.01);

/// sampler.sample(n, seed) pushed forward to time t.
PointCloud sample_pushforward(FieldHandle const &field, RejectionSampler const &sampler, Index n, double t,
                              std::uint64_t seed, double dt = 0.01);

/// Largest cloud w1_empirical accepts.
inline constexpr Index w1_max_points = 512;

/// Equal-weight empirical Wasserstein-1 distance under the Euclidean cost: the
/// optimal assignment (Hungarian method) cost divided by n.
double w1_empirical(PointCloud const &a, PointCloud const &b);

/// Optimal assignment for a square cost matrix: result[i] is the column matched
/// to row i.
std::vector<Index> min_cost_assignment(Matrix const &cost);

// Density CSV: "bounds,xmin,xmax,ymin,ymax", "resolution,nx,ny", "time,t", then
// ny lines of nx comma-separated values (row iy = y index).
std::string density_to_csv(GridDensity const &g);
GridDensity density_from_csv(std::string const &text);
void write_density_csv(GridDensity const &g, std::filesystem::path const &path);
GridDensity read_density_csv(std::filesystem::path const &path);

} // namespace sanode
