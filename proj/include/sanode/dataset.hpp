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
#include "sanode/ode.hpp"
#include "sanode/systems.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace sanode {

/// Trajectories on a shared time grid with a train/test split.
struct TrajectoryDataset
{
  std::string system;
  TimeGrid grid{0.0, 1.0, 1};
  std::vector<Matrix> states; ///< each (M + 1) × d
  std::vector<Index> train;   ///< sorted
  std::vector<Index> test;    ///< sorted
  std::uint64_t seed = 0;

  Index size() const { return static_cast<Index>(states.size()); }
  Index dim() const { return states.empty() ? 0 : states.front().cols(); }
  Vector initial_point(Index k) const { return states[k].row(0).transpose(); }
};

/// Checks shapes, finiteness and that the split is a disjoint cover of the indices.
void validate(TrajectoryDataset const &ds);

/// Tensor lattice lo, lo + step, ..., hi in every coordinate; the last
/// coordinate varies fastest.
std::vector<Vector> lattice_points(Index dim, double lo, double hi, double step);

struct Split
{
  std::vector<Index> train;
  std::vector<Index> test;
};

/// floor(n/2) training indices drawn uniformly without replacement (Fisher-Yates
/// on a seeded mt19937_64); both index lists come back sorted.
Split random_half_split(Index n, std::uint64_t seed);

/// Integrates every initial point with RK4 on `grid` and splits with
/// random_half_split(seed).
TrajectoryDataset generate_dataset(FieldHandle const &field, std::string system, std::vector<Vector> const &initial_points,
                                   TimeGrid const &grid, std::uint64_t seed);

/// Default experiment: 81 lattice points on [−2, 2]² with spacing 0.5 and the
/// grid [0, 5] at dt = 0.05.
TrajectoryDataset generate_dataset(BenchmarkSystem const &sys, std::uint64_t seed);

// Binary container, all little-endian:
//   "SAND" | u32 version | u32 dim | u32 steps | u32 count | f64 t0 | f64 t1 |
//   u64 seed | u32 name length | name bytes | count × u8 (1 = train) |
//   count × (steps + 1) × dim f64, row-major per trajectory
inline constexpr std::uint32_t dataset_binary_version = 1;

std::string dataset_to_binary(TrajectoryDataset const &ds);
TrajectoryDataset dataset_from_binary(std::string const &bytes);

/// FNV-1a of the binary serialization, independent of the on-disk format.
std::uint64_t dataset_fingerprint(TrajectoryDataset const &ds);

void write_dataset_binary(TrajectoryDataset const &ds, std::filesystem::path const &path);
TrajectoryDataset read_dataset_binary(std::filesystem::path const &path);

/// CSV bundle: `manifest.csv` plus one `traj_NNNNN.csv` (columns t,x1..xd) per
/// trajectory, values printed with 17 significant digits.
void write_dataset_csv(TrajectoryDataset const &ds, std::filesystem::path const &dir);
TrajectoryDataset read_dataset_csv(std::filesystem::path const &dir);

/// Directory → CSV bundle, regular file → binary container.
TrajectoryDataset read_dataset(std::filesystem::path const &path);

} // namespace sanode
