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

#include "io_util.hpp"
#include "sanode/hash.hpp"
#include "sanode/parallel.hpp"
#include "sanode/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

namespace sanode {

void validate(TrajectoryDataset const &ds)
{
  if (ds.states.empty()) {
    throw ShapeError("dataset has no trajectories");
  }
  Index const d = ds.dim();
  for (Index k = 0; k < ds.size(); ++k) {
    Matrix const &s = ds.states[k];
    if (s.rows() != ds.grid.knots() || s.cols() != d) {
      throw ShapeError("trajectory " + std::to_string(k) + " has shape " + std::to_string(s.rows()) + "x" +
                       std::to_string(s.cols()) + ", expected " + std::to_string(ds.grid.knots()) + "x" +
                       std::to_string(d));
    }
    if (!s.allFinite()) {
      throw DomainError("trajectory " + std::to_string(k) + " contains non-finite values");
    }
  }
  std::vector<int> seen(ds.states.size(), 0);
  for (auto const *part : {&ds.train, &ds.test}) {
    for (Index k : *part) {
      if (k < 0 || k >= ds.size()) {
        throw ShapeError("split index " + std::to_string(k) + " out of range");
      }
      ++seen[k];
    }
  }
  for (std::size_t k = 0; k < seen.size(); ++k) {
    if (seen[k] != 1) {
      throw ShapeError("split does not partition the trajectories (index " + std::to_string(k) + ")");
    }
  }
}

std::vector<Vector> lattice_points(Index dim, double lo, double hi, double step)
{
  if (dim < 1 || !(step > 0) || hi < lo) {
    throw DomainError("lattice_points: invalid lattice specification");
  }
  auto const per_axis = static_cast<Index>(std::floor((hi - lo) / step + 1e-9)) + 1;
  Index total = 1;
  for (Index k = 0; k < dim; ++k) {
    total *= per_axis;
  }
  std::vector<Vector> out;
  out.reserve(total);
  for (Index n = 0; n < total; ++n) {
    Vector p(dim);
    Index rem = n;
    for (Index k = dim - 1; k >= 0; --k) {
      p[k] = lo + static_cast<double>(rem % per_axis) * step;
      rem /= per_axis;
    }
    out.push_back(std::move(p));
  }
  return out;
}

Split random_half_split(Index n, std::uint64_t seed)
{
  std::vector<Index> perm(n);
  for (Index i = 0; i < n; ++i) {
    perm[i] = i;
  }
  Rng rng(seed);
  for (Index i = n - 1; i > 0; --i) {
    auto const j = static_cast<Index>(rng.below(static_cast<std::uint64_t>(i + 1)));
    std::swap(perm[i], perm[j]);
  }
  Split split;
  split.train.assign(perm.begin(), perm.begin() + n / 2);
  split.test.assign(perm.begin() + n / 2, perm.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

TrajectoryDataset generate_dataset(FieldHandle const &field, std::string system, std::vector<Vector> const &initial_points,
                                   TimeGrid const &grid, std::uint64_t seed)
{
  if (initial_points.empty()) {
    throw ShapeError("generate_dataset: no initial points");
  }
  TrajectoryDataset ds;
  ds.system = std::move(system);
  ds.grid = grid;
  ds.seed = seed;
  ds.states.resize(initial_points.size());
  parallel_for(initial_points.size(),
               [&](std::size_t k) { ds.states[k] = integrate(field, initial_points[k], grid).states; });
  Split split = random_half_split(static_cast<Index>(initial_points.size()), seed);
  ds.train = std::move(split.train);
  ds.test = std::move(split.test);
  return ds;
}

TrajectoryDataset generate_dataset(BenchmarkSystem const &sys, std::uint64_t seed)
{
  return generate_dataset(sys.rhs, to_string(sys.id), lattice_points(sys.dim, -2.0, 2.0, 0.5),
                          TimeGrid::with_step(0.0, 5.0, 0.05), seed);
}

// ---------------------------------------------------------------------------
// Binary container

std::string dataset_to_binary(TrajectoryDataset const &ds)
{
  validate(ds);
  std::string out = "SAND";
  io::put<std::uint32_t>(out, dataset_binary_version);
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.dim()));
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.grid.steps()));
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.size()));
  io::put<double>(out, ds.grid.t0());
  io::put<double>(out, ds.grid.t1());
  io::put<std::uint64_t>(out, ds.seed);
  io::put<std::uint32_t>(out, static_cast<std::uint32_t>(ds.system.size()));
  out += ds.system;
  std::string flags(ds.states.size(), '\0');
  for (Index k : ds.train) {
    flags[k] = '\1';
  }
  out += flags;
  for (Matrix const &s : ds.states) {
    for (Index l = 0; l < s.rows(); ++l) {
      for (Index j = 0; j < s.cols(); ++j) {
        io::put<double>(out, s(l, j));
      }
    }
  }
  return out;
}

TrajectoryDataset dataset_from_binary(std::string const &bytes)
{
  io::ByteReader in(bytes, "dataset");
  if (in.take(4) != "SAND") {
    throw CorruptFile("dataset: bad magic");
  }
  auto const version = in.get<std::uint32_t>();
  if (version != dataset_binary_version) {
    throw VersionMismatch("dataset: unsupported version " + std::to_string(version));
  }
  auto const dim = in.get<std::uint32_t>();
  auto const steps = in.get<std::uint32_t>();
  auto const count = in.get<std::uint32_t>();
  double const t0 = in.get<double>();
  double const t1 = in.get<double>();
  TrajectoryDataset ds;
  ds.seed = in.get<std::uint64_t>();
  auto const name_len = in.get<std::uint32_t>();
  ds.system = std::string(in.take(name_len));
  if (dim == 0 || steps == 0 || count == 0) {
    throw CorruptFile("dataset: empty header fields");
  }
  try {
    ds.grid = TimeGrid(t0, t1, steps);
  } catch (DomainError const &e) {
    throw CorruptFile(std::string("dataset: ") + e.what());
  }
  std::string_view const flags = in.take(count);
  for (std::uint32_t k = 0; k < count; ++k) {
    (flags[k] ? ds.train : ds.test).push_back(k);
  }
  std::size_t const needed = std::size_t(count) * (steps + 1) * dim * sizeof(double);
  if (in.remaining() != needed) {
    throw CorruptFile("dataset: payload has " + std::to_string(in.remaining()) + " bytes, expected " +
                      std::to_string(needed));
  }
  ds.states.assign(count, Matrix(steps + 1, dim));
  for (auto &s : ds.states) {
    for (Index l = 0; l < s.rows(); ++l) {
      for (Index j = 0; j < s.cols(); ++j) {
        s(l, j) = in.get<double>();
      }
    }
  }
  in.expect_end();
  validate(ds);
  return ds;
}

std::uint64_t dataset_fingerprint(TrajectoryDataset const &ds)
{
  return fnv1a64(dataset_to_binary(ds));
}

void write_dataset_binary(TrajectoryDataset const &ds, std::filesystem::path const &path)
{
  io::write_file(path, dataset_to_binary(ds));
}

TrajectoryDataset read_dataset_binary(std::filesystem::path const &path)
{
  return dataset_from_binary(io::read_file(path));
}

// ---------------------------------------------------------------------------
// CSV bundle

namespace {

std::string trajectory_file_name(Index k)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "traj_%05ld.csv", static_cast<long>(k));
  return buf;
}

} // namespace

void write_dataset_csv(TrajectoryDataset const &ds, std::filesystem::path const &dir)
{
  validate(ds);
  std::filesystem::create_directories(dir);
  std::set<Index> const train(ds.train.begin(), ds.train.end());
  std::string manifest = "sanode-dataset,1\n";
  manifest += "system," + ds.system + "\n";
  manifest += "dim," + std::to_string(ds.dim()) + "\n";
  manifest += "t0," + io::format_double(ds.grid.t0()) + "\n";
  manifest += "t1," + io::format_double(ds.grid.t1()) + "\n";
  manifest += "steps," + std::to_string(ds.grid.steps()) + "\n";
  manifest += "seed," + std::to_string(ds.seed) + "\n";
  manifest += "trajectories," + std::to_string(ds.size()) + "\n";
  manifest += "index,split,file\n";
  for (Index k = 0; k < ds.size(); ++k) {
    std::string const name = trajectory_file_name(k);
    manifest += std::to_string(k) + "," + (train.count(k) ? "train" : "test") + "," + name + "\n";
    std::string body = "t";
    for (Index j = 0; j < ds.dim(); ++j) {
      body += ",x" + std::to_string(j + 1);
    }
    body += "\n";
    Matrix const &s = ds.states[k];
    for (Index l = 0; l < s.rows(); ++l) {
      body += io::format_double(ds.grid.knot(l));
      for (Index j = 0; j < s.cols(); ++j) {
        body += "," + io::format_double(s(l, j));
      }
      body += "\n";
    }
    io::write_file(dir / name, body);
  }
  io::write_file(dir / "manifest.csv", manifest);
}

TrajectoryDataset read_dataset_csv(std::filesystem::path const &dir)
{
  std::string const text = io::read_file(dir / "manifest.csv");
  auto const rows = io::lines(text);
  std::string const ctx = (dir / "manifest.csv").string();
  if (rows.size() < 9 || rows[0] != "sanode-dataset,1") {
    throw CorruptFile(ctx + ": not a sanode dataset manifest (version 1)");
  }
  auto value = [&](std::size_t row, std::string_view key) {
    auto const cells = io::split(rows[row], ',');
    if (cells.size() != 2 || cells[0] != key) {
      throw CorruptFile(ctx + ": expected '" + std::string(key) + "' on line " + std::to_string(row + 1));
    }
    return cells[1];
  };
  TrajectoryDataset ds;
  ds.system = std::string(value(1, "system"));
  auto const dim = io::parse_int(value(2, "dim"), ctx);
  double const t0 = io::parse_double(value(3, "t0"), ctx);
  double const t1 = io::parse_double(value(4, "t1"), ctx);
  auto const steps = io::parse_int(value(5, "steps"), ctx);
  ds.seed = static_cast<std::uint64_t>(std::stoull(std::string(value(6, "seed"))));
  auto const count = io::parse_int(value(7, "trajectories"), ctx);
  if (dim < 1 || steps < 1 || count < 1) {
    throw CorruptFile(ctx + ": invalid header values");
  }
  ds.grid = TimeGrid(t0, t1, steps);
  if (rows[8] != "index,split,file" || static_cast<long long>(rows.size()) != 9 + count) {
    throw CorruptFile(ctx + ": trajectory table does not match the declared count");
  }
  ds.states.resize(count);
  for (long long k = 0; k < count; ++k) {
    auto const cells = io::split(rows[9 + k], ',');
    if (cells.size() != 3 || io::parse_int(cells[0], ctx) != k) {
      throw CorruptFile(ctx + ": malformed trajectory row " + std::to_string(k));
    }
    if (cells[1] == "train") {
      ds.train.push_back(k);
    } else if (cells[1] == "test") {
      ds.test.push_back(k);
    } else {
      throw CorruptFile(ctx + ": unknown split '" + std::string(cells[1]) + "'");
    }
    std::filesystem::path const file = dir / std::string(cells[2]);
    std::string const body = io::read_file(file);
    auto const lines = io::lines(body);
    if (static_cast<long long>(lines.size()) != steps + 2) {
      throw CorruptFile(file.string() + ": expected " + std::to_string(steps + 2) + " lines");
    }
    Matrix s(steps + 1, dim);
    for (long long l = 0; l <= steps; ++l) {
      auto const vals = io::split(lines[l + 1], ',');
      if (static_cast<long long>(vals.size()) != dim + 1) {
        throw CorruptFile(file.string() + ": wrong column count on line " + std::to_string(l + 2));
      }
      double const t = io::parse_double(vals[0], file.string());
      if (std::abs(t - ds.grid.knot(l)) > 1e-9 * std::max(1.0, std::abs(t))) {
        throw CorruptFile(file.string() + ": time column disagrees with the manifest grid");
      }
      for (long long j = 0; j < dim; ++j) {
        s(l, j) = io::parse_double(vals[j + 1], file.string());
      }
    }
    ds.states[k] = std::move(s);
  }
  validate(ds);
  return ds;
}

TrajectoryDataset read_dataset(std::filesystem::path const &path)
{
  if (std::filesystem::is_directory(path)) {
    return read_dataset_csv(path);
  }
  return read_dataset_binary(path);
}

} // namespace sanode
