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

#include "sanode/transport.hpp"

#include "io_util.hpp"
#include "sanode/ode.hpp"
#include "sanode/parallel.hpp"
#include "sanode/rng.hpp"

#include <cmath>
#include <limits>

namespace sanode {

void GridSpec::validate() const
{
  if (nx < 1 || ny < 1) {
    throw ShapeError("grid resolution must be positive");
  }
  if (!(xmax > xmin) || !(ymax > ymin) || !std::isfinite(xmax - xmin) || !std::isfinite(ymax - ymin)) {
    throw DomainError("grid bounds must be finite with max > min");
  }
}

namespace {

TimeGrid characteristic_grid(double t, double dt)
{
  if (!(dt > 0)) {
    throw DomainError("step size must be positive");
  }
  auto const steps = std::max<Index>(1, static_cast<Index>(std::ceil(t / dt - 1e-9)));
  return TimeGrid(0.0, t, steps);
}

void check_same_grid(GridDensity const &a, GridDensity const &b)
{
  if (!(a.grid == b.grid) || a.values.size() != b.values.size()) {
    throw ShapeError("density grids differ");
  }
}

} // namespace

GridDensity sample_density(Density2D const &rho0, GridSpec const &grid)
{
  grid.validate();
  GridDensity out{grid, 0.0, Vector(grid.cells())};
  for (Index iy = 0; iy < grid.ny; ++iy) {
    for (Index ix = 0; ix < grid.nx; ++ix) {
      out.values[iy * grid.nx + ix] = rho0(grid.x(ix), grid.y(iy));
    }
  }
  return out;
}

CharacteristicMap characteristic_map(FieldHandle const &field, GridSpec const &grid, double t, double dt)
{
  grid.validate();
  if (field_dim(field) != 2) {
    throw ShapeError("density reconstruction needs a planar field");
  }
  if (!has_divergence(field)) {
    throw UnsupportedField("density reconstruction needs a field with a divergence; '" + field_kind(field) +
                           "' has none");
  }
  if (!(t >= 0)) {
    throw DomainError("reconstruction time must be non-negative");
  }
  CharacteristicMap map{grid, t, Matrix(grid.cells(), 2), Vector::Zero(grid.cells())};
  for (Index iy = 0; iy < grid.ny; ++iy) {
    for (Index ix = 0; ix < grid.nx; ++ix) {
      map.feet.row(iy * grid.nx + ix) << grid.x(ix), grid.y(iy);
    }
  }
  if (t == 0) {
    return map;
  }
  TimeGrid const tg = characteristic_grid(t, dt);
  parallel_for(static_cast<std::size_t>(grid.ny), [&](std::size_t row) {
    auto const iy = static_cast<Index>(row);
    Vector x(2);
    for (Index ix = 0; ix < grid.nx; ++ix) {
      Index const cell = iy * grid.nx + ix;
      x = map.feet.row(cell).transpose();
      CharacteristicFoot const foot = trace_characteristic(field, x, tg);
      map.feet.row(cell) = foot.foot.transpose();
      map.divergence_integral[cell] = foot.divergence_integral;
    }
  });
  return map;
}

GridDensity apply_density(CharacteristicMap const &map, Density2D const &rho0)
{
  GridDensity out{map.grid, map.time, Vector(map.grid.cells())};
  for (Index cell = 0; cell < map.grid.cells(); ++cell) {
    double const rho = rho0(map.feet(cell, 0), map.feet(cell, 1));
    out.values[cell] = map.time == 0 ? rho : rho * std::exp(-map.divergence_integral[cell]);
  }
  return out;
}

GridDensity reconstruct_density(FieldHandle const &field, Density2D const &rho0, GridSpec const &grid, double t,
                                double dt)
{
  return apply_density(characteristic_map(field, grid, t, dt), rho0);
}

GridDensity exact_density_grid(BenchmarkSystem const &sys, Density2D const &rho0, GridSpec const &grid, double t)
{
  grid.validate();
  GridDensity out{grid, t, Vector(grid.cells())};
  parallel_for(static_cast<std::size_t>(grid.ny), [&](std::size_t row) {
    auto const iy = static_cast<Index>(row);
    Vector x(2);
    for (Index ix = 0; ix < grid.nx; ++ix) {
      x << grid.x(ix), grid.y(iy);
      out.values[iy * grid.nx + ix] = exact_transport_density(sys, rho0, x, t);
    }
  });
  return out;
}

double l1_norm(GridDensity const &g)
{
  return g.values.cwiseAbs().sum() * g.grid.cell_area();
}

double l1_error(GridDensity const &approx, GridDensity const &exact, double rho0_norm)
{
  check_same_grid(approx, exact);
  if (!(rho0_norm > 0)) {
    throw DomainError("l1_error: reference norm must be positive");
  }
  return (approx.values - exact.values).cwiseAbs().sum() * approx.grid.cell_area() / rho0_norm;
}

PointCloud RejectionSampler::sample(Index n, std::uint64_t seed) const
{
  if (n < 1) {
    throw DomainError("sample size must be positive");
  }
  if (!(bound > 0) || !(xmax > xmin) || !(ymax > ymin)) {
    throw DomainError("rejection sampler needs a positive bound and a non-empty box");
  }
  Rng rng(seed);
  PointCloud cloud{Matrix(n, 2)};
  for (Index k = 0; k < n; ++k) {
    Index attempts = 0;
    for (;;) {
      if (++attempts > max_attempts) {
        throw DomainError("rejection sampler accepted nothing in " + std::to_string(max_attempts) + " proposals");
      }
      double const x = rng.uniform(xmin, xmax);
      double const y = rng.uniform(ymin, ymax);
      double const u = rng.uniform(0.0, bound);
      double const rho = density(x, y);
      if (rho > bound * (1.0 + 1e-12)) {
        throw DomainError("density exceeds the sampler bound");
      }
      if (u < rho) {
        cloud.points(k, 0) = x;
        cloud.points(k, 1) = y;
        break;
      }
    }
  }
  return cloud;
}

PointCloud push_forward(FieldHandle const &field, PointCloud const &cloud, double t, double dt)
{
  if (field_dim(field) != cloud.points.cols()) {
    throw ShapeError("point cloud dimension does not match the field");
  }
  if (!(t >= 0)) {
    throw DomainError("push-forward time must be non-negative");
  }
  if (t == 0) {
    return cloud;
  }
  TimeGrid const tg = characteristic_grid(t, dt);
  PointCloud out{Matrix(cloud.size(), cloud.points.cols())};
  parallel_for(static_cast<std::size_t>(cloud.size()), [&](std::size_t k) {
    Vector const x0 = cloud.points.row(static_cast<Index>(k)).transpose();
    Trajectory const traj = integrate(field, x0, tg);
    out.points.row(static_cast<Index>(k)) = traj.states.row(tg.steps());
  });
  return out;
}

PointCloud sample_pushforward(FieldHandle const &field, RejectionSampler const &sampler, Index n, double t,
                              std::uint64_t seed, double dt)
{
  return push_forward(field, sampler.sample(n, seed), t, dt);
}

std::vector<Index> min_cost_assignment(Matrix const &cost)
{
  Index const n = cost.rows();
  if (cost.cols() != n) {
    throw ShapeError("assignment needs a square cost matrix");
  }
  // Shortest augmenting paths with potentials; rows and columns are 1-based,
  // column 0 is the virtual root.
  double const inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<Index> match(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (Index i = 1; i <= n; ++i) {
    match[0] = i;
    Index j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      Index const i0 = match[j0];
      double delta = inf;
      Index j1 = 0;
      for (Index j = 1; j <= n; ++j) {
        if (used[j]) {
          continue;
        }
        double const cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (Index j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      Index const j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<Index> assign(n);
  for (Index j = 1; j <= n; ++j) {
    assign[match[j] - 1] = j - 1;
  }
  return assign;
}

double w1_empirical(PointCloud const &a, PointCloud const &b)
{
  Index const n = a.size();
  if (b.size() != n || a.points.cols() != b.points.cols()) {
    throw ShapeError("w1_empirical: clouds differ in size or dimension");
  }
  if (n < 1) {
    throw ShapeError("w1_empirical: empty cloud");
  }
  if (n > w1_max_points) {
    throw DomainError("w1_empirical: at most " + std::to_string(w1_max_points) + " points supported");
  }
  if (!a.points.allFinite() || !b.points.allFinite()) {
    throw DomainError("w1_empirical: non-finite coordinates");
  }
  Matrix cost(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      cost(i, j) = a.points.cols() == 2
                     ? std::hypot(a.points(i, 0) - b.points(j, 0), a.points(i, 1) - b.points(j, 1))
                     : (a.points.row(i) - b.points.row(j)).norm();
    }
  }
  std::vector<Index> const assign = min_cost_assignment(cost);
  double total = 0.0;
  for (Index i = 0; i < n; ++i) {
    total += cost(i, assign[i]);
  }
  return total / static_cast<double>(n);
}

std::string density_to_csv(GridDensity const &g)
{
  g.grid.validate();
  if (g.values.size() != g.grid.cells()) {
    throw ShapeError("density value count does not match its grid");
  }
  using io::format_double;
  std::string out = "bounds," + format_double(g.grid.xmin) + "," + format_double(g.grid.xmax) + "," +
                    format_double(g.grid.ymin) + "," + format_double(g.grid.ymax) + "\n";
  out += "resolution," + std::to_string(g.grid.nx) + "," + std::to_string(g.grid.ny) + "\n";
  out += "time," + format_double(g.time) + "\n";
  for (Index iy = 0; iy < g.grid.ny; ++iy) {
    for (Index ix = 0; ix < g.grid.nx; ++ix) {
      if (ix) {
        out += ",";
      }
      out += format_double(g.at(ix, iy));
    }
    out += "\n";
  }
  return out;
}

GridDensity density_from_csv(std::string const &text)
{
  std::string const ctx = "density CSV";
  auto const rows = io::lines(text);
  if (rows.size() < 3) {
    throw CorruptFile("density CSV: missing header rows");
  }
  auto const b = io::split(rows[0], ',');
  auto const r = io::split(rows[1], ',');
  auto const t = io::split(rows[2], ',');
  if (b.size() != 5 || b[0] != "bounds" || r.size() != 3 || r[0] != "resolution" || t.size() != 2 || t[0] != "time") {
    throw CorruptFile("density CSV: malformed header rows");
  }
  GridDensity g;
  g.grid.xmin = io::parse_double(b[1], ctx);
  g.grid.xmax = io::parse_double(b[2], ctx);
  g.grid.ymin = io::parse_double(b[3], ctx);
  g.grid.ymax = io::parse_double(b[4], ctx);
  g.grid.nx = io::parse_int(r[1], ctx);
  g.grid.ny = io::parse_int(r[2], ctx);
  g.time = io::parse_double(t[1], ctx);
  try {
    g.grid.validate();
  } catch (Error const &e) {
    throw CorruptFile(std::string("density CSV: ") + e.what());
  }
  if (static_cast<Index>(rows.size()) != 3 + g.grid.ny) {
    throw CorruptFile("density CSV: expected " + std::to_string(g.grid.ny) + " value rows");
  }
  g.values.resize(g.grid.cells());
  for (Index iy = 0; iy < g.grid.ny; ++iy) {
    auto const cells = io::split(rows[3 + iy], ',');
    if (static_cast<Index>(cells.size()) != g.grid.nx) {
      throw CorruptFile("density CSV: row " + std::to_string(iy) + " has the wrong number of values");
    }
    for (Index ix = 0; ix < g.grid.nx; ++ix) {
      g.values[iy * g.grid.nx + ix] = io::parse_double(cells[ix], ctx);
    }
  }
  return g;
}

void write_density_csv(GridDensity const &g, std::filesystem::path const &path)
{
  io::write_file(path, density_to_csv(g));
}

GridDensity read_density_csv(std::filesystem::path const &path)
{
  return density_from_csv(io::read_file(path));
}

} // namespace sanode
