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

#include "sanode/report.hpp"

#include "io_util.hpp"
#include "sanode/hash.hpp"
#include "sanode/ode.hpp"
#include "sanode/parallel.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace sanode {

namespace {

using io::format_double;

void stats(Matrix const &errors, std::vector<Index> const &rows, Vector &mean, Vector &stdev)
{
  Index const K = errors.cols();
  mean = Vector::Zero(K);
  stdev = Vector::Zero(K);
  if (rows.empty()) {
    mean.setConstant(std::numeric_limits<double>::quiet_NaN());
    stdev.setConstant(std::numeric_limits<double>::quiet_NaN());
    return;
  }
  double const n = static_cast<double>(rows.size());
  for (Index k : rows) {
    mean += errors.row(k).transpose();
  }
  mean /= n;
  for (Index k : rows) {
    stdev += (errors.row(k).transpose() - mean).cwiseAbs2();
  }
  stdev = (stdev / n).cwiseSqrt();
}

} // namespace

ErrorReport error_stats(FieldHandle const &model, TrajectoryDataset const &ds)
{
  validate(ds);
  if (field_dim(model) != ds.dim()) {
    throw ShapeError("model dimension " + std::to_string(field_dim(model)) + " does not match dataset dimension " +
                     std::to_string(ds.dim()));
  }
  Index const N = ds.size();
  Index const K = ds.grid.knots();
  Index const d = ds.dim();
  ErrorReport r;
  r.series.grid = ds.grid;
  r.series.errors.resize(N, K);
  r.series.train.assign(N, false);
  for (Index k : ds.train) {
    r.series.train[k] = true;
  }
  r.predictions.resize(N * K, d);
  parallel_for(static_cast<std::size_t>(N), [&](std::size_t q) {
    auto const k = static_cast<Index>(q);
    Trajectory const traj = integrate(model, ds.initial_point(k), ds.grid);
    r.predictions.middleRows(k * K, K) = traj.states;
    r.series.errors.row(k) = (traj.states - ds.states[k]).rowwise().norm().transpose();
  });
  stats(r.series.errors, ds.train, r.summary.train_mean, r.summary.train_std);
  stats(r.series.errors, ds.test, r.summary.test_mean, r.summary.test_std);
  if (ds.test.empty()) {
    r.summary.e_max = r.summary.e_T = std::numeric_limits<double>::quiet_NaN();
  } else {
    r.summary.e_max = r.summary.test_mean.maxCoeff();
    r.summary.e_T = r.summary.test_mean[K - 1];
  }
  return r;
}

std::vector<ComparisonRow> build_comparison(std::vector<Model> const &models, TrajectoryDataset const &ds)
{
  std::vector<ComparisonRow> rows;
  rows.reserve(models.size());
  for (Model const &m : models) {
    ErrorReport const r = error_stats(as_field(m), ds);
    ComparisonRow row;
    row.kind = model_kind(m);
    row.neurons = std::visit([](auto const &p) { return p.neurons(); }, m);
    row.e_max = r.summary.e_max;
    row.e_T = r.summary.e_T;
    DofReport const dof = dof_report(row.kind, row.neurons, model_dim(m), ds.grid.steps());
    row.dof_paper = dof.paper_formula;
    row.dof_literal = dof.literal_count;
    rows.push_back(row);
  }
  return rows;
}

Artifact error_curves_csv(ErrorReport const &r, std::string const &path)
{
  std::string out = "t,train_mean,train_std,test_mean,test_std\n";
  ErrorSummary const &s = r.summary;
  for (Index l = 0; l < r.series.grid.knots(); ++l) {
    out += format_double(r.series.grid.knot(l)) + "," + format_double(s.train_mean[l]) + "," +
           format_double(s.train_std[l]) + "," + format_double(s.test_mean[l]) + "," + format_double(s.test_std[l]) +
           "\n";
  }
  return {path, out};
}

Artifact trajectory_errors_csv(ErrorReport const &r, std::string const &path)
{
  std::string out = "index,split,t,error\n";
  for (Index k = 0; k < r.series.errors.rows(); ++k) {
    std::string const prefix = std::to_string(k) + "," + (r.series.train[k] ? "train" : "test") + ",";
    for (Index l = 0; l < r.series.grid.knots(); ++l) {
      out += prefix + format_double(r.series.grid.knot(l)) + "," + format_double(r.series.errors(k, l)) + "\n";
    }
  }
  return {path, out};
}

Artifact trajectories_csv(ErrorReport const &r, TrajectoryDataset const &ds, std::string const &path)
{
  Index const d = ds.dim();
  Index const K = ds.grid.knots();
  std::string out = "index,split,t";
  for (Index j = 0; j < d; ++j) {
    out += ",z" + std::to_string(j + 1);
  }
  for (Index j = 0; j < d; ++j) {
    out += ",x" + std::to_string(j + 1);
  }
  out += "\n";
  for (Index k = 0; k < ds.size(); ++k) {
    if (k) {
      out += "\n";
    }
    std::string const prefix = std::to_string(k) + "," + (r.series.train[k] ? "train" : "test") + ",";
    for (Index l = 0; l < K; ++l) {
      out += prefix + format_double(ds.grid.knot(l));
      for (Index j = 0; j < d; ++j) {
        out += "," + format_double(ds.states[k](l, j));
      }
      for (Index j = 0; j < d; ++j) {
        out += "," + format_double(r.predictions(k * K + l, j));
      }
      out += "\n";
    }
  }
  return {path, out};
}

Artifact comparison_csv(std::vector<ComparisonRow> const &rows, std::string const &path)
{
  std::string out = "P,kind,e_max,e_T,dof_paper,dof_literal\n";
  for (ComparisonRow const &row : rows) {
    out += std::to_string(row.neurons) + "," + to_string(row.kind) + "," + format_double(row.e_max) + "," +
           format_double(row.e_T) + "," + std::to_string(row.dof_paper) + "," + std::to_string(row.dof_literal) + "\n";
  }
  return {path, out};
}

Artifact loss_history_csv(std::vector<double> const &history, std::string const &path)
{
  std::string out = "epoch,loss\n";
  for (std::size_t e = 0; e < history.size(); ++e) {
    out += std::to_string(e + 1) + "," + format_double(history[e]) + "\n";
  }
  return {path, out};
}

Artifact time_series_csv(Vector const &t, std::vector<std::string> const &names, std::vector<Vector> const &columns,
                         std::string const &path)
{
  if (names.size() != columns.size()) {
    throw ShapeError("time_series_csv: one name per column required");
  }
  for (Vector const &c : columns) {
    if (c.size() != t.size()) {
      throw ShapeError("time_series_csv: column length differs from the time axis");
    }
  }
  std::string out = "t";
  for (auto const &n : names) {
    out += "," + n;
  }
  out += "\n";
  for (Index i = 0; i < t.size(); ++i) {
    out += format_double(t[i]);
    for (Vector const &c : columns) {
      out += "," + format_double(c[i]);
    }
    out += "\n";
  }
  return {path, out};
}

Artifact density_artifact(GridDensity const &g, std::string const &path)
{
  return {path, density_to_csv(g)};
}

namespace {

std::string stem(std::string const &path)
{
  std::filesystem::path const p(path);
  return (p.parent_path() / p.stem()).generic_string();
}

std::string plot_header(std::string const &png)
{
  return "set terminal pngcairo size 900,600\n"
         "set output '" +
         png +
         "'\n"
         "set datafile separator ','\n"
         "set key autotitle columnhead\n";
}

} // namespace

Artifact error_curves_plot(std::string const &csv, std::string const &path)
{
  std::string s = plot_header(stem(path) + ".png");
  s += "set xlabel 't'\nset ylabel 'error'\n";
  s += "plot '" + csv + "' using 1:($2-$3):($2+$3) with filledcurves lc rgb '#ffcccc' notitle, \\\n";
  s += "     '' using 1:($4-$5):($4+$5) with filledcurves lc rgb '#ccffcc' notitle, \\\n";
  s += "     '' using 1:2 with lines lw 2 lc rgb 'red' title 'train', \\\n";
  s += "     '' using 1:4 with lines lw 2 lc rgb 'dark-green' title 'test'\n";
  return {path, s};
}

Artifact trajectories_plot(std::string const &csv, std::string const &path)
{
  std::string s = plot_header(stem(path) + ".png");
  s += "set xlabel 'x1'\nset ylabel 'x2'\nunset key\n";
  s += "plot '" + csv + "' using 4:5 with lines lc rgb 'gray' dt 2, \\\n";
  s += "     '' using (strcol(2) eq 'train' ? $6 : NaN):7 with lines lc rgb 'red', \\\n";
  s += "     '' using (strcol(2) eq 'test' ? $6 : NaN):7 with lines lc rgb 'dark-green'\n";
  return {path, s};
}

Artifact loss_history_plot(std::string const &csv, std::string const &path)
{
  std::string s = plot_header(stem(path) + ".png");
  s += "set xlabel 'epoch'\nset ylabel 'loss'\nset logscale y\n";
  s += "plot '" + csv + "' using 1:2 with lines lw 2 title 'training loss'\n";
  return {path, s};
}

Artifact time_series_plot(std::string const &csv, std::vector<std::string> const &names, std::string const &ylabel,
                          std::string const &path)
{
  std::string s = plot_header(stem(path) + ".png");
  s += "set xlabel 't'\nset ylabel '" + ylabel + "'\n";
  s += "plot ";
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) {
      s += ", \\\n     ";
    }
    s += "'" + (i ? std::string() : csv) + "' using 1:" + std::to_string(i + 2) + " with lines lw 2 title '" +
         names[i] + "'";
  }
  s += "\n";
  return {path, s};
}

Artifact density_plot(GridDensity const &g, std::string const &csv, std::string const &path)
{
  std::string s = plot_header(stem(path) + ".png");
  s += "set xlabel 'x'\nset ylabel 'y'\nset size square\nunset key\n";
  s += "set xrange [" + format_double(g.grid.xmin) + ":" + format_double(g.grid.xmax) + "]\n";
  s += "set yrange [" + format_double(g.grid.ymin) + ":" + format_double(g.grid.ymax) + "]\n";
  s += "set title 't = " + format_double(g.time) + "'\n";
  s += "plot '" + csv + "' skip 3 matrix using (" + format_double(g.grid.xmin) + "+($1+0.5)*" +
       format_double(g.grid.hx()) + "):(" + format_double(g.grid.ymin) + "+($2+0.5)*" + format_double(g.grid.hy()) +
       "):3 with image\n";
  return {path, s};
}

void emit(ArtifactSet const &artifacts, std::filesystem::path const &dir)
{
  std::set<std::string> seen;
  std::string manifest = "file,bytes,fnv1a64\n";
  for (Artifact const &a : artifacts) {
    if (a.path.empty() || a.path == "manifest.csv" || !seen.insert(a.path).second) {
      throw DomainError("artifact path '" + a.path + "' is empty, reserved or duplicated");
    }
    io::write_file(dir / a.path, a.content);
    manifest += a.path + "," + std::to_string(a.content.size()) + "," + hex64(fnv1a64(a.content)) + "\n";
  }
  io::write_file(dir / "manifest.csv", manifest);
}

} // namespace sanode
