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
#include "sanode/hash.hpp"
#include "support.hpp"

#include "../src/io_util.hpp"

#include <gtest/gtest.h>

namespace sanode {
namespace {

using testing::random_sa;
using testing::TempDir;

TEST(ErrorStats, GeneratingFieldHasNoError)
{
  BenchmarkSystem const sys = make_system(SystemId::Dissipative);
  TrajectoryDataset const ds = generate_dataset(sys, 0);
  ErrorReport const r = error_stats(sys.rhs, ds);
  EXPECT_LE(r.series.errors.maxCoeff(), 1e-12);
  EXPECT_LE(r.summary.e_max, 1e-12);
  EXPECT_EQ(r.predictions.rows(), 81 * 101);
}

TEST(ErrorStats, SummaryDefinitions)
{
  TrajectoryDataset const ds = generate_dataset(make_system(SystemId::Pendulum), 2);
  ErrorReport const r = error_stats(random_sa(5, 2, Activation::ReLU, 1, 0.3), ds);
  Index const M = ds.grid.steps();
  for (Index l : {Index(0), Index(17), M}) {
    double sum = 0, sq = 0;
    for (Index k : ds.test) {
      sum += r.series.errors(k, l);
    }
    double const mean = sum / static_cast<double>(ds.test.size());
    for (Index k : ds.test) {
      sq += (r.series.errors(k, l) - mean) * (r.series.errors(k, l) - mean);
    }
    EXPECT_NEAR(r.summary.test_mean[l], mean, 1e-14);
    EXPECT_NEAR(r.summary.test_std[l], std::sqrt(sq / static_cast<double>(ds.test.size())), 1e-14);
  }
  EXPECT_EQ(r.summary.e_T, r.summary.test_mean[M]);
  EXPECT_EQ(r.summary.e_max, r.summary.test_mean.maxCoeff());
  EXPECT_EQ(r.summary.train_mean[0], 0.0);
  for (Index k = 0; k < ds.size(); ++k) {
    Vector const x = integrate(random_sa(5, 2, Activation::ReLU, 1, 0.3), ds.initial_point(k), ds.grid)
                       .states.row(M)
                       .transpose();
    EXPECT_NEAR(r.series.errors(k, M), (x - ds.states[k].row(M).transpose()).norm(), 1e-14);
  }
}

TEST(ErrorStats, EmptyTestSplit)
{
  TrajectoryDataset ds = generate_dataset(make_system(SystemId::Dissipative), 0);
  ds.train.insert(ds.train.end(), ds.test.begin(), ds.test.end());
  std::sort(ds.train.begin(), ds.train.end());
  ds.test.clear();
  ErrorReport const r = error_stats(SaField(2, 2, Activation::ReLU), ds);
  EXPECT_TRUE(std::isnan(r.summary.e_max));
  EXPECT_TRUE(std::isnan(r.summary.e_T));
  EXPECT_THROW(error_stats(SaField(2, 3, Activation::ReLU), ds), ShapeError);
}

TEST(Comparison, DofColumns)
{
  TrajectoryDataset const ds = generate_dataset(make_system(SystemId::Dissipative), 0);
  std::vector<Model> models;
  for (Index P : {100, 500, 1000}) {
    models.push_back(SaField(P, 2, Activation::ReLU));
  }
  for (Index P : {100, 500, 1000}) {
    models.push_back(VanillaField(P, 2, 100, 0.0, 5.0, Activation::ReLU));
  }
  auto const rows = build_comparison(models, ds);
  ASSERT_EQ(rows.size(), 6u);
  std::vector<long long> const paper = {1200, 6000, 12000, 50000, 250000, 500000};
  for (std::size_t n = 0; n < 6; ++n) {
    EXPECT_EQ(rows[n].dof_paper, paper[n]);
  }
  EXPECT_EQ(rows[0].dof_literal, 1000);
  EXPECT_EQ(rows[3].kind, ModelKind::Vanilla);
  EXPECT_EQ(rows[4].neurons, 500);
  EXPECT_TRUE(build_comparison({}, ds).empty());
  std::string const csv = comparison_csv(rows).content;
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "P,kind,e_max,e_T,dof_paper,dof_literal");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 7);
}

TEST(Emit, WritesFilesAndManifest)
{
  TempDir dir("emit");
  ArtifactSet const arts = {{"a.csv", "x,y\n1,2\n"}, {"sub/b.gp", "plot 'a.csv'\n"}};
  emit(arts, dir.path());
  EXPECT_EQ(io::read_file(dir / "a.csv"), "x,y\n1,2\n");
  EXPECT_EQ(io::read_file(dir / "sub/b.gp"), "plot 'a.csv'\n");
  std::string const manifest = io::read_file(dir / "manifest.csv");
  EXPECT_NE(manifest.find("a.csv,8," + hex64(fnv1a64("x,y\n1,2\n"))), std::string::npos) << manifest;
  EXPECT_THROW(emit({{"a.csv", ""}, {"a.csv", ""}}, dir.path()), DomainError);
  EXPECT_THROW(emit({{"manifest.csv", ""}}, dir.path()), DomainError);
}

TEST(Emit, ByteIdenticalReruns)
{
  TempDir dir("emit_twice");
  TrajectoryDataset const ds = generate_dataset(make_system(SystemId::Dissipative), 0);
  SaField const m = random_sa(6, 2, Activation::Sigmoid, 4, 0.3);
  for (char const *sub : {"one", "two"}) {
    ErrorReport const r = error_stats(m, ds);
    emit({error_curves_csv(r), trajectory_errors_csv(r), trajectories_csv(r, ds), error_curves_plot()}, dir / sub);
  }
  for (char const *file : {"error_curves.csv", "trajectory_errors.csv", "trajectories.csv", "manifest.csv"}) {
    EXPECT_EQ(io::read_file(dir / "one" / file), io::read_file(dir / "two" / file)) << file;
  }
}

TEST(Plots, ReferenceOnlyTheirCsv)
{
  Artifact const p = error_curves_plot("curves.csv", "curves.gp");
  EXPECT_EQ(p.path, "curves.gp");
  EXPECT_NE(p.content.find("'curves.csv'"), std::string::npos);
  GridDensity const g = sample_density(densities::gaussian_narrow, GridSpec{-1, 1, -1, 1, 3, 3});
  Artifact const d = density_plot(g, "rho.csv", "rho.gp");
  EXPECT_NE(d.content.find("'rho.csv'"), std::string::npos);
  EXPECT_EQ(density_artifact(g, "rho.csv").content, density_to_csv(g));
}

TEST(Csv, TimeSeriesAndHistory)
{
  Vector t(3), a(3);
  t << 0, 0.5, 1;
  a << 1, 2, 3;
  EXPECT_EQ(time_series_csv(t, {"a"}, {a}, "s.csv").content, "t,a\n0,1\n0.5,2\n1,3\n");
  EXPECT_THROW(time_series_csv(t, {"a", "b"}, {a}, "s.csv"), ShapeError);
  EXPECT_EQ(loss_history_csv({0.25, 0.125}).content, "epoch,loss\n1,0.25\n2,0.125\n");
}

} // namespace
} // namespace sanode
