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

#include "sanode/dataset.hpp"
#include "sanode/field.hpp"
#include "sanode/train.hpp"
#include "sanode/transport.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace sanode {

/// Per-trajectory errors e_k(t_l) = ‖z_k(t_l) − x_k(t_l)‖.
struct ErrorSeries
{
  TimeGrid grid{0.0, 1.0, 1};
  Matrix errors;           ///< N × (M + 1)
  std::vector<bool> train; ///< split label per trajectory
};

struct ErrorSummary
{
  Vector train_mean, train_std; ///< per knot, population std
  Vector test_mean, test_std;
  double e_max = 0.0; ///< max over knots of the mean test error
  double e_T = 0.0;   ///< mean test error at the final knot
};

struct ErrorReport
{
  ErrorSeries series;
  ErrorSummary summary;
  Matrix predictions; ///< stacked model trajectories, N·(M + 1) × d
};

/// Integrates the model from every dataset initial point on the dataset grid.
/// With an empty test split, e_max and e_T are NaN.
ErrorReport error_stats(FieldHandle const &model, TrajectoryDataset const &ds);

struct ComparisonRow
{
  Index neurons = 0;
  ModelKind kind = ModelKind::SemiAutonomous;
  double e_max = 0.0;
  double e_T = 0.0;
  long long dof_paper = 0;
  long long dof_literal = 0;
};

std::vector<ComparisonRow> build_comparison(std::vector<Model> const &models, TrajectoryDataset const &ds);

/// One emitted file: path relative to the output directory plus its bytes.
struct Artifact
{
  std::string path;
  std::string content;
};

using ArtifactSet = std::vector<Artifact>;

// CSV builders. Numbers use 17 significant digits.
/// t,train_mean,train_std,test_mean,test_std
Artifact error_curves_csv(ErrorReport const &r, std::string const &path = "error_curves.csv");
/// index,split,t,error (long format)
Artifact trajectory_errors_csv(ErrorReport const &r, std::string const &path = "trajectory_errors.csv");
/// index,split,t,z1..zd,x1..xd; blank line between trajectories
Artifact trajectories_csv(ErrorReport const &r, TrajectoryDataset const &ds, std::string const &path = "trajectories.csv");
/// P,kind,e_max,e_T,dof_paper,dof_literal
Artifact comparison_csv(std::vector<ComparisonRow> const &rows, std::string const &path = "comparison.csv");
/// epoch,loss
Artifact loss_history_csv(std::vector<double> const &history, std::string const &path = "loss_history.csv");
/// t followed by one column per named series
Artifact time_series_csv(Vector const &t, std::vector<std::string> const &names, std::vector<Vector> const &columns,
                         std::string const &path);
Artifact density_artifact(GridDensity const &g, std::string const &path);

// gnuplot scripts; each reads only the CSVs named in its arguments.
Artifact error_curves_plot(std::string const &csv = "error_curves.csv", std::string const &path = "error_curves.gp");
Artifact trajectories_plot(std::string const &csv = "trajectories.csv", std::string const &path = "trajectories.gp");
Artifact loss_history_plot(std::string const &csv = "loss_history.csv", std::string const &path = "loss_history.gp");
Artifact time_series_plot(std::string const &csv, std::vector<std::string> const &names, std::string const &ylabel,
                          std::string const &path);
Artifact density_plot(GridDensity const &g, std::string const &csv, std::string const &path);

/// Writes every artifact below `dir` plus manifest.csv (file,bytes,fnv1a64).
/// Output bytes depend only on the inputs.
void emit(ArtifactSet const &artifacts, std::filesystem::path const &dir);

} // namespace sanode
