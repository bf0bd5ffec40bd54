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
#include "sanode/errors.hpp"
#include "sanode/field.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace sanode {

/// A trainable vector field.
using Model = std::variant<SaField, VanillaField>;

FieldHandle as_field(Model const &m);
ModelKind model_kind(Model const &m);
Index model_dim(Model const &m);
Vector const &model_theta(Model const &m);
Vector &model_theta(Model &m);

enum class GradMode
{
  DiscreteBackprop,
  ContinuousAdjoint
};

std::string to_string(GradMode mode);
GradMode parse_grad_mode(std::string const &name);

struct TrainConfig
{
  ModelKind model = ModelKind::SemiAutonomous;
  Index neurons = 100;
  Activation activation = Activation::ReLU;
  double lr = 1e-3;
  Index epochs = 3000;
  double lambda = 1e-5;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  GradMode grad_mode = GradMode::DiscreteBackprop;
  Index log_every = 100;
  /// Fix the time weights A2 at zero (SA only).
  bool autonomous = false;

  /// Throws DomainError naming the first invalid field.
  void validate() const;
};

/// P = 1000, lr = 1e-4, 5000 epochs; other fields kept.
TrainConfig paper_scale(TrainConfig c);

/// Fresh parameters for `config` on the dataset's dimension and time grid.
Model init_model(TrainConfig const &config, TrajectoryDataset const &ds);

struct LossReport
{
  double data_term = 0.0;
  double reg_term = 0.0;
  double lambda = 0.0;
  double total = 0.0;
  /// Mean over knots l = 1..M of ‖z_k(t_l) − x_k(t_l)‖², one per evaluated trajectory.
  std::vector<double> per_trajectory;
};

/// Trajectory-tracking loss on the training split (or on `indices` when given):
///
///   (1/(N·M)) Σ_k Σ_{l=1..M} ‖z_k(t_l) − x_k(t_l; Θ)‖² + λ · R(Θ)
///
/// with R the Lipschitz bound (SA) or its per-step average (vanilla).
LossReport loss(Model const &m, TrajectoryDataset const &ds, double lambda,
                std::optional<std::vector<Index>> const &indices = std::nullopt);

/// Regularizer R(Θ) and its subgradient in the model's internal layout.
double regularizer(Model const &m);
Vector regularizer_gradient(Model const &m);

/// Exact gradient of loss() by reverse-mode through the RK4 recursion.
Vector grad_discrete(Model const &m, TrajectoryDataset const &ds, double lambda,
                     std::optional<std::vector<Index>> const &indices = std::nullopt);

/// Gradient of the continuous-time loss (1/(N·T)) Σ_k ∫ ‖z_k − x_k‖² dt + λR via
/// the adjoint ODE −ȧ = (∂f/∂x)ᵀa + 2(x − z)/(N·T), a(T) = 0, solved backward by
/// RK4 on the dataset grid. SA models only.
Vector grad_continuous_adjoint(Model const &m, TrajectoryDataset const &ds, double lambda,
                               std::optional<std::vector<Index>> const &indices = std::nullopt);

/// Adjoint states a(t_l), (M + 1) × d, for one trajectory with forcing weight
/// `scale` (a solves −ȧ = Jᵀa + 2·scale·(x − z)).
Matrix continuous_adjoint_path(SaField const &m, Matrix const &data, TimeGrid const &grid, double scale);

/// Loss and discrete gradient from one shared forward sweep.
struct LossAndGradient
{
  LossReport loss;
  Vector gradient;
};

LossAndGradient loss_and_gradient(Model const &m, TrajectoryDataset const &ds, double lambda,
                                  GradMode mode = GradMode::DiscreteBackprop,
                                  std::optional<std::vector<Index>> const &indices = std::nullopt);

struct AdamState
{
  Vector m;
  Vector v;
  std::int64_t step = 0;

  static AdamState zeros(Index n) { return {Vector::Zero(n), Vector::Zero(n), 0}; }
};

/// One bias-corrected Adam update of `theta` in place.
void adam_step(AdamState &state, Vector &theta, Vector const &grad, TrainConfig const &config);

struct Checkpoint
{
  static constexpr int format_version = 1;

  TrainConfig config;
  Model model;
  std::uint64_t dataset_fingerprint = 0;
  Index epoch = 0;
  /// Total training loss evaluated at the start of each completed epoch.
  std::vector<double> history;
};

/// Raised by fit when the loss exceeds 1e12 or stops being finite.
class TrainingDiverged : public Error
{
public:
  TrainingDiverged(std::string const &what, Checkpoint last_good)
    : Error(what)
    , last_good_(std::move(last_good))
  {
  }

  Checkpoint const &last_good() const { return last_good_; }

private:
  Checkpoint last_good_;
};

inline constexpr double divergence_threshold = 1e12;

/// Called every `log_every` epochs (and after the last) with the 1-based epoch.
using FitObserver = std::function<void(Index epoch, LossReport const &report)>;

/// Full-batch Adam on the training split for config.epochs epochs.
Checkpoint fit(TrajectoryDataset const &ds, TrainConfig const &config, FitObserver const &observer = {});

/// Continues from an existing model (no re-initialization).
Checkpoint fit_from(Model initial, TrajectoryDataset const &ds, TrainConfig const &config,
                    FitObserver const &observer = {});

} // namespace sanode
