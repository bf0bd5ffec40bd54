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

#include "sanode/train.hpp"

#include "sanode/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sanode {

FieldHandle as_field(Model const &m)
{
  return std::visit([](auto const &p) -> FieldHandle { return p; }, m);
}

ModelKind model_kind(Model const &m)
{
  return std::holds_alternative<SaField>(m) ? ModelKind::SemiAutonomous : ModelKind::Vanilla;
}

Index model_dim(Model const &m)
{
  return std::visit([](auto const &p) { return p.dim(); }, m);
}

Vector const &model_theta(Model const &m)
{
  return std::visit([](auto const &p) -> Vector const & { return p.theta(); }, m);
}

Vector &model_theta(Model &m)
{
  return std::visit([](auto &p) -> Vector & { return p.theta(); }, m);
}

std::string to_string(GradMode mode)
{
  return mode == GradMode::DiscreteBackprop ? "discrete" : "adjoint";
}

GradMode parse_grad_mode(std::string const &name)
{
  if (name == "discrete") {
    return GradMode::DiscreteBackprop;
  }
  if (name == "adjoint") {
    return GradMode::ContinuousAdjoint;
  }
  throw DomainError("unknown gradient mode '" + name + "' (expected discrete or adjoint)");
}

void TrainConfig::validate() const
{
  if (neurons < 1) {
    throw DomainError("neurons must be positive");
  }
  if (!(lr > 0) || !std::isfinite(lr)) {
    throw DomainError("learning rate must be positive");
  }
  if (epochs < 0) {
    throw DomainError("epochs must be non-negative");
  }
  if (!(lambda >= 0) || !std::isfinite(lambda)) {
    throw DomainError("lambda must be non-negative");
  }
  if (!(beta1 > 0 && beta1 < 1) || !(beta2 > 0 && beta2 < 1)) {
    throw DomainError("Adam betas must lie in (0, 1)");
  }
  if (!(eps > 0)) {
    throw DomainError("Adam epsilon must be positive");
  }
  if (log_every < 1) {
    throw DomainError("log_every must be positive");
  }
  if (autonomous && model != ModelKind::SemiAutonomous) {
    throw DomainError("the autonomous option applies to semi-autonomous models only");
  }
}

TrainConfig paper_scale(TrainConfig c)
{
  c.neurons = 1000;
  c.lr = 1e-4;
  c.epochs = 5000;
  return c;
}

Model init_model(TrainConfig const &config, TrajectoryDataset const &ds)
{
  config.validate();
  if (config.model == ModelKind::SemiAutonomous) {
    return init_sa_params(config.neurons, ds.dim(), config.activation, config.seed, config.autonomous);
  }
  return init_vanilla_params(config.neurons, ds.dim(), ds.grid.steps(), ds.grid.t0(), ds.grid.t1(), config.activation,
                             config.seed);
}

double regularizer(Model const &m)
{
  if (auto const *sa = std::get_if<SaField>(&m)) {
    return lipschitz_bound(*sa);
  }
  return vanilla_lipschitz_mean(std::get<VanillaField>(m));
}

Vector regularizer_gradient(Model const &m)
{
  if (auto const *sa = std::get_if<SaField>(&m)) {
    return lipschitz_bound_gradient(*sa);
  }
  return vanilla_lipschitz_mean_gradient(std::get<VanillaField>(m));
}

namespace {

// Evaluation and VJP of either model kind; `step` selects the vanilla block.
class ModelWorkspace
{
public:
  explicit ModelWorkspace(Model const &m)
    : model_(m)
  {
    if (auto const *sa = std::get_if<SaField>(&m)) {
      ws_.emplace<SaWorkspace<double>>(*sa);
    } else {
      ws_.emplace<VanillaWorkspace<double>>(std::get<VanillaField>(m));
    }
  }

  void eval(Vector const &x, double t, Index step, Vector &out)
  {
    if (auto *sa = std::get_if<SaWorkspace<double>>(&ws_)) {
      sa->eval(std::get<SaField>(model_), x, t, out);
    } else {
      std::get<VanillaWorkspace<double>>(ws_).eval_step(std::get<VanillaField>(model_), step, x, out);
    }
  }

  void vjp(Vector const &x, double t, Index step, Vector const &cov, Vector &xbar, Eigen::Ref<Vector> grad)
  {
    if (auto *sa = std::get_if<SaWorkspace<double>>(&ws_)) {
      sa->vjp(std::get<SaField>(model_), x, t, cov, xbar, grad);
    } else {
      std::get<VanillaWorkspace<double>>(ws_).vjp_step(std::get<VanillaField>(model_), step, x, cov, xbar, grad);
    }
  }

private:
  Model const &model_;
  std::variant<std::monostate, SaWorkspace<double>, VanillaWorkspace<double>> ws_;
};

void check_compatible(Model const &m, TrajectoryDataset const &ds)
{
  if (ds.states.empty()) {
    throw ShapeError("dataset has no trajectories");
  }
  if (model_dim(m) != ds.dim()) {
    throw ShapeError("model dimension " + std::to_string(model_dim(m)) + " does not match dataset dimension " +
                     std::to_string(ds.dim()));
  }
  if (auto const *v = std::get_if<VanillaField>(&m)) {
    if (v->steps() != ds.grid.steps() || v->t0() != ds.grid.t0() || v->t1() != ds.grid.t1()) {
      throw ShapeError("vanilla model time grid does not match the dataset grid");
    }
  }
}

std::vector<Index> resolve_indices(TrajectoryDataset const &ds, std::optional<std::vector<Index>> const &indices)
{
  std::vector<Index> out = indices ? *indices : ds.train;
  if (out.empty()) {
    throw ShapeError("no trajectories selected for the loss");
  }
  for (Index k : out) {
    if (k < 0 || k >= ds.size()) {
      throw ShapeError("trajectory index " + std::to_string(k) + " out of range");
    }
  }
  return out;
}

void check_bounded(Vector const &x, double t, Index step)
{
  if (!x.allFinite() || x.cwiseAbs().maxCoeff() > blowup_threshold) {
    throw IntegrationBlowup("state left the finite range at t = " + std::to_string(t), t, step);
  }
}

// Single-trajectory RK4 sweep with the same arithmetic as integrate(); records
// the knot states and returns Σ_{l ≥ 1} ‖x_l − z_l‖².
double forward(ModelWorkspace &ws, Matrix const &data, TimeGrid const &grid, Matrix &states)
{
  Index const M = grid.steps();
  Index const d = data.cols();
  double const h = grid.dt();
  states.resize(M + 1, d);
  Vector x = data.row(0).transpose();
  states.row(0) = x.transpose();
  Rk4Scratch s;
  double sse = 0.0;
  for (Index l = 0; l < M; ++l) {
    double const t = grid.knot(l);
    rk4_advance([&](Vector const &y, double ty, Vector &out) { ws.eval(y, ty, l, out); }, x, t, h, s);
    check_bounded(x, grid.knot(l + 1), l + 1);
    states.row(l + 1) = x.transpose();
    sse += (x - data.row(l + 1).transpose()).squaredNorm();
  }
  return sse;
}

// Backward RK4 for −ȧ = Jᵀa + 2·scale·(x − z). The Jacobian is taken at the
// cubic Hermite interpolant of the knot states and field values; the residual
// x − z is linear between knots, so data reproduced exactly at the knots gives
// no forcing. When `grad` is non-empty, adds the trapezoidal approximation of
// ∫ (∂f/∂Θ)ᵀ a dt.
Matrix adjoint_sweep(ModelWorkspace &ws, Matrix const &data, TimeGrid const &grid, Matrix const &states, double scale,
                     Vector &grad)
{
  Index const M = grid.steps();
  Index const d = data.cols();
  double const h = grid.dt();
  Matrix F(M + 1, d);
  Vector x(d), fx(d);
  for (Index l = 0; l <= M; ++l) {
    x = states.row(l).transpose();
    ws.eval(x, grid.knot(l), std::min(l, M - 1), fx);
    F.row(l) = fx.transpose();
  }
  Matrix A(M + 1, d);
  Vector a = Vector::Zero(d);
  A.row(M) = a.transpose();
  Vector k1(d), k2(d), k3(d), k4(d), y(d), jta(d), xm(d), rm(d), xs(d), rs(d);
  Eigen::Ref<Vector> no_grad(jta.head(0));
  for (Index l = M; l >= 1; --l) {
    Index const step = l - 1;
    double const tr = grid.knot(l);
    double const tl = grid.knot(step);
    double const tm = tl + 0.5 * h;
    xm = 0.5 * (states.row(step) + states.row(l)).transpose() + (h / 8.0) * (F.row(step) - F.row(l)).transpose();
    rm = 0.5 * (states.row(step) - data.row(step) + states.row(l) - data.row(l)).transpose();
    auto rhs = [&](Vector const &av, Vector const &xv, Vector const &rv, double t, Vector &out) {
      Vector xbar;
      ws.vjp(xv, t, step, av, xbar, no_grad);
      out = -xbar - 2.0 * scale * rv;
    };
    xs = states.row(l).transpose();
    rs = (states.row(l) - data.row(l)).transpose();
    rhs(a, xs, rs, tr, k1);
    y = a - (0.5 * h) * k1;
    rhs(y, xm, rm, tm, k2);
    y = a - (0.5 * h) * k2;
    rhs(y, xm, rm, tm, k3);
    y = a - h * k3;
    xs = states.row(step).transpose();
    rs = (states.row(step) - data.row(step)).transpose();
    rhs(y, xs, rs, tl, k4);
    a -= (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!a.allFinite()) {
      throw IntegrationBlowup("adjoint state became non-finite", tl, step);
    }
    A.row(step) = a.transpose();
  }
  if (grad.size() != 0) {
    Vector xbar;
    for (Index l = 0; l <= M; ++l) {
      double const w = (l == 0 || l == M) ? 0.5 * h : h;
      x = states.row(l).transpose();
      Vector const cov = w * A.row(l).transpose();
      ws.vjp(x, grid.knot(l), std::min(l, M - 1), cov, xbar, grad);
    }
  }
  return A;
}

// Lockstep evaluation of many states at once: column n of X is one state.
// Parameter gradients of a whole batch reduce to matrix-vector products.
// Activation values and slopes of n pre-activations in place of raw buffers.
void activate_values(Activation act, double const *z, double *s, Index n)
{
  if (act == Activation::ReLU) {
    for (Index r = 0; r < n; ++r) {
      s[r] = z[r] > 0.0 ? z[r] : 0.0;
    }
  } else {
    Eigen::Map<Eigen::ArrayXd>(s, n) = (1.0 + (-Eigen::Map<Eigen::ArrayXd const>(z, n)).exp()).inverse();
  }
}

void activate_slopes(Activation act, double const *z, double *s, double *ds, Index n)
{
  if (act == Activation::ReLU) {
    for (Index r = 0; r < n; ++r) {
      bool const on = z[r] > 0.0;
      s[r] = on ? z[r] : 0.0;
      ds[r] = on ? 1.0 : 0.0;
    }
  } else {
    activate_values(act, z, s, n);
    for (Index r = 0; r < n; ++r) {
      ds[r] = s[r] * (1.0 - s[r]);
    }
  }
}

class SaBatch
{
public:
  explicit SaBatch(SaField const &p)
    : p_(p)
  {
  }

  void eval(Matrix const &X, double t, Index, Matrix &F)
  {
    Index const U = p_.units();
    Index const P = p_.neurons();
    prepare(X, t);
    F.resize(p_.dim(), X.cols());
    for (Index n = 0; n < X.cols(); ++n) {
      preactivate(X, n);
      activate_values(p_.activation(), z_.data(), S_.col(n).data(), U);
      for (Index j = 0; j < p_.dim(); ++j) {
        F(j, n) = p_.W().segment(j * P, P).dot(S_.col(n).segment(j * P, P));
      }
    }
  }

  void vjp(Matrix const &X, double t, Index, Matrix const &Cov, Matrix &Xbar, Vector &grad)
  {
    Index const U = p_.units();
    Index const P = p_.neurons();
    Index const d = p_.dim();
    prepare(X, t);
    D_.resize(U, X.cols());
    double const *w = p_.W().data();
    for (Index n = 0; n < X.cols(); ++n) {
      preactivate(X, n);
      double *s = S_.col(n).data();
      double *u = D_.col(n).data();
      activate_slopes(p_.activation(), z_.data(), s, u, U);
      for (Index j = 0; j < d; ++j) {
        double const c = Cov(j, n);
        for (Index r = j * P; r < (j + 1) * P; ++r) {
          u[r] *= c * w[r];
        }
      }
    }
    Xbar.resize(d, X.cols());
    for (Index k = 0; k < d; ++k) {
      Xbar.row(k).noalias() = p_.A1_column(k).transpose() * D_;
    }
    for (Index j = 0; j < d; ++j) {
      grad.segment(SaField::w_block + j * P, P).noalias() += S_.middleRows(j * P, P) * Cov.row(j).transpose();
    }
    for (Index k = 0; k < d; ++k) {
      grad.segment(p_.a1_block(k), U).noalias() += D_ * X.row(k).transpose();
    }
    rowsum_.noalias() = D_ * Vector::Ones(X.cols());
    grad.segment(p_.a2_block(), U) += t * rowsum_;
    grad.segment(p_.b_block(), U) += rowsum_;
  }

private:
  void prepare(Matrix const &X, double t)
  {
    bias_ = p_.B() + t * p_.A2();
    z_.resize(p_.units());
    S_.resize(p_.units(), X.cols());
  }

  void preactivate(Matrix const &X, Index n)
  {
    Index const U = p_.units();
    double *z = z_.data();
    double const *b = bias_.data();
    for (Index r = 0; r < U; ++r) {
      z[r] = b[r];
    }
    for (Index k = 0; k < p_.dim(); ++k) {
      double const xk = X(k, n);
      double const *a = p_.A1_column(k).data();
      for (Index r = 0; r < U; ++r) {
        z[r] += xk * a[r];
      }
    }
  }

  SaField const &p_;
  Vector bias_, rowsum_, z_;
  Matrix S_, D_;
};

class VanillaBatch
{
public:
  explicit VanillaBatch(VanillaField const &p)
    : p_(p)
  {
  }

  void eval(Matrix const &X, double, Index step, Matrix &F)
  {
    preactivate(X, step);
    activate_array(p_.activation(), Z_.array(), S_);
    Index const P = p_.neurons();
    F.resize(p_.dim(), X.cols());
    for (Index j = 0; j < p_.dim(); ++j) {
      F.row(j).noalias() = p_.theta().segment(p_.w_offset(step) + j * P, P).transpose() * S_.matrix();
    }
  }

  void vjp(Matrix const &X, double, Index step, Matrix const &Cov, Matrix &Xbar, Vector &grad)
  {
    preactivate(X, step);
    activate_with_slope(p_.activation(), Z_.array(), S_, D_);
    Index const P = p_.neurons();
    Index const d = p_.dim();
    // Σ_j w_j cov_j per neuron and column
    U_.noalias() = p_.theta().segment(p_.w_offset(step), d * P).reshaped(P, d) * Cov;
    D_ *= U_.array();
    Xbar.resize(d, X.cols());
    for (Index k = 0; k < d; ++k) {
      Xbar.row(k).noalias() = p_.theta().segment(p_.a_offset(step) + k * P, P).transpose() * D_.matrix();
    }
    for (Index j = 0; j < d; ++j) {
      grad.segment(p_.w_offset(step) + j * P, P).noalias() += S_.matrix() * Cov.row(j).transpose();
    }
    for (Index k = 0; k < d; ++k) {
      grad.segment(p_.a_offset(step) + k * P, P).noalias() += D_.matrix() * X.row(k).transpose();
    }
    grad.segment(p_.b_offset(step), P) += D_.matrix().rowwise().sum();
  }

private:
  void preactivate(Matrix const &X, Index step)
  {
    Index const P = p_.neurons();
    Z_.resize(P, X.cols());
    for (Index n = 0; n < X.cols(); ++n) {
      Z_.col(n) = p_.theta().segment(p_.b_offset(step), P);
      for (Index k = 0; k < p_.dim(); ++k) {
        Z_.col(n) += X(k, n) * p_.theta().segment(p_.a_offset(step) + k * P, P);
      }
    }
  }

  VanillaField const &p_;
  Matrix Z_, U_;
  Eigen::ArrayXXd S_, D_;
};

void check_bounded_batch(Matrix const &X, double t, Index step)
{
  if (!X.allFinite() || X.cwiseAbs().maxCoeff() > blowup_threshold) {
    throw IntegrationBlowup("state left the finite range at t = " + std::to_string(t), t, step);
  }
}

// Data of trajectories idx[begin, end) at every knot as d × n matrices.
std::vector<Matrix> knot_matrices(TrajectoryDataset const &ds, std::vector<Index> const &idx, Index begin, Index end)
{
  std::vector<Matrix> out(ds.grid.knots(), Matrix(ds.dim(), end - begin));
  for (Index q = begin; q < end; ++q) {
    Matrix const &s = ds.states[idx[q]];
    for (Index l = 0; l < ds.grid.knots(); ++l) {
      out[l].col(q - begin) = s.row(l).transpose();
    }
  }
  return out;
}

// Batched RK4 forward sweep with optional stage recording (entry 4l + s) and
// reverse sweep for Σ_n c Σ_{l ≥ 1} ‖x_l − z_l‖². Returns per-column sums of
// squared residuals.
template <typename Batch>
Vector batch_sweep(Batch &batch, std::vector<Matrix> const &Z, TimeGrid const &grid, double c, Vector *grad)
{
  Index const M = grid.steps();
  Index const n = Z[0].cols();
  double const h = grid.dt();
  std::vector<Matrix> states(M + 1);
  std::vector<Matrix> stages(grad ? 4 * M : 0);
  Matrix X = Z[0];
  Matrix k1, k2, k3, k4, Y;
  states[0] = X;
  Vector sse = Vector::Zero(n);
  for (Index l = 0; l < M; ++l) {
    double const t = grid.knot(l);
    if (grad) {
      stages[4 * l] = X;
    }
    batch.eval(X, t, l, k1);
    Y = X + (0.5 * h) * k1;
    if (grad) {
      stages[4 * l + 1] = Y;
    }
    batch.eval(Y, t + 0.5 * h, l, k2);
    Y = X + (0.5 * h) * k2;
    if (grad) {
      stages[4 * l + 2] = Y;
    }
    batch.eval(Y, t + 0.5 * h, l, k3);
    Y = X + h * k3;
    if (grad) {
      stages[4 * l + 3] = Y;
    }
    batch.eval(Y, t + h, l, k4);
    X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    check_bounded_batch(X, grid.knot(l + 1), l + 1);
    states[l + 1] = X;
    sse += (X - Z[l + 1]).colwise().squaredNorm().transpose();
  }
  if (!grad) {
    return sse;
  }
  Index const d = X.rows();
  Matrix abar = Matrix::Zero(d, n);
  Matrix prev, kbar, ybar;
  for (Index l = M; l >= 1; --l) {
    abar += (2.0 * c) * (states[l] - Z[l]);
    Index const step = l - 1;
    double const t = grid.knot(step);
    prev = abar;

    kbar = (h / 6.0) * abar;
    batch.vjp(stages[4 * step + 3], t + h, step, kbar, ybar, *grad);
    prev += ybar;

    kbar = (h / 3.0) * abar + h * ybar;
    batch.vjp(stages[4 * step + 2], t + 0.5 * h, step, kbar, ybar, *grad);
    prev += ybar;

    kbar = (h / 3.0) * abar + (0.5 * h) * ybar;
    batch.vjp(stages[4 * step + 1], t + 0.5 * h, step, kbar, ybar, *grad);
    prev += ybar;

    kbar = (h / 6.0) * abar + (0.5 * h) * ybar;
    batch.vjp(stages[4 * step], t, step, kbar, ybar, *grad);
    prev += ybar;

    abar = prev;
  }
  return sse;
}

struct SweepResult
{
  std::vector<double> sse;
  Vector grad;
};

enum class Sweep
{
  LossOnly,
  Discrete,
  Adjoint
};

// Sweeps over fixed chunks of at most batch_columns trajectories; chunk buffers
// are combined in chunk order so the result does not depend on the worker count.
constexpr Index batch_columns = 64;

SweepResult sweep(Model const &m, TrajectoryDataset const &ds, std::vector<Index> const &idx, Sweep kind)
{
  Index const n = static_cast<Index>(idx.size());
  Index const size = model_theta(m).size();
  double const N = static_cast<double>(n);
  SweepResult out;
  out.sse.assign(n, 0.0);
  bool const want_grad = kind != Sweep::LossOnly;

  if (kind == Sweep::Adjoint) {
    double const c = 1.0 / (N * (ds.grid.t1() - ds.grid.t0()));
    Index const chunks = std::min<Index>(n, 8);
    std::vector<Vector> partial(chunks);
    parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t ch) {
      ModelWorkspace ws(m);
      Vector grad = Vector::Zero(size);
      Matrix states;
      Index const begin = static_cast<Index>(ch) * n / chunks;
      Index const end = (static_cast<Index>(ch) + 1) * n / chunks;
      for (Index q = begin; q < end; ++q) {
        Matrix const &data = ds.states[idx[q]];
        out.sse[q] = forward(ws, data, ds.grid, states);
        adjoint_sweep(ws, data, ds.grid, states, c, grad);
      }
      partial[ch] = std::move(grad);
    });
    out.grad = Vector::Zero(size);
    for (auto const &g : partial) {
      out.grad += g;
    }
    return out;
  }

  double const c = 1.0 / (N * static_cast<double>(ds.grid.steps()));
  Index const chunks = (n + batch_columns - 1) / batch_columns;
  std::vector<Vector> partial(want_grad ? chunks : 0);
  parallel_for(static_cast<std::size_t>(chunks), [&](std::size_t ch) {
    Index const begin = static_cast<Index>(ch) * n / chunks;
    Index const end = (static_cast<Index>(ch) + 1) * n / chunks;
    std::vector<Matrix> const Z = knot_matrices(ds, idx, begin, end);
    Vector grad = want_grad ? Vector::Zero(size) : Vector();
    Vector sse;
    if (auto const *sa = std::get_if<SaField>(&m)) {
      SaBatch batch(*sa);
      sse = batch_sweep(batch, Z, ds.grid, c, want_grad ? &grad : nullptr);
    } else {
      VanillaBatch batch(std::get<VanillaField>(m));
      sse = batch_sweep(batch, Z, ds.grid, c, want_grad ? &grad : nullptr);
    }
    for (Index q = begin; q < end; ++q) {
      out.sse[q] = sse[q - begin];
    }
    if (want_grad) {
      partial[ch] = std::move(grad);
    }
  });
  if (want_grad) {
    out.grad = Vector::Zero(size);
    for (auto const &g : partial) {
      out.grad += g;
    }
  }
  return out;
}

LossReport make_report(Model const &m, TrajectoryDataset const &ds, double lambda, std::vector<double> const &sse)
{
  LossReport r;
  double const M = static_cast<double>(ds.grid.steps());
  double total = 0.0;
  r.per_trajectory.reserve(sse.size());
  for (double s : sse) {
    total += s;
    r.per_trajectory.push_back(s / M);
  }
  r.data_term = total / (static_cast<double>(sse.size()) * M);
  r.reg_term = regularizer(m);
  r.lambda = lambda;
  r.total = r.data_term + lambda * r.reg_term;
  return r;
}

void check_lambda(double lambda)
{
  if (!(lambda >= 0) || !std::isfinite(lambda)) {
    throw DomainError("lambda must be non-negative and finite");
  }
}

} // namespace

LossReport loss(Model const &m, TrajectoryDataset const &ds, double lambda,
                std::optional<std::vector<Index>> const &indices)
{
  check_lambda(lambda);
  check_compatible(m, ds);
  auto const idx = resolve_indices(ds, indices);
  return make_report(m, ds, lambda, sweep(m, ds, idx, Sweep::LossOnly).sse);
}

LossAndGradient loss_and_gradient(Model const &m, TrajectoryDataset const &ds, double lambda, GradMode mode,
                                  std::optional<std::vector<Index>> const &indices)
{
  check_lambda(lambda);
  check_compatible(m, ds);
  if (mode == GradMode::ContinuousAdjoint && !std::holds_alternative<SaField>(m)) {
    throw UnsupportedField("the continuous adjoint gradient is implemented for semi-autonomous models only");
  }
  auto const idx = resolve_indices(ds, indices);
  SweepResult r = sweep(m, ds, idx, mode == GradMode::DiscreteBackprop ? Sweep::Discrete : Sweep::Adjoint);
  LossAndGradient out{make_report(m, ds, lambda, r.sse), std::move(r.grad)};
  if (lambda != 0.0) {
    out.gradient += lambda * regularizer_gradient(m);
  }
  return out;
}

Vector grad_discrete(Model const &m, TrajectoryDataset const &ds, double lambda,
                     std::optional<std::vector<Index>> const &indices)
{
  return loss_and_gradient(m, ds, lambda, GradMode::DiscreteBackprop, indices).gradient;
}

Vector grad_continuous_adjoint(Model const &m, TrajectoryDataset const &ds, double lambda,
                               std::optional<std::vector<Index>> const &indices)
{
  return loss_and_gradient(m, ds, lambda, GradMode::ContinuousAdjoint, indices).gradient;
}

Matrix continuous_adjoint_path(SaField const &m, Matrix const &data, TimeGrid const &grid, double scale)
{
  if (data.rows() != grid.knots() || data.cols() != m.dim()) {
    throw ShapeError("continuous_adjoint_path: data shape does not match the grid and model");
  }
  Model const model = m;
  ModelWorkspace ws(model);
  Matrix states;
  forward(ws, data, grid, states);
  Vector none;
  return adjoint_sweep(ws, data, grid, states, scale, none);
}

void adam_step(AdamState &state, Vector &theta, Vector const &grad, TrainConfig const &config)
{
  if (state.m.size() != theta.size() || state.v.size() != theta.size() || grad.size() != theta.size()) {
    throw ShapeError("adam_step: state, parameter and gradient sizes differ");
  }
  ++state.step;
  state.m = config.beta1 * state.m + (1.0 - config.beta1) * grad;
  state.v = config.beta2 * state.v + (1.0 - config.beta2) * grad.cwiseAbs2();
  double const t = static_cast<double>(state.step);
  double const c1 = 1.0 - std::pow(config.beta1, t);
  double const c2 = 1.0 - std::pow(config.beta2, t);
  theta.array() -= config.lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + config.eps);
}

Checkpoint fit(TrajectoryDataset const &ds, TrainConfig const &config, FitObserver const &observer)
{
  return fit_from(init_model(config, ds), ds, config, observer);
}

Checkpoint fit_from(Model initial, TrajectoryDataset const &ds, TrainConfig const &config, FitObserver const &observer)
{
  config.validate();
  check_compatible(initial, ds);
  if (model_kind(initial) != config.model) {
    throw DomainError("initial model kind does not match the configuration");
  }
  Checkpoint ck{config, std::move(initial), dataset_fingerprint(ds), 0, {}};
  ck.history.reserve(config.epochs);
  Vector &theta = model_theta(ck.model);
  AdamState adam = AdamState::zeros(theta.size());
  bool const mask_a2 = config.autonomous && std::holds_alternative<SaField>(ck.model);

  // Parameters before the most recent update; restored when that update diverges.
  Vector previous = theta;
  Index previous_epoch = 0;
  auto diverged = [&](std::string const &why) {
    theta = previous;
    ck.epoch = previous_epoch;
    if (static_cast<Index>(ck.history.size()) > previous_epoch) {
      ck.history.resize(previous_epoch);
    }
    return TrainingDiverged(why, ck);
  };

  for (Index epoch = 1; epoch <= config.epochs; ++epoch) {
    LossAndGradient lg;
    try {
      lg = loss_and_gradient(ck.model, ds, config.lambda, config.grad_mode);
    } catch (IntegrationBlowup const &e) {
      throw diverged("training diverged in epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (!std::isfinite(lg.loss.total) || lg.loss.total > divergence_threshold || !lg.gradient.allFinite()) {
      throw diverged("training diverged in epoch " + std::to_string(epoch) + " (loss " +
                     std::to_string(lg.loss.total) + ")");
    }
    if (mask_a2) {
      auto const &sa = std::get<SaField>(ck.model);
      lg.gradient.segment(sa.a2_block(), sa.units()).setZero();
    }
    ck.history.push_back(lg.loss.total);
    if (observer && (epoch % config.log_every == 0 || epoch == 1 || epoch == config.epochs)) {
      observer(epoch, lg.loss);
    }
    previous = theta;
    previous_epoch = epoch - 1;
    adam_step(adam, theta, lg.gradient, config);
    if (!theta.allFinite()) {
      throw diverged("parameters became non-finite in epoch " + std::to_string(epoch));
    }
    ck.epoch = epoch;
  }
  return ck;
}

} // namespace sanode
