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

#include "sanode/sa_field.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sanode {

/// Parameters of a vanilla NODE field with one shallow network per time step:
///
///   f(x, t) = Σ_i w_{l,i} σ(⟨a_{l,i}, x⟩ + b_{l,i}),   t ∈ [t_l, t_{l+1}),
///
/// on the uniform grid t_l = t0 + l·(t1 − t0)/M. The last knot t_M belongs to
/// step M − 1. Step l occupies a contiguous block of (2d + 1)·P entries laid out
/// as [ w (d·P, unit j·P + i) | a (d·P, input k·P + i) | b (P) ].
template <typename Scalar> class VanillaParams
{
public:
  using Vector = VectorX<Scalar>;

  VanillaParams(Index neurons, Index dim, Index steps, Scalar t0, Scalar t1, Activation activation)
    : neurons_(neurons)
    , dim_(dim)
    , steps_(steps)
    , t0_(t0)
    , t1_(t1)
    , activation_(activation)
  {
    if (neurons < 1 || dim < 1 || steps < 1) {
      throw ShapeError("VanillaParams: neurons, dimension and steps must be positive");
    }
    if (!(t1 > t0)) {
      throw DomainError("VanillaParams: empty time interval");
    }
    theta_ = Vector::Zero(size());
  }

  Index neurons() const { return neurons_; }
  Index dim() const { return dim_; }
  Index steps() const { return steps_; }
  Scalar t0() const { return t0_; }
  Scalar t1() const { return t1_; }
  Activation activation() const { return activation_; }
  Index block_size() const { return (2 * dim_ + 1) * neurons_; }
  /// (2d + 1)·M·P.
  Index size() const { return block_size() * steps_; }

  Vector const &theta() const { return theta_; }
  Vector &theta() { return theta_; }

  Scalar knot(Index l) const { return t0_ + Scalar(l) * ((t1_ - t0_) / Scalar(steps_)); }

  /// Index of the step whose block governs time t (right-continuous).
  Index step_of(Scalar t) const
  {
    if (!(t >= t0_ && t <= knot(steps_))) {
      throw DomainError("vanilla field evaluated at t = " + std::to_string(double(t)) + " outside [" +
                        std::to_string(double(t0_)) + ", " + std::to_string(double(t1_)) + "]");
    }
    Scalar const dt = (t1_ - t0_) / Scalar(steps_);
    Index l = static_cast<Index>(std::floor((t - t0_) / dt));
    l = std::clamp<Index>(l, 0, steps_ - 1);
    while (l > 0 && knot(l) > t) {
      --l;
    }
    while (l + 1 < steps_ && knot(l + 1) <= t) {
      ++l;
    }
    return l;
  }

  Index w_offset(Index l) const { return l * block_size(); }
  Index a_offset(Index l) const { return l * block_size() + dim_ * neurons_; }
  Index b_offset(Index l) const { return l * block_size() + 2 * dim_ * neurons_; }

  Scalar &w(Index l, Index i, Index j) { return theta_[w_offset(l) + j * neurons_ + i]; }
  Scalar w(Index l, Index i, Index j) const { return theta_[w_offset(l) + j * neurons_ + i]; }
  Scalar &a(Index l, Index i, Index k) { return theta_[a_offset(l) + k * neurons_ + i]; }
  Scalar a(Index l, Index i, Index k) const { return theta_[a_offset(l) + k * neurons_ + i]; }
  Scalar &b(Index l, Index i) { return theta_[b_offset(l) + i]; }
  Scalar b(Index l, Index i) const { return theta_[b_offset(l) + i]; }

  /// File order: for each step l, for each neuron i: w_{l,i} (d), a_{l,i} (d), b_{l,i}.
  Vector to_canonical() const
  {
    Vector out(size());
    Index n = 0;
    for (Index l = 0; l < steps_; ++l) {
      for (Index i = 0; i < neurons_; ++i) {
        for (Index j = 0; j < dim_; ++j)
          out[n++] = w(l, i, j);
        for (Index k = 0; k < dim_; ++k)
          out[n++] = a(l, i, k);
        out[n++] = b(l, i);
      }
    }
    return out;
  }

  static VanillaParams from_canonical(Index neurons, Index dim, Index steps, Scalar t0, Scalar t1, Activation activation,
                                      Vector const &flat)
  {
    VanillaParams p(neurons, dim, steps, t0, t1, activation);
    if (flat.size() != p.size()) {
      throw ShapeError("VanillaParams::from_canonical: size mismatch");
    }
    Index n = 0;
    for (Index l = 0; l < steps; ++l) {
      for (Index i = 0; i < neurons; ++i) {
        for (Index j = 0; j < dim; ++j)
          p.w(l, i, j) = flat[n++];
        for (Index k = 0; k < dim; ++k)
          p.a(l, i, k) = flat[n++];
        p.b(l, i) = flat[n++];
      }
    }
    return p;
  }

private:
  Index neurons_;
  Index dim_;
  Index steps_;
  Scalar t0_;
  Scalar t1_;
  Activation activation_;
  Vector theta_;
};

template <typename Scalar> class VanillaWorkspace
{
public:
  using Params = VanillaParams<Scalar>;
  using Vector = VectorX<Scalar>;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  explicit VanillaWorkspace(Params const &p)
    : z_(p.neurons())
    , s_(p.neurons())
    , ds_(p.neurons())
    , u_(p.neurons())
  {
  }

  template <typename X> void eval_step(Params const &p, Index l, Eigen::MatrixBase<X> const &x, Vector &out)
  {
    check_dim(p, x.size());
    preactivate(p, l, x);
    activate_array(p.activation(), z_, s_);
    Index const P = p.neurons();
    out.resize(p.dim());
    for (Index j = 0; j < p.dim(); ++j) {
      out[j] = (p.theta().segment(p.w_offset(l) + j * P, P).array() * s_).sum();
    }
  }

  /// covᵀ ∂f/∂x into `xbar`; covᵀ ∂f/∂θ added into `grad` unless it is empty.
  template <typename X, typename C>
  void vjp_step(Params const &p, Index l, Eigen::MatrixBase<X> const &x, Eigen::MatrixBase<C> const &cov, Vector &xbar,
                Eigen::Ref<Vector> grad)
  {
    check_dim(p, x.size());
    preactivate(p, l, x);
    activate_with_slope(p.activation(), z_, s_, ds_);
    Index const P = p.neurons();
    Index const d = p.dim();
    u_.setZero();
    for (Index j = 0; j < d; ++j) {
      u_ += cov[j] * p.theta().segment(p.w_offset(l) + j * P, P).array();
    }
    u_ *= ds_;
    xbar.resize(d);
    for (Index k = 0; k < d; ++k) {
      xbar[k] = (p.theta().segment(p.a_offset(l) + k * P, P).array() * u_).sum();
    }
    if (grad.size() == 0) {
      return;
    }
    for (Index j = 0; j < d; ++j) {
      grad.segment(p.w_offset(l) + j * P, P).array() += cov[j] * s_;
    }
    for (Index k = 0; k < d; ++k) {
      grad.segment(p.a_offset(l) + k * P, P).array() += x[k] * u_;
    }
    grad.segment(p.b_offset(l), P).array() += u_;
  }

  template <typename X> MatrixX<Scalar> jacobian_step(Params const &p, Index l, Eigen::MatrixBase<X> const &x)
  {
    check_dim(p, x.size());
    preactivate(p, l, x);
    activate_with_slope(p.activation(), z_, s_, ds_);
    Index const P = p.neurons();
    MatrixX<Scalar> J(p.dim(), p.dim());
    for (Index j = 0; j < p.dim(); ++j) {
      for (Index k = 0; k < p.dim(); ++k) {
        J(j, k) = (p.theta().segment(p.w_offset(l) + j * P, P).array() * ds_ *
                   p.theta().segment(p.a_offset(l) + k * P, P).array())
                    .sum();
      }
    }
    return J;
  }

private:
  static void check_dim(Params const &p, Index n)
  {
    if (n != p.dim()) {
      throw ShapeError("vanilla field of dimension " + std::to_string(p.dim()) + " evaluated at a state of size " +
                       std::to_string(n));
    }
  }

  template <typename X> void preactivate(Params const &p, Index l, Eigen::MatrixBase<X> const &x)
  {
    Index const P = p.neurons();
    z_ = p.theta().segment(p.b_offset(l), P).array();
    for (Index k = 0; k < p.dim(); ++k) {
      z_ += x[k] * p.theta().segment(p.a_offset(l) + k * P, P).array();
    }
  }

  Array z_, s_, ds_, u_;
};

template <typename Scalar, typename X>
VectorX<Scalar> vanilla_eval(VanillaParams<Scalar> const &p, Eigen::MatrixBase<X> const &x, Scalar t)
{
  VanillaWorkspace<Scalar> ws(p);
  VectorX<Scalar> out;
  ws.eval_step(p, p.step_of(t), x, out);
  return out;
}

template <typename Scalar, typename X>
MatrixX<Scalar> vanilla_jacobian_x(VanillaParams<Scalar> const &p, Eigen::MatrixBase<X> const &x, Scalar t)
{
  VanillaWorkspace<Scalar> ws(p);
  return ws.jacobian_step(p, p.step_of(t), x);
}

/// Per-step Lipschitz estimates ‖ Σ_i |w_{l,i}| ‖a_{l,i}‖₂ ‖ averaged over steps.
template <typename Scalar> Scalar vanilla_lipschitz_mean(VanillaParams<Scalar> const &p)
{
  Index const P = p.neurons();
  Index const d = p.dim();
  Scalar total(0);
  for (Index l = 0; l < p.steps(); ++l) {
    VectorX<Scalar> v = VectorX<Scalar>::Zero(d);
    for (Index i = 0; i < P; ++i) {
      Scalar an(0);
      for (Index k = 0; k < d; ++k) {
        an += p.a(l, i, k) * p.a(l, i, k);
      }
      an = std::sqrt(an);
      for (Index j = 0; j < d; ++j) {
        v[j] += std::abs(p.w(l, i, j)) * an;
      }
    }
    total += v.norm();
  }
  return total / Scalar(p.steps());
}

template <typename Scalar> VectorX<Scalar> vanilla_lipschitz_mean_gradient(VanillaParams<Scalar> const &p)
{
  Index const P = p.neurons();
  Index const d = p.dim();
  VectorX<Scalar> grad = VectorX<Scalar>::Zero(p.size());
  VectorX<Scalar> an(P);
  for (Index l = 0; l < p.steps(); ++l) {
    VectorX<Scalar> v = VectorX<Scalar>::Zero(d);
    for (Index i = 0; i < P; ++i) {
      Scalar sq(0);
      for (Index k = 0; k < d; ++k) {
        sq += p.a(l, i, k) * p.a(l, i, k);
      }
      an[i] = std::sqrt(sq);
      for (Index j = 0; j < d; ++j) {
        v[j] += std::abs(p.w(l, i, j)) * an[i];
      }
    }
    Scalar const norm = v.norm();
    if (norm == Scalar(0)) {
      continue;
    }
    Scalar const scale = Scalar(1) / Scalar(p.steps());
    for (Index i = 0; i < P; ++i) {
      Scalar wsum(0);
      for (Index j = 0; j < d; ++j) {
        Scalar const c = scale * v[j] / norm;
        Scalar const w = p.w(l, i, j);
        Scalar const sign = w > 0 ? Scalar(1) : (w < 0 ? Scalar(-1) : Scalar(0));
        grad[p.w_offset(l) + j * P + i] = c * sign * an[i];
        wsum += c * std::abs(w);
      }
      if (an[i] > Scalar(0)) {
        for (Index k = 0; k < d; ++k) {
          grad[p.a_offset(l) + k * P + i] = wsum * p.a(l, i, k) / an[i];
        }
      }
    }
  }
  return grad;
}

/// (a | b) entries on ±1/√(d+1), w on ±1/√P, drawn step by step in layout order.
template <typename Scalar = double>
VanillaParams<Scalar> init_vanilla_params(Index neurons, Index dim, Index steps, Scalar t0, Scalar t1,
                                          Activation activation, std::uint64_t seed)
{
  VanillaParams<Scalar> p(neurons, dim, steps, t0, t1, activation);
  Rng rng(seed);
  double const wb = 1.0 / std::sqrt(static_cast<double>(neurons));
  double const ab = 1.0 / std::sqrt(static_cast<double>(dim + 1));
  for (Index l = 0; l < steps; ++l) {
    for (Index r = 0; r < dim * neurons; ++r) {
      p.theta()[p.w_offset(l) + r] = Scalar(rng.uniform(-wb, wb));
    }
    for (Index r = 0; r < dim * neurons + neurons; ++r) {
      p.theta()[p.a_offset(l) + r] = Scalar(rng.uniform(-ab, ab));
    }
  }
  return p;
}

enum class ModelKind
{
  SemiAutonomous,
  Vanilla
};

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(std::string const &name);

struct DofReport
{
  long long paper_formula;
  long long literal_count;
};

/// Parameter counts. Semi-autonomous: 2Pd(d+1) by the usual formula and P(d² + 3d) by
/// counting entries. Vanilla: (2d+1)MP for both (M is ignored for SA).
DofReport dof_report(ModelKind kind, long long neurons, long long dim, long long steps);

} // namespace sanode
