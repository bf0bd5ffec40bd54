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

#include "sanode/activation.hpp"
#include "sanode/errors.hpp"
#include "sanode/rng.hpp"

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <string>

namespace sanode {

using Index = Eigen::Index;

template <typename Scalar> using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar> using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Parameters Θ = (W_i, A1_i, A2_i, B_i), i = 1..P, of the semi-autonomous field
///
///   f(x, t) = Σ_i W_i ∘ σ(A1_i x + A2_i t + B_i).
///
/// Everything lives in one flat vector so that gradients and optimizer moments
/// share its layout. A "unit" r = j·P + i addresses output coordinate j of
/// neuron i, and every block is a contiguous array over units:
///
///   [ W | A1(:,:,0) | ... | A1(:,:,d-1) | A2 | B ]      each block of length d·P
///
/// so A1 column k holds entry (j, k) of every A1_i. The canonical (file) order
/// is different; see to_canonical().
template <typename Scalar> class SaParams
{
public:
  using Vector = VectorX<Scalar>;

  SaParams(Index neurons, Index dim, Activation activation)
    : neurons_(neurons)
    , dim_(dim)
    , activation_(activation)
  {
    if (neurons < 1 || dim < 1) {
      throw ShapeError("SaParams: neuron count and dimension must be positive");
    }
    theta_ = Vector::Zero(size());
  }

  SaParams(Index neurons, Index dim, Activation activation, Vector theta)
    : SaParams(neurons, dim, activation)
  {
    if (theta.size() != size()) {
      throw ShapeError("SaParams: expected " + std::to_string(size()) + " parameters, got " +
                       std::to_string(theta.size()));
    }
    theta_ = std::move(theta);
  }

  Index neurons() const { return neurons_; }
  Index dim() const { return dim_; }
  Index units() const { return neurons_ * dim_; }
  /// Literal entry count P·(d² + 3d).
  Index size() const { return units() * (dim_ + 3); }
  Activation activation() const { return activation_; }

  Vector const &theta() const { return theta_; }
  Vector &theta() { return theta_; }

  Index unit(Index i, Index j) const { return j * neurons_ + i; }

  static constexpr Index w_block = 0;
  Index a1_block(Index k) const { return units() * (1 + k); }
  Index a2_block() const { return units() * (1 + dim_); }
  Index b_block() const { return units() * (2 + dim_); }

  auto W() const { return theta_.segment(w_block, units()); }
  auto W() { return theta_.segment(w_block, units()); }
  auto A1_column(Index k) const { return theta_.segment(a1_block(k), units()); }
  auto A1_column(Index k) { return theta_.segment(a1_block(k), units()); }
  auto A2() const { return theta_.segment(a2_block(), units()); }
  auto A2() { return theta_.segment(a2_block(), units()); }
  auto B() const { return theta_.segment(b_block(), units()); }
  auto B() { return theta_.segment(b_block(), units()); }

  // Entry access by neuron i, output coordinate j, input k.
  Scalar &w(Index i, Index j) { return theta_[w_block + unit(i, j)]; }
  Scalar w(Index i, Index j) const { return theta_[w_block + unit(i, j)]; }
  Scalar &a1(Index i, Index j, Index k) { return theta_[a1_block(k) + unit(i, j)]; }
  Scalar a1(Index i, Index j, Index k) const { return theta_[a1_block(k) + unit(i, j)]; }
  Scalar &a2(Index i, Index j) { return theta_[a2_block() + unit(i, j)]; }
  Scalar a2(Index i, Index j) const { return theta_[a2_block() + unit(i, j)]; }
  Scalar &b(Index i, Index j) { return theta_[b_block() + unit(i, j)]; }
  Scalar b(Index i, Index j) const { return theta_[b_block() + unit(i, j)]; }

  /// Flat vector in file order: W[P][d], A1[P][d][d], A2[P][d], B[P][d].
  Vector to_canonical() const
  {
    Vector out(size());
    Index n = 0;
    for (Index i = 0; i < neurons_; ++i)
      for (Index j = 0; j < dim_; ++j)
        out[n++] = w(i, j);
    for (Index i = 0; i < neurons_; ++i)
      for (Index j = 0; j < dim_; ++j)
        for (Index k = 0; k < dim_; ++k)
          out[n++] = a1(i, j, k);
    for (Index i = 0; i < neurons_; ++i)
      for (Index j = 0; j < dim_; ++j)
        out[n++] = a2(i, j);
    for (Index i = 0; i < neurons_; ++i)
      for (Index j = 0; j < dim_; ++j)
        out[n++] = b(i, j);
    return out;
  }

  static SaParams from_canonical(Index neurons, Index dim, Activation activation, Vector const &flat)
  {
    SaParams p(neurons, dim, activation);
    if (flat.size() != p.size()) {
      throw ShapeError("SaParams::from_canonical: size mismatch");
    }
    Index n = 0;
    for (Index i = 0; i < neurons; ++i)
      for (Index j = 0; j < dim; ++j)
        p.w(i, j) = flat[n++];
    for (Index i = 0; i < neurons; ++i)
      for (Index j = 0; j < dim; ++j)
        for (Index k = 0; k < dim; ++k)
          p.a1(i, j, k) = flat[n++];
    for (Index i = 0; i < neurons; ++i)
      for (Index j = 0; j < dim; ++j)
        p.a2(i, j) = flat[n++];
    for (Index i = 0; i < neurons; ++i)
      for (Index j = 0; j < dim; ++j)
        p.b(i, j) = flat[n++];
    return p;
  }

  bool all_finite() const { return theta_.allFinite(); }

private:
  Index neurons_;
  Index dim_;
  Activation activation_;
  Vector theta_;
};

/// Scratch buffers for repeated evaluation of one SA field. Not thread-safe;
/// use one per thread.
template <typename Scalar> class SaWorkspace
{
public:
  using Params = SaParams<Scalar>;
  using Vector = VectorX<Scalar>;
  using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

  explicit SaWorkspace(Params const &p)
    : z_(p.units())
    , s_(p.units())
    , ds_(p.units())
    , u_(p.units())
  {
  }

  template <typename X> void eval(Params const &p, Eigen::MatrixBase<X> const &x, Scalar t, Vector &out)
  {
    check_dim(p, x.size());
    preactivate(p, x, t);
    activate_array(p.activation(), z_, s_);
    Index const P = p.neurons();
    out.resize(p.dim());
    for (Index j = 0; j < p.dim(); ++j) {
      out[j] = (p.W().segment(j * P, P).array() * s_.segment(j * P, P)).sum();
    }
  }

  /// Vector-Jacobian product with covector `cov`: writes covᵀ ∂f/∂x to `xbar`
  /// and adds covᵀ ∂f/∂Θ into `grad` (skipped when `grad` is empty).
  template <typename X, typename C>
  void vjp(Params const &p, Eigen::MatrixBase<X> const &x, Scalar t, Eigen::MatrixBase<C> const &cov, Vector &xbar,
           Eigen::Ref<Vector> grad)
  {
    check_dim(p, x.size());
    preactivate(p, x, t);
    activate_with_slope(p.activation(), z_, s_, ds_);
    Index const P = p.neurons();
    Index const d = p.dim();
    for (Index j = 0; j < d; ++j) {
      u_.segment(j * P, P) = cov[j] * p.W().segment(j * P, P).array() * ds_.segment(j * P, P);
    }
    xbar.resize(d);
    for (Index k = 0; k < d; ++k) {
      xbar[k] = (p.A1_column(k).array() * u_).sum();
    }
    if (grad.size() == 0) {
      return;
    }
    auto &g = grad;
    for (Index j = 0; j < d; ++j) {
      g.segment(Params::w_block + j * P, P).array() += cov[j] * s_.segment(j * P, P);
    }
    for (Index k = 0; k < d; ++k) {
      g.segment(p.a1_block(k), p.units()).array() += x[k] * u_;
    }
    g.segment(p.a2_block(), p.units()).array() += t * u_;
    g.segment(p.b_block(), p.units()).array() += u_;
  }

  template <typename X> MatrixX<Scalar> jacobian_x(Params const &p, Eigen::MatrixBase<X> const &x, Scalar t)
  {
    check_dim(p, x.size());
    slopes(p, x, t);
    Index const P = p.neurons();
    Index const d = p.dim();
    MatrixX<Scalar> J(d, d);
    for (Index j = 0; j < d; ++j) {
      for (Index k = 0; k < d; ++k) {
        J(j, k) = (u_.segment(j * P, P) * p.A1_column(k).segment(j * P, P).array()).sum();
      }
    }
    return J;
  }

  template <typename X> Scalar divergence(Params const &p, Eigen::MatrixBase<X> const &x, Scalar t)
  {
    check_dim(p, x.size());
    slopes(p, x, t);
    Index const P = p.neurons();
    Scalar div(0);
    for (Index j = 0; j < p.dim(); ++j) {
      div += (u_.segment(j * P, P) * p.A1_column(j).segment(j * P, P).array()).sum();
    }
    return div;
  }

private:
  static void check_dim(Params const &p, Index n)
  {
    if (n != p.dim()) {
      throw ShapeError("SA field of dimension " + std::to_string(p.dim()) + " evaluated at a state of size " +
                       std::to_string(n));
    }
  }

  template <typename X> void preactivate(Params const &p, Eigen::MatrixBase<X> const &x, Scalar t)
  {
    z_ = p.B().array() + t * p.A2().array();
    // Unit r = j·P + i sees row j of A1_i; input coordinate k is shared by all units.
    for (Index k = 0; k < p.dim(); ++k) {
      z_ += x[k] * p.A1_column(k).array();
    }
  }

  // u_ = W ∘ σ'(z)
  template <typename X> void slopes(Params const &p, Eigen::MatrixBase<X> const &x, Scalar t)
  {
    preactivate(p, x, t);
    activate_with_slope(p.activation(), z_, s_, ds_);
    u_ = p.W().array() * ds_;
  }

  Array z_, s_, ds_, u_;
};

template <typename Scalar, typename X> VectorX<Scalar> sa_eval(SaParams<Scalar> const &p, Eigen::MatrixBase<X> const &x, Scalar t)
{
  SaWorkspace<Scalar> ws(p);
  VectorX<Scalar> out;
  ws.eval(p, x, t, out);
  return out;
}

/// ∂f/∂x, entry (j, k) = Σ_i W_ij σ'(z_ij) A1_i(j, k).
template <typename Scalar, typename X>
MatrixX<Scalar> sa_jacobian_x(SaParams<Scalar> const &p, Eigen::MatrixBase<X> const &x, Scalar t)
{
  SaWorkspace<Scalar> ws(p);
  return ws.jacobian_x(p, x, t);
}

/// Matrix-free covᵀ ∂f/∂Θ in the internal parameter layout.
template <typename Scalar, typename X, typename C>
VectorX<Scalar> sa_param_vjp(SaParams<Scalar> const &p, Eigen::MatrixBase<X> const &x, Scalar t,
                             Eigen::MatrixBase<C> const &cov)
{
  if (cov.size() != p.dim()) {
    throw ShapeError("sa_param_vjp: covector size mismatch");
  }
  SaWorkspace<Scalar> ws(p);
  VectorX<Scalar> grad = VectorX<Scalar>::Zero(p.size());
  VectorX<Scalar> xbar;
  ws.vjp(p, x, t, cov, xbar, grad);
  return grad;
}

/// Materialized ∂f/∂Θ, a d × size() matrix (row j is e_jᵀ ∂f/∂Θ).
template <typename Scalar, typename X>
MatrixX<Scalar> sa_jacobian_theta(SaParams<Scalar> const &p, Eigen::MatrixBase<X> const &x, Scalar t)
{
  MatrixX<Scalar> J(p.dim(), p.size());
  for (Index j = 0; j < p.dim(); ++j) {
    J.row(j) = sa_param_vjp(p, x, t, VectorX<Scalar>::Unit(p.dim(), j)).transpose();
  }
  return J;
}

/// div_x f = Σ_i ⟨W_i, diag(A1_i) ∘ σ'(A1_i x + A2_i t + B_i)⟩.
template <typename Scalar, typename X> Scalar sa_divergence(SaParams<Scalar> const &p, Eigen::MatrixBase<X> const &x, Scalar t)
{
  SaWorkspace<Scalar> ws(p);
  return ws.divergence(p, x, t);
}

/// ℓ² row norms of A1 per unit: ‖A1_i row j‖₂ at unit j·P + i.
template <typename Scalar> VectorX<Scalar> a1_row_norms(SaParams<Scalar> const &p)
{
  VectorX<Scalar> sq = VectorX<Scalar>::Zero(p.units());
  for (Index k = 0; k < p.dim(); ++k) {
    sq.array() += p.A1_column(k).array().square();
  }
  return sq.array().sqrt();
}

/// Lipschitz constant estimate ‖ Σ_i |W_i| ∘ ‖A1_i‖_ℓ² ‖ of the field in x.
template <typename Scalar> Scalar lipschitz_bound(SaParams<Scalar> const &p)
{
  VectorX<Scalar> const rows = a1_row_norms(p);
  Index const P = p.neurons();
  Scalar sq(0);
  for (Index j = 0; j < p.dim(); ++j) {
    Scalar const v = (p.W().segment(j * P, P).array().abs() * rows.segment(j * P, P).array()).sum();
    sq += v * v;
  }
  return std::sqrt(sq);
}

/// Subgradient of lipschitz_bound in the internal layout. |·| uses sign(0) = 0 and
/// a zero A1 row contributes 0; the gradient is 0 when the bound is 0.
template <typename Scalar> VectorX<Scalar> lipschitz_bound_gradient(SaParams<Scalar> const &p)
{
  VectorX<Scalar> grad = VectorX<Scalar>::Zero(p.size());
  VectorX<Scalar> const rows = a1_row_norms(p);
  Index const P = p.neurons();
  Index const d = p.dim();
  VectorX<Scalar> v(d);
  for (Index j = 0; j < d; ++j) {
    v[j] = (p.W().segment(j * P, P).array().abs() * rows.segment(j * P, P).array()).sum();
  }
  Scalar const norm = v.norm();
  if (norm == Scalar(0)) {
    return grad;
  }
  for (Index j = 0; j < d; ++j) {
    Scalar const c = v[j] / norm;
    for (Index i = 0; i < P; ++i) {
      Index const r = j * P + i;
      Scalar const w = p.W()[r];
      Scalar const sign = w > 0 ? Scalar(1) : (w < 0 ? Scalar(-1) : Scalar(0));
      grad[SaParams<Scalar>::w_block + r] = c * sign * rows[r];
      if (rows[r] > Scalar(0)) {
        for (Index k = 0; k < d; ++k) {
          grad[p.a1_block(k) + r] = c * std::abs(w) * p.A1_column(k)[r] / rows[r];
        }
      }
    }
  }
  return grad;
}

/// ‖ Σ_i |W_i| ∘ (‖A1_i‖_ℓ¹ + |A2_i| + |B_i|) ‖, a Barron-norm proxy for monitoring.
template <typename Scalar> Scalar barron_diagnostic(SaParams<Scalar> const &p)
{
  VectorX<Scalar> mass = p.A2().array().abs() + p.B().array().abs();
  for (Index k = 0; k < p.dim(); ++k) {
    mass.array() += p.A1_column(k).array().abs();
  }
  Index const P = p.neurons();
  Scalar sq(0);
  for (Index j = 0; j < p.dim(); ++j) {
    Scalar const v = (p.W().segment(j * P, P).array().abs() * mass.segment(j * P, P).array()).sum();
    sq += v * v;
  }
  return std::sqrt(sq);
}

/// Uniform fan-in initialization: (A1 | A2 | B) entries on ±1/√(d+1), W on ±1/√P.
/// Draw order is W, A1, A2, B in the internal layout. With `autonomous` the time
/// weights A2 are zero.
template <typename Scalar = double>
SaParams<Scalar> init_sa_params(Index neurons, Index dim, Activation activation, std::uint64_t seed, bool autonomous = false)
{
  SaParams<Scalar> p(neurons, dim, activation);
  Rng rng(seed);
  double const wb = 1.0 / std::sqrt(static_cast<double>(neurons));
  double const ab = 1.0 / std::sqrt(static_cast<double>(dim + 1));
  for (Index r = 0; r < p.units(); ++r) {
    p.W()[r] = Scalar(rng.uniform(-wb, wb));
  }
  for (Index k = 0; k < dim; ++k) {
    for (Index r = 0; r < p.units(); ++r) {
      p.A1_column(k)[r] = Scalar(rng.uniform(-ab, ab));
    }
  }
  for (Index r = 0; r < p.units(); ++r) {
    p.A2()[r] = Scalar(rng.uniform(-ab, ab));
  }
  for (Index r = 0; r < p.units(); ++r) {
    p.B()[r] = Scalar(rng.uniform(-ab, ab));
  }
  if (autonomous) {
    p.A2().setZero();
  }
  return p;
}

} // namespace sanode
