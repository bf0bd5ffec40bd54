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

#include <functional>
#include <string>

namespace sanode {

enum class SystemId
{
  Dissipative,
  Pendulum,
  LinearNonAut,
  Duffing,
  TransportSinField,
  Doswell
};

std::string to_string(SystemId id);
/// Accepts the names printed by to_string (e.g. "dissipative", "doswell").
SystemId parse_system_id(std::string const &name);

struct SystemParams
{
  double delta = 0.1;    ///< Duffing forcing amplitude
  double omega = M_PI;   ///< Duffing forcing frequency
  double vbar = 2.59807; ///< Doswell peak tangential speed
};

/// A built-in benchmark:
///   dissipative      ż1 = z2,            ż2 = −2 z1 − 3 z2
///   pendulum         ż1 = z2,            ż2 = −sin z1
///   linear-nonaut    ż1 = t − z2,        ż2 = z1 − t
///   duffing          ż1 = z2,            ż2 = z1 − z1³ + δ cos(ω t)
///   transport-sin    ẋ = sin x/(1+t²),   ẏ = sin y/(1+t²)
///   doswell          ẋ = −y g(r),        ẏ = x g(r),   g(r) = v̄ sech²(r) tanh(r)/r
struct BenchmarkSystem
{
  SystemId id;
  Index dim;
  AnalyticField rhs;
  SystemParams params;
  bool closed_form;
  double horizon; ///< default final time of the experiments
};

BenchmarkSystem make_system(SystemId id, SystemParams const &params = {});

/// Doswell angular speed g(r); the removable singularity at 0 takes its limit v̄.
double doswell_speed(double r, double vbar);

/// Reference solution at time t. Closed forms for dissipative (matrix
/// exponential), transport-sin (per-coordinate tan(x/2) scaling) and doswell
/// (rotation at fixed radius); RK4 with dt ≤ 1e-4 otherwise.
Vector exact_flow(BenchmarkSystem const &sys, Vector const &x0, double t);

using Density2D = std::function<double(double, double)>;

namespace densities {
/// e^{−(x²+y²)}
double gaussian_narrow(double x, double y);
/// e^{−(x²+y²)/4}
double gaussian_wide(double x, double y);
/// tanh(y)
double tanh_y(double x, double y);
/// tanh(10 y)
double tanh_10y(double x, double y);
} // namespace densities

/// ρ(x, t) = ρ0(φ_t⁻¹(x)) · exp(−∫₀ᵗ div f) for a 2D system. Closed forms for
/// transport-sin and doswell; other systems trace the characteristic with RK4 at
/// dt ≤ 1e-4.
double exact_transport_density(BenchmarkSystem const &sys, Density2D const &rho0, Vector const &x, double t);

} // namespace sanode
