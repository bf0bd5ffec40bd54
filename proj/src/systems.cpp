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

#include "sanode/systems.hpp"

#include "sanode/ode.hpp"

#include <cmath>

namespace sanode {

std::string to_string(SystemId id)
{
  switch (id) {
  case SystemId::Dissipative:
    return "dissipative";
  case SystemId::Pendulum:
    return "pendulum";
  case SystemId::LinearNonAut:
    return "linear-nonaut";
  case SystemId::Duffing:
    return "duffing";
  case SystemId::TransportSinField:
    return "transport-sin";
  case SystemId::Doswell:
    return "doswell";
  }
  return "unknown";
}

SystemId parse_system_id(std::string const &name)
{
  for (SystemId id : {SystemId::Dissipative, SystemId::Pendulum, SystemId::LinearNonAut, SystemId::Duffing,
                      SystemId::TransportSinField, SystemId::Doswell}) {
    if (to_string(id) == name) {
      return id;
    }
  }
  throw DomainError("unknown system '" + name + "'");
}

double doswell_speed(double r, double vbar)
{
  double const sech = 1.0 / std::cosh(r);
  double const ratio = r < 1e-8 ? 1.0 - r * r / 3.0 : std::tanh(r) / r;
  return vbar * sech * sech * ratio;
}

namespace {

Vector vec2(double a, double b)
{
  Vector v(2);
  v << a, b;
  return v;
}

// Per-coordinate flow of ẋ = sin(x)/(1+t²): tan(x/2) scales by k = e^{atan t}
// inside each 2π cell.
double sin_flow(double x0, double k)
{
  double const m = std::round(x0 / (2.0 * M_PI));
  double const u = x0 - 2.0 * M_PI * m;
  return 2.0 * M_PI * m + 2.0 * std::atan(k * std::tan(0.5 * u));
}

// dx(t)/dx0 of the flow above, k / (cos²(u/2) + k² sin²(u/2)).
double sin_flow_jacobian(double x0, double k)
{
  double const c = std::cos(0.5 * x0);
  double const s = std::sin(0.5 * x0);
  return k / (c * c + k * k * s * s);
}

Vector fine_rk4(BenchmarkSystem const &sys, Vector const &x0, double t)
{
  if (t == 0.0) {
    return x0;
  }
  auto const steps = static_cast<Index>(std::ceil(std::abs(t) / 1e-4 - 1e-9));
  FieldHandle const f = sys.rhs;
  if (t > 0) {
    return integrate(f, x0, TimeGrid(0.0, t, steps)).states.bottomRows(1).transpose();
  }
  return integrate_backward(f, x0, TimeGrid(t, 0.0, steps)).states.topRows(1).transpose();
}

} // namespace

BenchmarkSystem make_system(SystemId id, SystemParams const &params)
{
  BenchmarkSystem sys{id, 2, {}, params, false, 5.0};
  AnalyticField &f = sys.rhs;
  f.dim = 2;
  f.name = to_string(id);
  switch (id) {
  case SystemId::Dissipative:
    f.rhs = [](Vector const &z, double) { return vec2(z[1], -2.0 * z[0] - 3.0 * z[1]); };
    f.divergence = [](Vector const &, double) { return -3.0; };
    sys.closed_form = true;
    break;
  case SystemId::Pendulum:
    f.rhs = [](Vector const &z, double) { return vec2(z[1], -std::sin(z[0])); };
    f.divergence = [](Vector const &, double) { return 0.0; };
    break;
  case SystemId::LinearNonAut:
    f.rhs = [](Vector const &z, double t) { return vec2(t - z[1], z[0] - t); };
    f.divergence = [](Vector const &, double) { return 0.0; };
    break;
  case SystemId::Duffing:
    f.rhs = [delta = params.delta, omega = params.omega](Vector const &z, double t) {
      return vec2(z[1], z[0] - z[0] * z[0] * z[0] + delta * std::cos(omega * t));
    };
    f.divergence = [](Vector const &, double) { return 0.0; };
    break;
  case SystemId::TransportSinField:
    f.rhs = [](Vector const &z, double t) {
      double const s = 1.0 / (1.0 + t * t);
      return vec2(std::sin(z[0]) * s, std::sin(z[1]) * s);
    };
    f.divergence = [](Vector const &z, double t) { return (std::cos(z[0]) + std::cos(z[1])) / (1.0 + t * t); };
    sys.closed_form = true;
    break;
  case SystemId::Doswell:
    f.rhs = [vbar = params.vbar](Vector const &z, double) {
      double const g = doswell_speed(std::hypot(z[0], z[1]), vbar);
      return vec2(-z[1] * g, z[0] * g);
    };
    f.divergence = [](Vector const &, double) { return 0.0; };
    sys.closed_form = true;
    sys.horizon = 4.0;
    break;
  }
  return sys;
}

Vector exact_flow(BenchmarkSystem const &sys, Vector const &x0, double t)
{
  if (x0.size() != sys.dim) {
    throw ShapeError("exact_flow: state dimension mismatch");
  }
  switch (sys.id) {
  case SystemId::Dissipative: {
    // e^{At} = α I + β A for A with eigenvalues −1, −2.
    double const e1 = std::exp(-t);
    double const e2 = std::exp(-2.0 * t);
    double const alpha = 2.0 * e1 - e2;
    double const beta = e1 - e2;
    return vec2(alpha * x0[0] + beta * x0[1], alpha * x0[1] + beta * (-2.0 * x0[0] - 3.0 * x0[1]));
  }
  case SystemId::TransportSinField: {
    double const k = std::exp(std::atan(t));
    return vec2(sin_flow(x0[0], k), sin_flow(x0[1], k));
  }
  case SystemId::Doswell: {
    double const angle = doswell_speed(std::hypot(x0[0], x0[1]), sys.params.vbar) * t;
    double const c = std::cos(angle);
    double const s = std::sin(angle);
    return vec2(c * x0[0] - s * x0[1], s * x0[0] + c * x0[1]);
  }
  default:
    return fine_rk4(sys, x0, t);
  }
}

namespace densities {

double gaussian_narrow(double x, double y)
{
  return std::exp(-(x * x + y * y));
}

double gaussian_wide(double x, double y)
{
  return std::exp(-(x * x + y * y) / 4.0);
}

double tanh_y(double, double y)
{
  return std::tanh(y);
}

double tanh_10y(double, double y)
{
  return std::tanh(10.0 * y);
}

} // namespace densities

double exact_transport_density(BenchmarkSystem const &sys, Density2D const &rho0, Vector const &x, double t)
{
  if (sys.dim != 2 || x.size() != 2) {
    throw ShapeError("exact_transport_density: needs a 2D system and point");
  }
  if (t == 0.0) {
    return rho0(x[0], x[1]);
  }
  switch (sys.id) {
  case SystemId::TransportSinField: {
    double const k = std::exp(std::atan(t));
    double const x0 = sin_flow(x[0], 1.0 / k);
    double const y0 = sin_flow(x[1], 1.0 / k);
    return rho0(x0, y0) / (sin_flow_jacobian(x0, k) * sin_flow_jacobian(y0, k));
  }
  case SystemId::Doswell: {
    Vector const back = exact_flow(sys, x, -t);
    return rho0(back[0], back[1]);
  }
  default: {
    auto const steps = static_cast<Index>(std::ceil(t / 1e-4 - 1e-9));
    CharacteristicFoot const foot = trace_characteristic(sys.rhs, x, TimeGrid(0.0, t, steps));
    return rho0(foot.foot[0], foot.foot[1]) * std::exp(-foot.divergence_integral);
  }
  }
}

} // namespace sanode
