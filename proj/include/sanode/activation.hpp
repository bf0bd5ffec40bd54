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

#include <Eigen/Core>

#include <cmath>
#include <string>
#include <string_view>

namespace sanode {

enum class Activation
{
  ReLU,
  Sigmoid
};

std::string to_string(Activation a);
/// Accepts "relu" / "sigmoid" (case-insensitive); throws DomainError otherwise.
Activation parse_activation(std::string_view name);

template <typename Scalar> Scalar activate(Activation a, Scalar z)
{
  if (a == Activation::ReLU) {
    return z > Scalar(0) ? z : Scalar(0);
  }
  return Scalar(1) / (Scalar(1) + std::exp(-z));
}

/// Derivative of the activation. The ReLU subgradient at 0 is taken as 0.
template <typename Scalar> Scalar activate_derivative(Activation a, Scalar z)
{
  if (a == Activation::ReLU) {
    return z > Scalar(0) ? Scalar(1) : Scalar(0);
  }
  Scalar const s = Scalar(1) / (Scalar(1) + std::exp(-z));
  return s * (Scalar(1) - s);
}

/// Elementwise activation and derivative of a pre-activation array, written into
/// `value` and `slope`.
template <typename In, typename Out1, typename Out2>
void activate_with_slope(Activation a, Eigen::ArrayBase<In> const &z, Eigen::ArrayBase<Out1> &value,
                         Eigen::ArrayBase<Out2> &slope)
{
  using Scalar = typename In::Scalar;
  if (a == Activation::ReLU) {
    value.derived() = z.max(Scalar(0));
    slope.derived() = (z > Scalar(0)).template cast<Scalar>();
  } else {
    value.derived() = (Scalar(1) + (-z).exp()).inverse();
    slope.derived() = value * (Scalar(1) - value);
  }
}

template <typename In, typename Out> void activate_array(Activation a, Eigen::ArrayBase<In> const &z, Eigen::ArrayBase<Out> &value)
{
  using Scalar = typename In::Scalar;
  if (a == Activation::ReLU) {
    value.derived() = z.max(Scalar(0));
  } else {
    value.derived() = (Scalar(1) + (-z).exp()).inverse();
  }
}

} // namespace sanode
