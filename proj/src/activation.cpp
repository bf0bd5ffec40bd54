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

#include "sanode/activation.hpp"

#include "sanode/errors.hpp"

#include <algorithm>
#include <cctype>

namespace sanode {

std::string to_string(Activation a)
{
  return a == Activation::ReLU ? "relu" : "sigmoid";
}

Activation parse_activation(std::string_view name)
{
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "relu") {
    return Activation::ReLU;
  }
  if (lower == "sigmoid") {
    return Activation::Sigmoid;
  }
  throw DomainError("unknown activation '" + std::string(name) + "'");
}

} // namespace sanode
