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
#include "sanode/rng.hpp"

#include <cmath>
#include <filesystem>
#include <functional>
#include <string>

#include <unistd.h>

namespace sanode::testing {

inline SaField random_sa(Index P, Index d, Activation act, std::uint64_t seed, double scale = 1.0)
{
  SaField p(P, d, act);
  Rng rng(seed);
  for (Index n = 0; n < p.size(); ++n) {
    p.theta()[n] = scale * rng.normal();
  }
  return p;
}

// Central differences of a scalar function of a parameter vector.
inline Vector central_gradient(std::function<double(Vector const &)> const &f, Vector const &x, double h)
{
  Vector g(x.size());
  Vector y = x;
  for (Index n = 0; n < x.size(); ++n) {
    y[n] = x[n] + h;
    double const up = f(y);
    y[n] = x[n] - h;
    double const down = f(y);
    y[n] = x[n];
    g[n] = (up - down) / (2 * h);
  }
  return g;
}

// Entrywise relative error; entries far below the largest reference entry are
// measured against 1e-3 of that entry instead of their own size.
inline double max_rel_error(Vector const &got, Vector const &ref)
{
  double const floor = 1e-3 * ref.cwiseAbs().maxCoeff();
  double worst = 0;
  for (Index n = 0; n < ref.size(); ++n) {
    double const denom = std::max({std::abs(ref[n]), floor, 1e-300});
    worst = std::max(worst, std::abs(got[n] - ref[n]) / denom);
  }
  return worst;
}

class TempDir
{
public:
  explicit TempDir(std::string const &tag)
  {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sanode_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() { std::filesystem::remove_all(path_); }
  TempDir(TempDir const &) = delete;
  TempDir &operator=(TempDir const &) = delete;
  std::filesystem::path const &path() const { return path_; }
  std::filesystem::path operator/(std::string const &name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

} // namespace sanode::testing
