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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sanode {

/// Root of every error raised by the library.
class Error : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

/// Array shapes disagree (parameter blocks, state dimension, dataset vs model).
class ShapeError : public Error
{
public:
  using Error::Error;
};

/// A value lies outside the domain of an operation (time outside a grid,
/// log of a non-positive number, invalid configuration value).
class DomainError : public Error
{
public:
  using Error::Error;
};

/// The integrator produced a non-finite or exploding state.
class IntegrationBlowup : public Error
{
public:
  IntegrationBlowup(std::string const &what, double time, std::ptrdiff_t step)
    : Error(what)
    , time_(time)
    , step_(step)
  {
  }

  double time() const { return time_; }
  std::ptrdiff_t step() const { return step_; }

private:
  double time_;
  std::ptrdiff_t step_;
};

/// The requested operation needs something the field kind does not provide
/// (e.g. a divergence for a vanilla field).
class UnsupportedField : public Error
{
public:
  using Error::Error;
};

/// Syntax or validation error in the expression language. `offset` is a byte
/// offset into the parsed source.
class ParseError : public Error
{
public:
  ParseError(std::string const &message, std::size_t offset)
    : Error(message + " at offset " + std::to_string(offset))
    , message_(message)
    , offset_(offset)
  {
  }

  std::string const &message() const { return message_; }
  std::size_t offset() const { return offset_; }

private:
  std::string message_;
  std::size_t offset_;
};

class IoError : public Error
{
public:
  using Error::Error;
};

/// A persisted file is truncated or otherwise malformed.
class CorruptFile : public IoError
{
public:
  using IoError::IoError;
};

class VersionMismatch : public IoError
{
public:
  using IoError::IoError;
};

} // namespace sanode
