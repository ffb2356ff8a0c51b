// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 ICH Forge Contributors

#pragma once

#include <stdexcept>
#include <string>

namespace forge {

/// Base for every error raised by the toolkit. CLI front-ends catch this and
/// map it to a non-zero exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad caller input: empty required fields, out-of-range parameters.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace forge
