// Copyright 2026 The quipsim Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace quip {

enum class ErrorCode {
  // Program loading / validation.
  kMalformedDocument,
  kUnsupportedConstruct,
  kDanglingReference,
  kWidthOutOfRange,
  // Pipeline execution.
  kParseError,
  kEvaluationError,
  kUnknownTable,
  kKeyArityMismatch,
  kUnknownAction,
  kActionDataMismatch,
  kIndexOutOfRange,
  kUnknownPipeline,
  // Device shell.
  kPortBusy,
  kNoFreeBsmUnit,
  kUnknownGroup,
  kRoleViolation,
  kConflictingEmission,
  // Quantum fabric.
  kQubitNotEntangled,
  kSameQubit,
  kUnitUnbound,
  kUnknownQubit,
  // Experiment harness.
  kInvalidTopology,
  kInvalidConfig,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries a code so that callers (and
// tests) can dispatch on the kind of failure without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Loader diagnostics additionally carry the JSON-pointer-style location of the
// offending construct.
class LoadError : public Error {
 public:
  LoadError(ErrorCode code, std::string path, const std::string &detail)
      : Error(code, (path.empty() ? std::string("/") : path) + ": " + detail),
        path_(std::move(path)) {}

  const std::string &path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace quip
