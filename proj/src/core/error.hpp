// Copyright 2026 The Panelstyle Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace panelstyle {

// Error categories map one-to-one onto the C API status codes and the CLI
// exit codes.
enum class ErrorKind {
  kInternal = 1,
  kConfig = 2,
  kAssetMissing = 3,
  kContract = 4,
  kDivergence = 5,
  kSchema = 6,
  kNotFound = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::kConfig, what) {}
};

class AssetError : public Error {
 public:
  explicit AssetError(const std::string& what) : Error(ErrorKind::kAssetMissing, what) {}
};

class ContractViolation : public Error {
 public:
  explicit ContractViolation(const std::string& what) : Error(ErrorKind::kContract, what) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what) : Error(ErrorKind::kDivergence, what) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error(ErrorKind::kSchema, what) {}
};

class NotFoundError : public Error {
 public:
  explicit NotFoundError(const std::string& what) : Error(ErrorKind::kNotFound, what) {}
};

// Rethrows `e` as the same category with `context` prepended.
[[noreturn]] inline void rethrow_with_context(const Error& e, const std::string& context) {
  const std::string what = context + ": " + e.what();
  switch (e.kind()) {
    case ErrorKind::kConfig: throw ConfigError(what);
    case ErrorKind::kAssetMissing: throw AssetError(what);
    case ErrorKind::kContract: throw ContractViolation(what);
    case ErrorKind::kDivergence: throw DivergenceError(what);
    case ErrorKind::kSchema: throw SchemaError(what);
    case ErrorKind::kNotFound: throw NotFoundError(what);
    case ErrorKind::kInternal: break;
  }
  throw Error(e.kind(), what);
}

#define PANELSTYLE_REQUIRE(cond, msg)                   \
  do {                                                  \
    if (!(cond)) throw ::panelstyle::ContractViolation(msg); \
  } while (0)

}  // namespace panelstyle
