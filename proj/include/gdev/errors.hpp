#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gdev {

enum class ErrorCode {
  InvalidPlan,
  InvalidWorkload,
  WorkloadFailure,
  Timeout,
  SpawnFailure,
  HandshakeFailure,
  ProtocolError,
  UnsupportedPlatform,
  InvalidCore,
  AllocationFailure,
  EmptyInput,
  InvalidPercentile,
  InsufficientSamples,
  KeyMismatch,
  NonpositiveLatency,
  MissingBaseline,
  OrderViolation,
  NonpositiveInput,
  ParseError,
  ValidationError,
  IoError,
  UnknownModel,
};

std::string_view error_name(ErrorCode code) noexcept;

// Base of every error raised by the library. Callers that only need the
// category inspect code(); tests and handlers can also catch the typed
// aliases below.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

template <ErrorCode C>
class TypedError : public Error {
 public:
  explicit TypedError(const std::string& message) : Error(C, message) {}
};

using InvalidPlan = TypedError<ErrorCode::InvalidPlan>;
using InvalidWorkload = TypedError<ErrorCode::InvalidWorkload>;
using WorkloadFailure = TypedError<ErrorCode::WorkloadFailure>;
using Timeout = TypedError<ErrorCode::Timeout>;
using SpawnFailure = TypedError<ErrorCode::SpawnFailure>;
using HandshakeFailure = TypedError<ErrorCode::HandshakeFailure>;
using ProtocolError = TypedError<ErrorCode::ProtocolError>;
using UnsupportedPlatform = TypedError<ErrorCode::UnsupportedPlatform>;
using InvalidCore = TypedError<ErrorCode::InvalidCore>;
using AllocationFailure = TypedError<ErrorCode::AllocationFailure>;
using EmptyInput = TypedError<ErrorCode::EmptyInput>;
using InvalidPercentile = TypedError<ErrorCode::InvalidPercentile>;
using InsufficientSamples = TypedError<ErrorCode::InsufficientSamples>;
using KeyMismatch = TypedError<ErrorCode::KeyMismatch>;
using NonpositiveLatency = TypedError<ErrorCode::NonpositiveLatency>;
using MissingBaseline = TypedError<ErrorCode::MissingBaseline>;
using OrderViolation = TypedError<ErrorCode::OrderViolation>;
using NonpositiveInput = TypedError<ErrorCode::NonpositiveInput>;
using ParseError = TypedError<ErrorCode::ParseError>;
using ValidationError = TypedError<ErrorCode::ValidationError>;
using IoError = TypedError<ErrorCode::IoError>;
using UnknownModel = TypedError<ErrorCode::UnknownModel>;

}  // namespace gdev
