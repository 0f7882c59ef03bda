#include "gdev/errors.hpp"

namespace gdev {

std::string_view error_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::InvalidWorkload: return "InvalidWorkload";
    case ErrorCode::WorkloadFailure: return "WorkloadFailure";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::SpawnFailure: return "SpawnFailure";
    case ErrorCode::HandshakeFailure: return "HandshakeFailure";
    case ErrorCode::ProtocolError: return "ProtocolError";
    case ErrorCode::UnsupportedPlatform: return "UnsupportedPlatform";
    case ErrorCode::InvalidCore: return "InvalidCore";
    case ErrorCode::AllocationFailure: return "AllocationFailure";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::InvalidPercentile: return "InvalidPercentile";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::KeyMismatch: return "KeyMismatch";
    case ErrorCode::NonpositiveLatency: return "NonpositiveLatency";
    case ErrorCode::MissingBaseline: return "MissingBaseline";
    case ErrorCode::OrderViolation: return "OrderViolation";
    case ErrorCode::NonpositiveInput: return "NonpositiveInput";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::UnknownModel: return "UnknownModel";
  }
  return "Unknown";
}

}  // namespace gdev
