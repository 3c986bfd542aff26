#include "smdet/errors.hpp"

namespace smdet {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ExplicitNotPSD: return "ExplicitNotPSD";
    case ErrorCode::NotHermitian: return "NotHermitian";
    case ErrorCode::TemporalGramNotPSD: return "TemporalGramNotPSD";
    case ErrorCode::UnsupportedOrder: return "UnsupportedOrder";
    case ErrorCode::BadLength: return "BadLength";
    case ErrorCode::NotInConstellation: return "NotInConstellation";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::SingularT: return "SingularT";
    case ErrorCode::RankDeficientTruncation: return "RankDeficientTruncation";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::EmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorCode::IntegrationNotConverged: return "IntegrationNotConverged";
    case ErrorCode::MissingBlockIndex: return "MissingBlockIndex";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace smdet
