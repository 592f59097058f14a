#include "mf/error.h"

namespace mf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
  case ErrorCode::RankDeficient: return "RankDeficient";
  case ErrorCode::DimensionMismatch: return "DimensionMismatch";
  case ErrorCode::InvalidArgument: return "InvalidArgument";
  case ErrorCode::UnsupportedDegree: return "UnsupportedDegree";
  case ErrorCode::UnsupportedDimension: return "UnsupportedDimension";
  case ErrorCode::IllConditioned: return "IllConditioned";
  case ErrorCode::DegreeZero: return "DegreeZero";
  case ErrorCode::IncompleteMoments: return "IncompleteMoments";
  case ErrorCode::UncertifiedRule: return "UncertifiedRule";
  case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
  case ErrorCode::RankMismatch: return "RankMismatch";
  case ErrorCode::UnsupportedCombination: return "UnsupportedCombination";
  case ErrorCode::SpanDeficient: return "SpanDeficient";
  case ErrorCode::InvariantViolated: return "InvariantViolated";
  case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

} // namespace mf
