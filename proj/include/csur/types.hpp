#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>
#include <vector>

namespace csur {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Virtual centers z_k of all agents, indexed by agent id.
using Configuration = std::vector<Vec2>;

enum class ErrorCode {
  DegenerateCell,
  CoincidentAgents,
  OutOfRegion,
  BoundaryViolation,
  EmptyRegion,
  InvalidParameter,
  IncompleteRound,
  ProtocolError,
  StaleState,
  TraceFormat,
  Schema,
  NonConvex,
  Io,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateCell: return "degenerate-cell";
    case ErrorCode::CoincidentAgents: return "coincident-agents";
    case ErrorCode::OutOfRegion: return "out-of-region";
    case ErrorCode::BoundaryViolation: return "boundary-violation";
    case ErrorCode::EmptyRegion: return "empty-region";
    case ErrorCode::InvalidParameter: return "invalid-parameter";
    case ErrorCode::IncompleteRound: return "incomplete-round";
    case ErrorCode::ProtocolError: return "protocol-error";
    case ErrorCode::StaleState: return "stale-state";
    case ErrorCode::TraceFormat: return "trace-format";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::NonConvex: return "non-convex";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

class CoverageError : public std::runtime_error {
 public:
  CoverageError(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline double cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

}  // namespace csur
