#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace crbgate {

enum class ErrorKind {
  InvalidArgument,
  DegenerateDistance,
  NonFiniteDensity,
  SingularFim,
  DomainError,
  InsufficientAnchors,
  UnknownAnchor,
  BehindCamera,
  RegionOutsideImage,
  DegenerateWaypoints,
  StreamOrderViolation,
  LengthMismatch,
  EmptyCurve,
  ParseError,
};

/// Stable snake_case name used in JSON error records and CLI diagnostics.
std::string_view to_string(ErrorKind kind);

/// Base of every error raised by the library. The kind is what callers
/// (stream records, HTTP status mapping) dispatch on.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Target closer than the singularity guard to an anchor.
class DegenerateDistanceError : public Error {
 public:
  DegenerateDistanceError(std::string anchor_id, double distance);

  const std::string& anchor_id() const noexcept { return anchor_id_; }
  double distance() const noexcept { return distance_; }

 private:
  std::string anchor_id_;
  double distance_;
};

/// Fisher information is not invertible: the geometry cannot localize in 2D.
class SingularFimError : public Error {
 public:
  explicit SingularFimError(std::array<double, 2> eigenvalues);

  /// Ascending.
  const std::array<double, 2>& eigenvalues() const noexcept { return eigenvalues_; }

 private:
  std::array<double, 2> eigenvalues_;
};

}  // namespace crbgate
