#include "crbgate/errors.hpp"

#include <sstream>

namespace crbgate {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid_argument";
    case ErrorKind::DegenerateDistance: return "degenerate_distance";
    case ErrorKind::NonFiniteDensity: return "non_finite_density";
    case ErrorKind::SingularFim: return "singular_fim";
    case ErrorKind::DomainError: return "domain_error";
    case ErrorKind::InsufficientAnchors: return "insufficient_anchors";
    case ErrorKind::UnknownAnchor: return "unknown_anchor";
    case ErrorKind::BehindCamera: return "behind_camera";
    case ErrorKind::RegionOutsideImage: return "region_outside_image";
    case ErrorKind::DegenerateWaypoints: return "degenerate_waypoints";
    case ErrorKind::StreamOrderViolation: return "stream_order_violation";
    case ErrorKind::LengthMismatch: return "length_mismatch";
    case ErrorKind::EmptyCurve: return "empty_curve";
    case ErrorKind::ParseError: return "parse_error";
  }
  return "unknown";
}

namespace {

std::string degenerate_message(const std::string& id, double distance) {
  std::ostringstream os;
  os << "target is " << distance << " m from anchor '" << id
     << "', below the 0.01 m minimum distance";
  return os.str();
}

std::string singular_message(const std::array<double, 2>& ev) {
  std::ostringstream os;
  os << "Fisher information is singular (eigenvalues " << ev[0] << ", " << ev[1]
     << "); the anchor geometry cannot localize this point";
  return os.str();
}

}  // namespace

DegenerateDistanceError::DegenerateDistanceError(std::string anchor_id, double distance)
    : Error(ErrorKind::DegenerateDistance, degenerate_message(anchor_id, distance)),
      anchor_id_(std::move(anchor_id)),
      distance_(distance) {}

SingularFimError::SingularFimError(std::array<double, 2> eigenvalues)
    : Error(ErrorKind::SingularFim, singular_message(eigenvalues)),
      eigenvalues_(eigenvalues) {}

}  // namespace crbgate
