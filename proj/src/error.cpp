#include "lesionbench/error.hpp"

namespace lesionbench {

std::string_view errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::UnreadableFile: return "UnreadableFile";
    case Errc::UnsupportedFormat: return "UnsupportedFormat";
    case Errc::NonBinaryMask: return "NonBinaryMask";
    case Errc::OutOfRangeProbability: return "OutOfRangeProbability";
    case Errc::MissingSpacing: return "MissingSpacing";
    case Errc::UnwritablePath: return "UnwritablePath";
    case Errc::DimsMismatch: return "DimsMismatch";
    case Errc::SpacingMismatch: return "SpacingMismatch";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::InvalidThreshold: return "InvalidThreshold";
    case Errc::BottomExceedsGrid: return "BottomExceedsGrid";
    case Errc::DuplicateStudyId: return "DuplicateStudyId";
    case Errc::UnknownDisease: return "UnknownDisease";
    case Errc::MalformedRow: return "MalformedRow";
    case Errc::InvalidK: return "InvalidK";
    case Errc::UnknownStudyInMetrics: return "UnknownStudyInMetrics";
    case Errc::MissingMetric: return "MissingMetric";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(std::string(errc_name(code)) + ": " + detail), code_(code) {}

}  // namespace lesionbench
