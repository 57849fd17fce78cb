#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lesionbench {

enum class Errc {
  UnreadableFile,
  UnsupportedFormat,
  NonBinaryMask,
  OutOfRangeProbability,
  MissingSpacing,
  UnwritablePath,
  DimsMismatch,
  SpacingMismatch,
  InvalidArgument,
  InvalidThreshold,
  BottomExceedsGrid,
  DuplicateStudyId,
  UnknownDisease,
  MalformedRow,
  InvalidK,
  UnknownStudyInMetrics,
  MissingMetric,
};

std::string_view errc_name(Errc code) noexcept;

/// Every library failure is raised as an Error. what() always starts with the
/// code name, e.g. "DimsMismatch: (4,4,4) vs (4,4,5)".
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace lesionbench
