#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aqad {

enum class Errc {
  InvalidArgument,
  EmptySeries,
  DuplicateTimestamp,
  NonFiniteValue,
  GranularityMismatch,
  UnimputableColumn,
  EmptyFitRange,
  SeriesTooShort,
  NonFiniteInput,
  TrainingDiverged,
  ShapeMismatch,
  WindowTooShort,
  DegenerateWindow,
  ParseError,
  UnknownAttribute,
  IngestConflict,
  UnknownDataset,
  UnknownExperiment,
  UnknownStation,
  NotFound,
  OutOfRange,
  InvalidConfig,
  Io,
};

std::string_view to_string(Errc code) noexcept;

/// Every failure raised by the library carries one of the codes above so
/// callers (HTTP layer, CLI exit paths, tests) can branch on it.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

class TrainingDiverged : public Error {
 public:
  TrainingDiverged(int epoch, const std::string& message)
      : Error(Errc::TrainingDiverged, message), epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace aqad
