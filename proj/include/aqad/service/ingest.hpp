#pragma once

#include <string>
#include <string_view>

#include "aqad/core/series.hpp"

namespace aqad::service {

/// Parses and validates readings + stations CSV into a Dataset whose id is
/// the content hash of its canonical form, so identical rows always map to
/// the same id regardless of row order. Throws ParseError (with line number),
/// UnknownAttribute, IngestConflict for a repeated (station, attribute,
/// timestamp), and UnknownStation for readings of an undeclared station.
Dataset parse_dataset(std::string_view readings_csv, std::string_view stations_csv);

}  // namespace aqad::service
