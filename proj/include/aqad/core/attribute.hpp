#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace aqad {

enum class Attribute {
  CO,
  NO2,
  O3,
  SO2,
  PM25,
  PM10,
  temperature,
  humidity,
  pressure,
  wind_speed,
};

inline constexpr std::array<Attribute, 10> kAllAttributes = {
    Attribute::CO,          Attribute::NO2,      Attribute::O3,       Attribute::SO2,
    Attribute::PM25,        Attribute::PM10,     Attribute::temperature,
    Attribute::humidity,    Attribute::pressure, Attribute::wind_speed};

inline constexpr std::array<Attribute, 6> kPollutants = {
    Attribute::CO, Attribute::NO2, Attribute::O3, Attribute::SO2, Attribute::PM25, Attribute::PM10};

// Column order of the weather block in a feature row.
inline constexpr std::array<Attribute, 4> kWeather = {
    Attribute::temperature, Attribute::humidity, Attribute::pressure, Attribute::wind_speed};

std::string_view to_string(Attribute a) noexcept;
std::optional<Attribute> parse_attribute(std::string_view name) noexcept;
Attribute attribute_from_string(std::string_view name);  // throws UnknownAttribute
bool is_pollutant(Attribute a) noexcept;

// Comma-joined accepted spellings, for error messages.
std::string accepted_attribute_names();

}  // namespace aqad
