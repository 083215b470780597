#pragma once

#include <string_view>

namespace cav {

inline constexpr double kMetersPerSecondPerMph = 0.44704;

/// Converts miles per hour to metres per second. Throws std::invalid_argument on negative input.
double mph_to_mps(double mph);

/// Physical dimension of a configured quantity.
enum class Dimension { Length, Time, Speed, Acceleration, Flow, Dimensionless };

/// Parses "<number> <unit>" into SI (m, s, m/s, m/s^2, vehicles/s).
/// Throws std::invalid_argument when the unit is missing or does not match `dim`.
double parse_quantity(std::string_view text, Dimension dim);

std::string_view si_unit(Dimension dim);

}  // namespace cav
