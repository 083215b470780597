#include "cav/core/units.hpp"

#include <charconv>
#include <stdexcept>
#include <string>
#include <utility>

namespace cav {

double mph_to_mps(double mph)
{
    if (!(mph >= 0.0)) {
        throw std::invalid_argument("speed in mph must be non-negative");
    }
    return mph * kMetersPerSecondPerMph;
}

namespace {

struct UnitEntry {
    std::string_view name;
    Dimension dim;
    double scale;
};

// vph is vehicles per hour; flows are stored internally in vehicles per second.
constexpr UnitEntry kUnits[] = {
    {"m", Dimension::Length, 1.0},
    {"km", Dimension::Length, 1000.0},
    {"ft", Dimension::Length, 0.3048},
    {"s", Dimension::Time, 1.0},
    {"ms", Dimension::Time, 1e-3},
    {"min", Dimension::Time, 60.0},
    {"h", Dimension::Time, 3600.0},
    {"m/s", Dimension::Speed, 1.0},
    {"km/h", Dimension::Speed, 1.0 / 3.6},
    {"mph", Dimension::Speed, kMetersPerSecondPerMph},
    {"m/s^2", Dimension::Acceleration, 1.0},
    {"m/s2", Dimension::Acceleration, 1.0},
    {"vph", Dimension::Flow, 1.0 / 3600.0},
    {"veh/h", Dimension::Flow, 1.0 / 3600.0},
    {"veh/s", Dimension::Flow, 1.0},
    {"1", Dimension::Dimensionless, 1.0},
};

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

std::string_view si_unit(Dimension dim)
{
    switch (dim) {
    case Dimension::Length: return "m";
    case Dimension::Time: return "s";
    case Dimension::Speed: return "m/s";
    case Dimension::Acceleration: return "m/s^2";
    case Dimension::Flow: return "veh/s";
    case Dimension::Dimensionless: return "1";
    }
    return "";
}

double parse_quantity(std::string_view text, Dimension dim)
{
    text = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc{}) {
        throw std::invalid_argument("not a number: '" + std::string(text) + "'");
    }
    std::string_view unit = trim(std::string_view(ptr, text.data() + text.size() - ptr));
    if (unit.empty()) {
        if (dim == Dimension::Dimensionless) return value;
        throw std::invalid_argument("missing unit in '" + std::string(text) + "' (expected " +
                                    std::string(si_unit(dim)) + " or compatible)");
    }
    for (const auto& u : kUnits) {
        if (u.name == unit) {
            if (u.dim != dim) {
                throw std::invalid_argument("unit '" + std::string(unit) + "' has the wrong dimension (expected " +
                                            std::string(si_unit(dim)) + " or compatible)");
            }
            if (unit == "mph") return mph_to_mps(value);
            return value * u.scale;
        }
    }
    throw std::invalid_argument("unknown unit '" + std::string(unit) + "'");
}

}  // namespace cav
