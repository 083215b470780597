#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "cav/core/types.hpp"

namespace cav {

/// Raised for malformed documents and for documents violating a config invariant.
/// `field` is a dotted path (e.g. "zones[1].L"); `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field, int line, const std::string& message);

    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }

  private:
    std::string field_;
    int line_;
};

struct CorridorConfig {
    std::vector<ConflictZoneSpec> zones;
    std::vector<RouteSpec> routes;
    Bounds bounds;
    BaselineParams baseline;
    double headway_h = 1.2;
    double dt = 0.1;
    double horizon = 900.0;
    std::uint64_t seed = 1;
    Mode mode = Mode::Optimal;
    // Extra clearance required when checking a new plan against its leader's plan.
    double plan_gap_margin = 0.5;
    // tm relaxation on control-bound infeasibility.
    double relax_step = 0.1;
    int relax_retries = 50;

    const RouteSpec& route(RouteId id) const;
    const ConflictZoneSpec& zone(ZoneId z) const;
    /// Safe spacing delta(v) = h * v.
    double safe_distance(double v) const { return headway_h * v; }

    bool operator==(const CorridorConfig&) const = default;
};

CorridorConfig load_config(const std::string& text);
CorridorConfig load_config_file(const std::string& path);

/// Checks every invariant; throws ConfigError naming the first violation.
void validate(const CorridorConfig& cfg);

/// SI-unit YAML document; load_config(serialize_config(c)) == c.
std::string serialize_config(const CorridorConfig& cfg);

/// Corridor of the reference scenario (on-ramp merge, speed-reduction zone, roundabout).
std::string reference_config_text();

}  // namespace cav
