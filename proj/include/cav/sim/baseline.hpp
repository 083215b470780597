#pragma once

#include <optional>

#include "cav/core/types.hpp"

namespace cav::sim {

/// What the stand-in driver sees besides its leader.
struct ZoneContext {
    double desired_speed = 0.0;
    std::optional<SpeedSegment> next_lower;  // upcoming lower limit, if any
    std::optional<double> stop_line;         // yield: stop here unless cleared
};

/// IDM-style car following (delta = 4, time gap = headway, jam gap = min_gap), anticipatory braking
/// for a lower limit ahead, and a virtual stopped obstacle at a yield line.
/// The result is clipped to [-max(comfort_decel, emergency_decel), max_accel].
double baseline_step(const VehicleState& vehicle, const std::optional<VehicleState>& leader, const BaselineParams& params,
                     const ZoneContext& context);

/// Time to cover `distance` from speed v with free-road baseline acceleration toward `desired`.
double free_travel_time(double v, double distance, double desired, const BaselineParams& params);

}  // namespace cav::sim
