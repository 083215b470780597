#pragma once

#include <map>
#include <vector>

#include "cav/core/config.hpp"
#include "cav/sim/trace.hpp"

namespace cav::sim {

struct VehicleMetrics {
    VehicleId id = 0;
    RouteId route = 0;
    bool completed = false;
    double corridor_time = 0.0;
    std::map<ZoneId, double> zone_time;  // CZ entry to MZ exit, for zones fully traversed
    double effort = 0.0;                 // integral of u^2, m^2/s^3
    double work = 0.0;                   // integral of max(0, u v), J/kg
    int stops = 0;                       // drops below 0.1 m/s
};

/// Per-run summary. Travel times are over completed test-route vehicles; the energy proxy and stops
/// over every completed vehicle.
struct Metrics {
    std::vector<VehicleMetrics> vehicles;
    std::size_t completed = 0;
    std::size_t test_route_completed = 0;
    double mean_corridor_time = 0.0;
    std::map<ZoneId, double> mean_zone_time;
    double mean_effort = 0.0;
    double mean_work = 0.0;
    double mean_stops = 0.0;
};

/// Pure function of the trace: reloading a written trace reproduces the same numbers.
Metrics compute_metrics(const Trace& trace, const CorridorConfig& cfg);

}  // namespace cav::sim
