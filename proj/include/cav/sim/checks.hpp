#pragma once

#include <vector>

#include "cav/coordinator/coordinator.hpp"
#include "cav/sim/network.hpp"
#include "cav/sim/trace.hpp"

namespace cav::sim {

struct RearEndViolation {
    double t = 0.0;
    VehicleId follower = 0;
    VehicleId leader = 0;
    double gap = 0.0;       // s_leader - s_follower
    double required = 0.0;  // h * v_follower
};

/// Every (t, follower) whose spacing to the vehicle ahead is below h * v_follower (1e-3 m tolerance).
/// Pairs are taken on a shared route, or across conflict lanes while both are inside the same MZ.
std::vector<RearEndViolation> rear_end_check(const Trace& trace, const Network& net, double headway,
                                             double tolerance = 1e-3);

/// MZ occupancy reconstructed from sampled positions: a vehicle occupies [first, last + dt) over the
/// samples with s in [p_mz, p_mz + S). One entry per zone, in config order.
std::vector<coord::MzOccupancy> trace_occupancy(const Trace& trace, const Network& net);

}  // namespace cav::sim
