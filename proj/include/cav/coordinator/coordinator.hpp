#pragma once

#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "cav/core/types.hpp"

namespace cav::coord {

/// Coordinator record for one vehicle in one zone. Times are absolute seconds.
struct ScheduleEntry {
    VehicleId vehicle_id = 0;
    ZoneId zone_z = 0;
    RouteId lane = 0;
    double t0 = 0.0;
    double v0 = 0.0;
    double tm = 0.0;
    double tf = 0.0;
    double v_at_tm = 0.0;
    std::optional<LaneRelation> relation_to_prev;  // empty: first in its chain
    std::optional<VehicleId> prev_id;
    double dist_to_mz = 0.0;
    bool truncated = false;  // the L/v_min ceiling cut the predecessor gap term
};

struct OccupancyInterval {
    VehicleId vehicle_id = 0;
    double t_enter = 0.0;
    double t_exit = 0.0;
    RouteId lane = 0;
};

struct MzOccupancy {
    ZoneId zone_z = 0;
    std::vector<OccupancyInterval> intervals;
};

struct ConflictPair {
    VehicleId first = 0;
    VehicleId second = 0;
    double overlap_begin = 0.0;
    double overlap_end = 0.0;
};

struct MergingTime {
    double tm = 0.0;
    bool truncated = false;
};

class ScheduleError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Upper-level merging time. With a predecessor:
///   tm = t0 + max{ min{ (prev.tm - t0) + gap, L/v_min }, L/v0, L/v_max }
/// where gap = h v0 / prev.v_at_tm (same lane) or S / prev.v_at_tm (conflict lane).
/// Without one: tm = t0 + min{ max{L/v0, L/v_max}, L/v_min }. v_min = 0 removes the ceiling.
MergingTime merging_time(const ScheduleEntry* prev, LaneRelation relation, const ConflictZoneSpec& zone, double t0,
                         double v0, const Bounds& bounds, double headway);

/// Conflict-lane pairs whose merging-zone intervals overlap (touching endpoints do not count).
std::vector<ConflictPair> occupancy_check(const MzOccupancy& occupancy, const ConflictZoneSpec& zone);

/// One zone's FIFO queue. Makes no control decisions: it assigns merging times and records occupancy.
class Coordinator {
  public:
    Coordinator(ConflictZoneSpec zone, Bounds bounds, double headway);

    /// Appends the vehicle and assigns tm. Throws ScheduleError on duplicate registration.
    const ScheduleEntry& register_arrival(VehicleId id, double t0, double v0, RouteId lane);

    /// Moves the newest entry's merging time later (tm may only grow) and fixes its terminal speed.
    const ScheduleEntry& confirm(VehicleId id, double tm, double v_at_tm);

    /// Removes the entry and closes its occupancy at tf. Throws on unknown vehicle or tf < tm.
    void release(VehicleId id, double tf);

    /// Drops an entry whose vehicle abandoned its plan; the occupancy record keeps the planned interval.
    void abandon(VehicleId id);

    void update_distance(VehicleId id, double dist_to_mz);

    const ScheduleEntry* find(VehicleId id) const;
    const std::deque<ScheduleEntry>& queue() const { return queue_; }
    const MzOccupancy& occupancy() const { return occupancy_; }
    const ConflictZoneSpec& zone() const { return zone_; }
    std::size_t truncation_events() const { return truncations_; }

  private:
    const ScheduleEntry* predecessor_for(RouteId lane) const;
    OccupancyInterval* interval_for(VehicleId id);

    ConflictZoneSpec zone_;
    Bounds bounds_;
    double headway_;
    std::deque<ScheduleEntry> queue_;
    // Latest registered entry per lane, kept after release so the recursion never loses its predecessor.
    std::map<RouteId, std::pair<std::size_t, ScheduleEntry>> last_by_lane_;
    std::size_t registrations_ = 0;
    MzOccupancy occupancy_;
    std::map<VehicleId, std::size_t> open_interval_;
    std::size_t truncations_ = 0;
};

}  // namespace cav::coord
