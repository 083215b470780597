#include "cav/coordinator/coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace cav::coord {

MergingTime merging_time(const ScheduleEntry* prev, LaneRelation relation, const ConflictZoneSpec& zone, double t0,
                         double v0, const Bounds& bounds, double headway)
{
    if (!(v0 > 0.0)) throw std::invalid_argument("merging_time requires a positive entry speed");
    const double own = zone.L / v0;
    const double floor = zone.L / bounds.v_max;
    const double ceiling =
        bounds.v_min > 0.0 ? zone.L / bounds.v_min : std::numeric_limits<double>::infinity();

    MergingTime out;
    if (prev == nullptr || relation == LaneRelation::Parallel) {
        out.tm = t0 + std::min(std::max(own, floor), ceiling);
        return out;
    }
    const double gap =
        relation == LaneRelation::SameLane ? headway * v0 / prev->v_at_tm : zone.S / prev->v_at_tm;
    const double follow = (prev->tm - t0) + gap;
    out.truncated = follow > ceiling;
    out.tm = t0 + std::max({std::min(follow, ceiling), own, floor});
    return out;
}

std::vector<ConflictPair> occupancy_check(const MzOccupancy& occupancy, const ConflictZoneSpec& zone)
{
    constexpr double eps = 1e-9;
    std::vector<ConflictPair> out;
    const auto& iv = occupancy.intervals;
    for (std::size_t i = 0; i < iv.size(); ++i) {
        for (std::size_t j = i + 1; j < iv.size(); ++j) {
            if (zone.relation(iv[i].lane, iv[j].lane) != LaneRelation::ConflictLane) continue;
            const double lo = std::max(iv[i].t_enter, iv[j].t_enter);
            const double hi = std::min(iv[i].t_exit, iv[j].t_exit);
            if (lo < hi - eps) out.push_back({iv[i].vehicle_id, iv[j].vehicle_id, lo, hi});
        }
    }
    return out;
}

Coordinator::Coordinator(ConflictZoneSpec zone, Bounds bounds, double headway)
    : zone_(std::move(zone))
    , bounds_(bounds)
    , headway_(headway)
{
    occupancy_.zone_z = zone_.z;
}

const ScheduleEntry* Coordinator::predecessor_for(RouteId lane) const
{
    const ScheduleEntry* best = nullptr;
    std::size_t best_order = 0;
    for (const auto& [other_lane, rec] : last_by_lane_) {
        if (zone_.relation(lane, other_lane) == LaneRelation::Parallel) continue;
        if (best == nullptr || rec.first > best_order) {
            best = &rec.second;
            best_order = rec.first;
        }
    }
    return best;
}

OccupancyInterval* Coordinator::interval_for(VehicleId id)
{
    auto it = open_interval_.find(id);
    return it == open_interval_.end() ? nullptr : &occupancy_.intervals[it->second];
}

const ScheduleEntry& Coordinator::register_arrival(VehicleId id, double t0, double v0, RouteId lane)
{
    if (find(id) != nullptr) {
        throw ScheduleError(fmt::format("vehicle {} already queued in zone {}", id, zone_.z));
    }
    const ScheduleEntry* prev = predecessor_for(lane);
    const LaneRelation rel = prev ? zone_.relation(lane, prev->lane) : LaneRelation::SameLane;
    const MergingTime mt = merging_time(prev, rel, zone_, t0, v0, bounds_, headway_);
    if (mt.truncated) {
        ++truncations_;
        spdlog::warn("zone {}: L/v_min ceiling truncated the gap term for vehicle {}", zone_.z, id);
    }

    ScheduleEntry e;
    e.vehicle_id = id;
    e.zone_z = zone_.z;
    e.lane = lane;
    e.t0 = t0;
    e.v0 = v0;
    e.tm = mt.tm;
    // Free terminal speed is unknown until the trajectory is solved; confirm() replaces this.
    e.v_at_tm = zone_.terminal == TerminalMode::Fixed ? zone_.v_mz : std::max(v0, 1e-3);
    e.tf = e.tm + zone_.S / e.v_at_tm;
    if (prev) {
        e.relation_to_prev = rel;
        e.prev_id = prev->vehicle_id;
    }
    e.dist_to_mz = zone_.L;
    e.truncated = mt.truncated;

    queue_.push_back(e);
    last_by_lane_[lane] = {++registrations_, e};
    occupancy_.intervals.push_back({id, e.tm, e.tf, lane});
    open_interval_[id] = occupancy_.intervals.size() - 1;
    return queue_.back();
}

const ScheduleEntry& Coordinator::confirm(VehicleId id, double tm, double v_at_tm)
{
    if (queue_.empty() || queue_.back().vehicle_id != id) {
        throw ScheduleError(fmt::format("vehicle {} is not the newest entry of zone {}", id, zone_.z));
    }
    ScheduleEntry& e = queue_.back();
    if (tm < e.tm - 1e-12) throw ScheduleError("merging time may only move later");
    if (!(v_at_tm > 0.0)) throw ScheduleError("merging-zone speed must be positive");
    e.tm = tm;
    e.v_at_tm = v_at_tm;
    e.tf = tm + zone_.S / v_at_tm;
    last_by_lane_[e.lane].second = e;
    if (OccupancyInterval* iv = interval_for(id)) {
        iv->t_enter = e.tm;
        iv->t_exit = e.tf;
    }
    return e;
}

void Coordinator::release(VehicleId id, double tf)
{
    auto it = std::find_if(queue_.begin(), queue_.end(), [&](const ScheduleEntry& e) { return e.vehicle_id == id; });
    if (it == queue_.end()) throw ScheduleError(fmt::format("vehicle {} unknown to zone {}", id, zone_.z));
    if (tf < it->tm - 1e-9) {
        throw ScheduleError(fmt::format("vehicle {} cannot exit zone {} at {} before entering at {}", id, zone_.z, tf,
                                        it->tm));
    }
    if (OccupancyInterval* iv = interval_for(id)) iv->t_exit = tf;
    open_interval_.erase(id);
    queue_.erase(it);
}

void Coordinator::abandon(VehicleId id)
{
    auto it = std::find_if(queue_.begin(), queue_.end(), [&](const ScheduleEntry& e) { return e.vehicle_id == id; });
    if (it == queue_.end()) return;
    open_interval_.erase(id);
    queue_.erase(it);
}

void Coordinator::update_distance(VehicleId id, double dist_to_mz)
{
    for (auto& e : queue_) {
        if (e.vehicle_id == id) e.dist_to_mz = dist_to_mz;
    }
}

const ScheduleEntry* Coordinator::find(VehicleId id) const
{
    for (const auto& e : queue_) {
        if (e.vehicle_id == id) return &e;
    }
    return nullptr;
}

}  // namespace cav::coord
