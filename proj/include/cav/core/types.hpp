#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cav {

using VehicleId = std::uint32_t;
using RouteId = int;
using ZoneId = int;

/// Admissible control and speed range. Invariant: u_min < 0 < u_max, 0 <= v_min < v_max.
struct Bounds {
    double u_min = -3.0;
    double u_max = 1.5;
    double v_min = 0.0;
    double v_max = 17.8816;

    bool operator==(const Bounds&) const = default;
};

enum class ZoneKind { Merge, SpeedReduction, Roundabout };
enum class LaneRelation { SameLane, ConflictLane, Parallel };
enum class Priority { Major, Minor };
enum class TerminalMode { Free, Fixed };
enum class Mode { Baseline, Optimal };

std::string_view to_string(ZoneKind k);
std::string_view to_string(LaneRelation r);
std::string_view to_string(Priority p);
std::string_view to_string(TerminalMode m);
std::string_view to_string(Mode m);

/// One route feeding a conflict zone. Positions are arc lengths along that route.
struct ZoneFeed {
    RouteId route = 0;
    double p_entry = 0.0;  // CZ start
    double p_mz = 0.0;     // MZ entry; p_mz - p_entry == L
    Priority priority = Priority::Major;

    bool operator==(const ZoneFeed&) const = default;
};

struct RelationPair {
    RouteId a = 0;
    RouteId b = 0;
    LaneRelation relation = LaneRelation::ConflictLane;

    bool operator==(const RelationPair&) const = default;
};

struct ConflictZoneSpec {
    ZoneId z = 1;
    ZoneKind kind = ZoneKind::Merge;
    double L = 100.0;  // control zone length
    double S = 30.0;   // merging zone length
    double v_mz = 0.0;
    double speed_limit = 0.0;
    TerminalMode terminal = TerminalMode::Fixed;
    std::vector<ZoneFeed> feeds;
    std::vector<RelationPair> relations;  // cross-route pairs; unlisted pairs are conflict lanes

    const ZoneFeed* feed(RouteId route) const;
    /// Same route is always same-lane.
    LaneRelation relation(RouteId a, RouteId b) const;

    bool operator==(const ConflictZoneSpec&) const = default;
};

struct SpeedSegment {
    double from = 0.0;
    double limit = 0.0;

    bool operator==(const SpeedSegment&) const = default;
};

struct RouteSpec {
    RouteId id = 0;
    std::string name;
    double length = 0.0;
    double flow = 0.0;  // vehicles per second per lane
    bool test_route = false;
    std::vector<SpeedSegment> limits;  // sorted by `from`, first at 0

    double speed_limit_at(double s) const;
    /// Start of the next segment with a lower limit than at `s`, if any.
    std::optional<SpeedSegment> next_lower_limit(double s) const;

    bool operator==(const RouteSpec&) const = default;
};

/// Stand-in car-following/yield model parameters.
struct BaselineParams {
    double max_accel = 1.5;
    double comfort_decel = 3.0;
    double emergency_decel = 8.0;
    double min_gap = 2.0;
    double headway = 1.2;
    double yield_gap = 4.0;

    bool operator==(const BaselineParams&) const = default;
};

struct VehicleState {
    VehicleId id = 0;
    RouteId route = 0;
    double s = 0.0;
    double v = 0.0;
    double u = 0.0;
    std::optional<ZoneId> zone;
    double dist_traveled = 0.0;
};

}  // namespace cav
