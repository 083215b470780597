#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "cav/core/config.hpp"
#include "cav/sim/trace.hpp"
#include "cav/trajectory/motion.hpp"
#include "cav/v2x/bsm.hpp"

namespace cav::v2x {

/// Hard-coded corridor geometry as the ego vehicle sees it. Positions are along the ego route.
struct ZoneEntry {
    ZoneId z = 0;
    double p_entry = 0.0;
    double p_mz = 0.0;
    double S = 0.0;
    double v_mz = 0.0;
    TerminalMode terminal = TerminalMode::Fixed;
    std::map<RouteId, LaneRelation> lanes;  // relation of each feeding route to the ego route

    bool operator==(const ZoneEntry&) const = default;
};

struct ZoneTable {
    RouteId ego_route = 0;
    double length = 0.0;
    double v0 = 0.0;  // ego speed at the first tick
    Bounds bounds;
    double headway = 1.2;
    double relax_step = 0.1;
    int relax_retries = 50;
    std::vector<SpeedSegment> limits;
    std::vector<ZoneEntry> zones;

    double speed_limit_at(double s) const;
    bool operator==(const ZoneTable&) const = default;
};

ZoneTable zone_table_from_config(const CorridorConfig& cfg, RouteId route);
std::string serialize_zone_table(const ZoneTable& table);
/// Throws ConfigError on a malformed document.
ZoneTable load_zone_table(const std::string& text);
ZoneTable load_zone_table_file(const std::string& path);

/// What one received message says about one virtual vehicle.
struct Neighbor {
    VehicleId id = 0;
    RouteId route = 0;
    int zone = 0;
    std::int64_t dist_dm = 0;
    std::int64_t tm_ms = -1;
    std::int64_t ts_ms = 0;
};

Neighbor neighbor_from(const BsmFrame& f);
Neighbor neighbor_from(const sim::TraceRecord& r);

struct SpeedCommand {
    std::int64_t t_ms = 0;
    double dist = 0.0;  // ego distance travelled
    int zone = 0;
    double v = 0.0;
    bool stale = false;
    std::optional<VehicleId> leader;
    std::int64_t tm_ms = -1;  // ego merging time in the current zone

    bool operator==(const SpeedCommand&) const = default;
};

/// The ego control law, fed one tick at a time with the latest message per vehicle.
class EgoController {
  public:
    explicit EgoController(ZoneTable table, std::int64_t tick_ms = 10, std::int64_t stale_ms = 1000);

    /// `last_heard_ms` is when the newest message became available, empty if none yet.
    SpeedCommand tick(std::int64_t t_ms, const std::map<VehicleId, Neighbor>& latest,
                      std::optional<std::int64_t> last_heard_ms);

    std::size_t plans() const { return plans_; }
    std::size_t plan_failures() const { return failures_; }
    const ZoneTable& table() const { return table_; }

  private:
    struct Plan {
        ZoneId z = 0;
        traj::Motion motion;
        double tm = 0.0;
        double v_mz = 0.0;
    };

    std::optional<Plan> make_plan(const ZoneEntry& zone, double t, const Neighbor* leader) const;
    const Neighbor* pick_leader(const ZoneEntry& zone, double dist_to_mz, std::int64_t t_ms,
                                const std::map<VehicleId, Neighbor>& latest) const;

    ZoneTable table_;
    std::int64_t tick_ms_;
    std::int64_t stale_ms_;
    bool started_ = false;
    double dist_ = 0.0;
    double v_ = 0.0;
    std::optional<Plan> plan_;
    std::map<ZoneId, bool> attempted_;
    std::optional<VehicleId> planned_leader_;
    std::size_t plans_ = 0;
    std::size_t failures_ = 0;
};

/// Optional impairment applied at the receiver: fixed delay and independent drops.
struct LinkModel {
    std::int64_t delay_ms = 0;
    double drop = 0.0;
    std::uint64_t seed = 1;
};

struct HeadUnitStats {
    std::size_t frames = 0;
    std::size_t decode_errors = 0;
    std::size_t spat = 0;
    std::size_t link_drops = 0;
    std::size_t stale_ticks = 0;
    std::size_t plans = 0;
    std::size_t plan_failures = 0;
};

/// Timestamp-driven head unit. Ticks run on the message clock at 100 Hz from the first message, so
/// its output does not depend on wall-clock jitter. Tick T runs once a message stamped after T has
/// arrived (a single publisher delivers in order) or on finish().
class HeadUnit {
  public:
    explicit HeadUnit(ZoneTable table, LinkModel link = {}, std::int64_t tick_ms = 10);

    void on_bytes(std::span<const std::uint8_t> bytes);
    void on_frame(const BsmFrame& frame);
    /// Runs the remaining ticks up to the newest timestamp.
    void finish();

    const std::vector<SpeedCommand>& commands() const { return commands_; }
    HeadUnitStats stats() const;

  private:
    void run_ticks_before(std::int64_t ts_ms, bool inclusive);

    EgoController ego_;
    LinkModel link_;
    std::mt19937_64 rng_;
    std::int64_t tick_ms_;
    std::optional<std::int64_t> next_tick_;
    std::int64_t newest_ts_ = 0;
    std::vector<Neighbor> inbox_;  // not yet visible, in arrival order
    std::map<VehicleId, Neighbor> latest_;
    std::optional<std::int64_t> last_heard_;
    std::vector<SpeedCommand> commands_;
    HeadUnitStats stats_;
};

/// Subscribes to every BSM topic and drives a HeadUnit until replay/eof or disconnect.
/// `on_ready` runs once the subscriptions are active.
HeadUnit run_headunit(const std::string& host, std::uint16_t port, const ZoneTable& table, LinkModel link = {},
                      const std::function<void()>& on_ready = {});

/// The same controller fed straight from trace records, with no encoding or transport.
std::vector<SpeedCommand> reference_commands(const sim::Trace& trace, const ZoneTable& table,
                                             std::int64_t tick_ms = 10);

struct Equivalence {
    std::size_t compared = 0;
    std::size_t missing = 0;  // commands present on only one side
    double max_dv = 0.0;
};

Equivalence compare_commands(const std::vector<SpeedCommand>& a, const std::vector<SpeedCommand>& b);

void write_commands(std::ostream& out, const std::vector<SpeedCommand>& cmds);

}  // namespace cav::v2x
