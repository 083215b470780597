#pragma once

#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <set>
#include <vector>

#include "cav/coordinator/coordinator.hpp"
#include "cav/core/config.hpp"
#include "cav/sim/network.hpp"
#include "cav/sim/spawner.hpp"
#include "cav/sim/trace.hpp"
#include "cav/trajectory/motion.hpp"

namespace cav::sim {

/// t = step * dt, always derived from the integer step.
struct SimClock {
    std::int64_t step = 0;
    double dt = 0.1;
    double t() const { return static_cast<double>(step) * dt; }
};

struct RunCounters {
    std::size_t spawned = 0;
    std::size_t exited = 0;
    std::size_t in_network = 0;
    std::size_t withheld = 0;        // arrivals still waiting at a blocked route entry
    std::size_t plans = 0;
    std::size_t pieced = 0;          // plans that needed a speed-constraint arc
    std::size_t relaxations = 0;     // tm deferrals
    std::size_t plan_failures = 0;   // vehicles left to the baseline model inside a CZ
    std::size_t plan_overrides = 0;  // plans abandoned because the spacing filter bound
    std::size_t truncations = 0;     // L/v_min ceiling cut a gap term
    std::size_t speed_violations = 0;
};

struct RunResult {
    Trace trace;
    std::vector<coord::MzOccupancy> occupancy;  // coordinator records (optimal mode)
    RunCounters counters;
};

/// Snapshot of one vehicle after a step, for invariant checks.
struct AgentView {
    VehicleState state;
    bool planned = false;
};

class Simulator {
  public:
    explicit Simulator(const CorridorConfig& cfg);

    void step();
    /// Queues one extra arrival on `route`; it enters at the next step under the usual spawn rule.
    void inject(RouteId route);
    bool finished() const { return clock_.step >= steps_; }
    const SimClock& clock() const { return clock_; }
    std::vector<AgentView> agents() const;
    RunResult finish();

  private:
    struct ActivePlan {
        ZoneId z = 0;
        traj::Motion motion;
        double tm = 0.0;
        double tf = 0.0;
        double v_mz = 0.0;
        double p_exit = 0.0;
    };
    struct Crossing {
        ZoneId z = 0;
        double p_exit = 0.0;
        double tm = 0.0;
    };
    struct Agent {
        VehicleState st;
        double spawn_t = 0.0;
        std::optional<ActivePlan> plan;
        std::set<ZoneId> registered;
        std::set<ZoneId> committed;
        std::optional<double> stop_line;
        std::optional<Crossing> crossing;  // plan dropped inside the MZ, exit still to be recorded
        bool released = false;  // left a merging zone under a plan, not yet registered elsewhere
        bool exited = false;
    };

    void spawn(double t);
    void register_arrivals(double t);
    bool try_plan(Agent& a, const RouteZone& rz, double t);
    void decide_yields(double t);
    bool yield_accepts(const Agent& a, const RouteZone& rz, double t, bool minor_rule) const;
    const Agent* leader_of(const Agent& a) const;
    std::vector<std::size_t> lane(RouteId route) const;
    void record(double t, const std::vector<double>& u);
    bool is_planned(const Agent& a) const { return a.plan.has_value(); }

    CorridorConfig cfg_;
    Network net_;
    Spawner spawner_;
    SimClock clock_;
    std::int64_t steps_ = 0;
    std::vector<coord::Coordinator> coords_;
    std::vector<Agent> agents_;  // spawn order; on each route, spawn order is downstream-first
    std::vector<int> pending_;
    VehicleId next_id_ = 1;
    Trace trace_;
    RunCounters counters_;
};

/// Runs cfg.mode with cfg.seed to the horizon.
RunResult run(const CorridorConfig& cfg);

}  // namespace cav::sim
