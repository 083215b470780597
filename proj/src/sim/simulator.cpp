#include "cav/sim/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <spdlog/spdlog.h>

#include "cav/sim/baseline.hpp"

namespace cav::sim {

namespace {

constexpr double kYieldRange = 120.0;     // a driver starts judging the gap this far from the MZ
constexpr double kMinRegisterSpeed = 0.5;  // slower CZ entries are left to the baseline model
constexpr double kLineSetback = 1.0;       // yield line sits this far before the MZ entry

}  // namespace

Simulator::Simulator(const CorridorConfig& cfg)
    : cfg_(cfg)
    , net_(cfg_)
    , spawner_(cfg_, cfg_.seed)
{
    validate(cfg_);
    clock_.dt = cfg_.dt;
    steps_ = std::llround(cfg_.horizon / cfg_.dt);
    trace_.dt = cfg_.dt;
    for (const ConflictZoneSpec& z : cfg_.zones) coords_.emplace_back(z, cfg_.bounds, cfg_.headway_h);
    pending_.assign(cfg_.routes.size(), 0);
}

std::vector<std::size_t> Simulator::lane(RouteId route) const
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        if (agents_[i].st.route == route && !agents_[i].exited) out.push_back(i);
    }
    return out;
}

const Simulator::Agent* Simulator::leader_of(const Agent& a) const
{
    const Agent* lead = nullptr;
    for (const Agent& o : agents_) {
        if (&o == &a) break;
        if (o.st.route == a.st.route && !o.exited) lead = &o;
    }
    return lead;
}

std::vector<AgentView> Simulator::agents() const
{
    std::vector<AgentView> out;
    for (const Agent& a : agents_) {
        if (!a.exited) out.push_back({a.st, a.plan.has_value()});
    }
    return out;
}

void Simulator::spawn(double t)
{
    const std::vector<int> arrivals = spawner_.arrivals_until(t);
    const BaselineParams& bp = cfg_.baseline;
    for (std::size_t i = 0; i < cfg_.routes.size(); ++i) {
        pending_[i] += arrivals[i];
        if (pending_[i] == 0) continue;
        const RouteSpec& route = cfg_.routes[i];
        const Agent* last = nullptr;
        for (const Agent& o : agents_) {
            if (o.st.route == route.id && !o.exited) last = &o;
        }
        double v = route.speed_limit_at(0.0);
        if (last) {
            const double gap = last->st.s;
            double need = cfg_.headway_h * v + bp.min_gap + std::max(0.0, v * v - last->st.v * last->st.v) / (2.0 * bp.comfort_decel);
            if (gap < need) {
                v = std::min(v, last->st.v);
                need = cfg_.headway_h * v + bp.min_gap;
                if (gap < need) continue;
            }
        }
        Agent& a = agents_.emplace_back();
        a.st.id = next_id_++;
        a.st.route = route.id;
        a.st.v = v;
        a.spawn_t = t;
        --pending_[i];
        ++counters_.spawned;
    }
}

void Simulator::inject(RouteId route)
{
    for (std::size_t i = 0; i < cfg_.routes.size(); ++i) {
        if (cfg_.routes[i].id == route) {
            ++pending_[i];
            return;
        }
    }
    throw std::invalid_argument("unknown route");
}

bool Simulator::try_plan(Agent& a, const RouteZone& rz, double t)
{
    coord::Coordinator* coord = nullptr;
    for (auto& c : coords_) {
        if (c.zone().z == rz.z) coord = &c;
    }
    const ConflictZoneSpec& zone = coord->zone();
    if (a.st.v < kMinRegisterSpeed) return false;
    const Agent* lead = leader_of(a);
    // Behind an unscheduled vehicle that has not cleared this zone there is no plan to check against.
    if (lead && !lead->plan && lead->st.s < rz.p_exit) return false;

    const std::size_t truncations_before = coord->truncation_events();
    const coord::ScheduleEntry& entry = coord->register_arrival(a.st.id, t, a.st.v, a.st.route);
    counters_.truncations += coord->truncation_events() - truncations_before;
    const bool fixed = zone.terminal == TerminalMode::Fixed;

    double tm = entry.tm;
    for (int k = 0; k <= cfg_.relax_retries; ++k) {
        if (k > 0) {
            tm += cfg_.relax_step;
            ++counters_.relaxations;
        }
        traj::BoundaryConditions bc;
        bc.p0 = a.st.s;
        bc.v0 = a.st.v;
        bc.t0 = t;
        bc.p_mz = rz.p_mz;
        bc.tm = tm;
        if (fixed) bc.terminal_speed = zone.v_mz;
        traj::PlanResult res = traj::plan(bc, cfg_.bounds);
        if (!fixed && res.coeffs && traj::eval(*res.coeffs, tm).v < zone.v_mz) {
            // Free terminal speed below the zone's floor: pin it to the floor instead.
            bc.terminal_speed = zone.v_mz;
            res = traj::plan(bc, cfg_.bounds);
        }
        if (!res.coeffs) continue;
        const double v_mz = bc.terminal_speed ? *bc.terminal_speed : traj::eval(*res.coeffs, tm).v;
        if (v_mz < 0.1) continue;
        const double tf = tm + zone.S / v_mz;
        traj::Motion motion(*res.coeffs, v_mz, tf + 1.0);

        if (lead && lead->plan) {
            const double to = std::min(lead->plan->motion.t_end(), motion.t_end());
            if (to > t) {
                const double now = lead->st.s - a.st.s - cfg_.headway_h * a.st.v;
                const double required = std::min(cfg_.plan_gap_margin, std::max(0.0, now));
                const traj::Clearance c = traj::min_clearance(lead->plan->motion, motion, cfg_.headway_h, t, to);
                if (c.value < required - 1e-9) continue;
            }
        }
        coord->confirm(a.st.id, tm, v_mz);
        a.plan = ActivePlan{rz.z, std::move(motion), tm, tf, v_mz, rz.p_exit};
        ++counters_.plans;
        if (res.pieced) ++counters_.pieced;
        return true;
    }
    coord->abandon(a.st.id);
    return false;
}

void Simulator::register_arrivals(double t)
{
    struct Candidate {
        std::size_t index;
        const RouteZone* rz;
        bool main;
    };
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < agents_.size(); ++i) {
        const Agent& a = agents_[i];
        if (a.exited || a.plan) continue;
        const RouteZone* rz = net_.zone_at(a.st.route, a.st.s);
        if (!rz || a.st.s >= rz->p_mz || a.registered.count(rz->z)) continue;
        cands.push_back({i, rz, cfg_.route(a.st.route).test_route});
    }
    // Simultaneous arrivals: test route first, then lower route id, then lower vehicle id.
    std::sort(cands.begin(), cands.end(), [&](const Candidate& x, const Candidate& y) {
        const Agent& a = agents_[x.index];
        const Agent& b = agents_[y.index];
        if (x.main != y.main) return x.main;
        if (a.st.route != b.st.route) return a.st.route < b.st.route;
        return a.st.id < b.st.id;
    });
    for (const Candidate& c : cands) {
        Agent& a = agents_[c.index];
        a.registered.insert(c.rz->z);
        a.released = false;
        if (!try_plan(a, *c.rz, t)) {
            ++counters_.plan_failures;
            spdlog::debug("t={:.1f} vehicle {} has no feasible plan for zone {}", t, a.st.id, c.rz->z);
        }
    }
}

bool Simulator::yield_accepts(const Agent& a, const RouteZone& rz, double t, bool minor_rule) const
{
    const BaselineParams& bp = cfg_.baseline;
    const ConflictZoneSpec& zone = cfg_.zone(rz.z);
    const double desired = cfg_.route(a.st.route).speed_limit_at(rz.p_mz);
    const double dist = std::max(0.0, rz.p_mz - a.st.s);
    const double arrive = free_travel_time(a.st.v, dist, desired, bp);
    const double clear = free_travel_time(a.st.v, dist + zone.S, desired, bp);

    for (RouteId r : net_.conflicting_routes(rz.z, a.st.route)) {
        const RouteZone* orz = net_.find(r, rz.z);
        const double limit = cfg_.route(r).speed_limit_at(orz->p_mz);
        for (const Agent& o : agents_) {
            if (o.exited || o.st.route != r || o.st.s >= orz->p_exit) continue;
            if (o.plan && o.plan->z == rz.z) {
                // Scheduled crossings never yield: stay out of their MZ window.
                if (o.plan->tm - t < clear + 0.5 && o.plan->tf - t > arrive - 0.5) return false;
                continue;
            }
            // Gone before we get there.
            if ((orz->p_exit - o.st.s) / std::max(o.st.v, 1.0) + 0.5 <= arrive) continue;
            const bool inside = o.st.s >= orz->p_mz;
            if (inside || o.committed.count(rz.z)) return false;
            if (!minor_rule) continue;
            // Critical gap: a major vehicle this far out can still stop comfortably for a committed merge.
            const double eta = (orz->p_mz - o.st.s) / std::max(limit, o.st.v);
            if (eta - arrive < bp.yield_gap) return false;
        }
    }
    return true;
}

void Simulator::decide_yields(double t)
{
    const bool optimal = cfg_.mode == Mode::Optimal;
    for (Agent& a : agents_) {
        a.stop_line.reset();
        if (a.exited || a.plan) continue;
        const RouteZone* rz = net_.next_mz(a.st.route, a.st.s);
        if (!rz) continue;
        const double dist = rz->p_mz - a.st.s;
        if (dist > kYieldRange || a.committed.count(rz->z)) continue;
        if (net_.conflicting_routes(rz->z, a.st.route).empty()) continue;
        // Optimal mode: only vehicles the coordinator could not plan fall back to yielding.
        if (optimal && !a.registered.count(rz->z)) continue;

        const bool minor = rz->priority == Priority::Minor;
        if (!yield_accepts(a, *rz, t, minor)) {
            a.stop_line = rz->p_mz - kLineSetback;
            continue;
        }
        const Agent* lead = leader_of(a);
        const bool first_in_line = !lead || lead->st.s >= rz->p_mz;
        const double stopping = a.st.v * a.st.v / (2.0 * cfg_.baseline.comfort_decel);
        if (first_in_line && stopping >= dist - kLineSetback - 0.5) a.committed.insert(rz->z);
    }
}

void Simulator::step()
{
    const double dt = clock_.dt;
    const double t = clock_.t();
    const double tn = static_cast<double>(clock_.step + 1) * dt;
    std::vector<TraceRecord> rows;

    auto row = [&](const Agent& a, double u) {
        TraceRecord r;
        r.t = quantize(t);
        r.id = a.st.id;
        r.route = a.st.route;
        r.s = quantize(a.st.s);
        r.v = quantize(a.st.v);
        r.u = quantize(u);
        const RouteZone* here = net_.zone_at(a.st.route, a.st.s);
        r.zone = here ? here->z : 0;
        double dist = 0.0;
        if (const RouteZone* next = net_.next_mz(a.st.route, a.st.s)) {
            if (!(here && a.st.s >= here->p_mz)) dist = next->p_mz - a.st.s;
        }
        r.dist_to_mz = quantize_dm(dist);
        r.tm_ms = a.plan ? std::llround(a.plan->tm * 1000.0) : -1;
        rows.push_back(r);
    };

    for (const Agent& a : agents_) {
        if (a.exited) row(a, 0.0);
    }
    agents_.erase(std::remove_if(agents_.begin(), agents_.end(), [](const Agent& a) { return a.exited; }), agents_.end());

    spawn(t);
    if (cfg_.mode == Mode::Optimal) register_arrivals(t);
    decide_yields(t);

    const BaselineParams& bp = cfg_.baseline;
    const double h = cfg_.headway_h;
    std::vector<double> v_next(agents_.size()), s_next(agents_.size()), u_now(agents_.size());
    for (const RouteSpec& route : cfg_.routes) {
        std::optional<std::size_t> lead;
        for (std::size_t i : lane(route.id)) {
            Agent& a = agents_[i];
            double v;
            if (a.plan) {
                const traj::Motion& m = a.plan->motion;
                const double target = tn <= m.t_end() ? m.at(tn).p : m.at(m.t_end()).p + a.plan->v_mz * (tn - m.t_end());
                v = (target - a.st.s) / dt;
                if (v > cfg_.bounds.v_max + 1e-6 || v < cfg_.bounds.v_min - 1e-6) ++counters_.speed_violations;
            } else {
                ZoneContext ctx;
                ctx.desired_speed = route.speed_limit_at(a.st.s);
                ctx.next_lower = route.next_lower_limit(a.st.s);
                ctx.stop_line = a.stop_line;
                std::optional<VehicleState> leader;
                if (lead) {
                    const VehicleState& l = agents_[*lead].st;
                    // A vehicle released from a merging zone sits exactly h v behind its scheduled leader.
                    // The car-following jam gap would brake it anyway and push a wave back into the zone.
                    const bool scheduled_spacing =
                        a.released && l.s - a.st.s >= h * a.st.v - 1e-6 && l.v >= a.st.v - 1e-6;
                    if (!scheduled_spacing) leader = l;
                }
                const double u = baseline_step(a.st, leader, bp, ctx);
                v = std::max(0.0, a.st.v + u * dt);
            }
            if (lead) {
                // Spacing filter: keep s_leader - s >= h v after the update.
                const double cap = (s_next[*lead] - a.st.s) / (h + dt);
                if (v > cap + 1e-9) {
                    if (a.plan) {
                        ++counters_.plan_overrides;
                        spdlog::debug("t={:.1f} vehicle {} drops its plan: spacing filter bound", t, a.st.id);
                        const RouteZone* rz = net_.find(a.st.route, a.plan->z);
                        if (a.st.s >= rz->p_mz) {
                            // Already crossing: the occupancy record must end at the real exit.
                            a.crossing = Crossing{rz->z, rz->p_exit, a.plan->tm};
                        } else {
                            for (auto& c : coords_) {
                                if (c.zone().z == a.plan->z) c.abandon(a.st.id);
                            }
                        }
                        a.plan.reset();
                    }
                    v = std::max({cap, a.st.v - bp.emergency_decel * dt, 0.0});
                }
            }
            v_next[i] = v;
            s_next[i] = a.st.s + v * dt;
            u_now[i] = (v - a.st.v) / dt;
            lead = i;
        }
    }

    for (std::size_t i = 0; i < agents_.size(); ++i) row(agents_[i], u_now[i]);
    std::sort(rows.begin(), rows.end(), [](const TraceRecord& a, const TraceRecord& b) { return a.id < b.id; });
    trace_.records.insert(trace_.records.end(), rows.begin(), rows.end());

    for (std::size_t i = 0; i < agents_.size(); ++i) {
        Agent& a = agents_[i];
        a.st.dist_traveled += s_next[i] - a.st.s;
        a.st.v = v_next[i];
        a.st.s = s_next[i];
        a.st.u = u_now[i];
        const RouteZone* here = net_.zone_at(a.st.route, a.st.s);
        a.st.zone = here ? std::optional<ZoneId>(here->z) : std::nullopt;
        if (a.plan && a.st.s >= a.plan->p_exit) {
            const double tf = a.st.v > 0.0 ? tn - (a.st.s - a.plan->p_exit) / a.st.v : tn;
            for (auto& c : coords_) {
                if (c.zone().z == a.plan->z) c.release(a.st.id, std::max(tf, a.plan->tm));
            }
            a.plan.reset();
            a.released = true;
        }
        if (a.crossing && a.st.s >= a.crossing->p_exit) {
            const double tf = a.st.v > 0.0 ? tn - (a.st.s - a.crossing->p_exit) / a.st.v : tn;
            for (auto& c : coords_) {
                if (c.zone().z == a.crossing->z) c.release(a.st.id, std::max(tf, a.crossing->tm));
            }
            a.crossing.reset();
        }
        if (a.st.s >= cfg_.route(a.st.route).length) {
            a.exited = true;
            ++counters_.exited;
        }
    }
    ++clock_.step;
}

RunResult Simulator::finish()
{
    while (!finished()) step();
    const double t = quantize(clock_.t());
    std::vector<TraceRecord> rows;
    for (const Agent& a : agents_) {
        if (!a.exited) continue;
        TraceRecord r;
        r.t = t;
        r.id = a.st.id;
        r.route = a.st.route;
        r.s = quantize(a.st.s);
        r.v = quantize(a.st.v);
        rows.push_back(r);
    }
    std::sort(rows.begin(), rows.end(), [](const TraceRecord& a, const TraceRecord& b) { return a.id < b.id; });
    trace_.records.insert(trace_.records.end(), rows.begin(), rows.end());

    RunResult out;
    counters_.in_network = static_cast<std::size_t>(
        std::count_if(agents_.begin(), agents_.end(), [](const Agent& a) { return !a.exited; }));
    for (int p : pending_) counters_.withheld += static_cast<std::size_t>(p);
    out.counters = counters_;
    for (const auto& c : coords_) out.occupancy.push_back(c.occupancy());
    out.trace = std::move(trace_);
    return out;
}

RunResult run(const CorridorConfig& cfg)
{
    Simulator sim(cfg);
    return sim.finish();
}

}  // namespace cav::sim
