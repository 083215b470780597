#include "cav/sim/checks.hpp"

#include <algorithm>
#include <map>

namespace cav::sim {

namespace {

// Index ranges of records sharing one timestamp, assuming the trace is grouped by time.
template <class F>
void for_each_instant(const Trace& trace, F&& f)
{
    const auto& r = trace.records;
    std::size_t i = 0;
    while (i < r.size()) {
        std::size_t j = i;
        while (j < r.size() && r[j].t == r[i].t) ++j;
        f(i, j);
        i = j;
    }
}

}  // namespace

std::vector<RearEndViolation> rear_end_check(const Trace& trace, const Network& net, double headway, double tolerance)
{
    std::vector<RearEndViolation> out;
    const CorridorConfig& cfg = net.config();
    std::vector<const TraceRecord*> lane;

    auto scan = [&](double t) {
        std::sort(lane.begin(), lane.end(), [](const TraceRecord* a, const TraceRecord* b) { return a->s > b->s; });
        for (std::size_t k = 1; k < lane.size(); ++k) {
            const double gap = lane[k - 1]->s - lane[k]->s;
            const double req = headway * lane[k]->v;
            if (gap < req - tolerance) out.push_back({t, lane[k]->id, lane[k - 1]->id, gap, req});
        }
    };

    for_each_instant(trace, [&](std::size_t i, std::size_t j) {
        const double t = trace.records[i].t;
        for (const RouteSpec& route : cfg.routes) {
            lane.clear();
            for (std::size_t k = i; k < j; ++k) {
                if (trace.records[k].route == route.id) lane.push_back(&trace.records[k]);
            }
            scan(t);
        }
        // Conflict lanes meet inside the MZ: compare positions measured from the MZ entry.
        for (const ConflictZoneSpec& zone : cfg.zones) {
            std::vector<TraceRecord> inside;
            for (std::size_t k = i; k < j; ++k) {
                const TraceRecord& rec = trace.records[k];
                const RouteZone* rz = net.find(rec.route, zone.z);
                if (rz && rec.s >= rz->p_mz && rec.s < rz->p_exit) {
                    TraceRecord m = rec;
                    m.s = rec.s - rz->p_mz;
                    inside.push_back(m);
                }
            }
            for (std::size_t a = 0; a < inside.size(); ++a) {
                for (std::size_t b = 0; b < inside.size(); ++b) {
                    if (a == b || inside[a].route == inside[b].route) continue;
                    if (zone.relation(inside[a].route, inside[b].route) != LaneRelation::ConflictLane) continue;
                    const TraceRecord& lead = inside[a];
                    const TraceRecord& fol = inside[b];
                    if (lead.s < fol.s || (lead.s == fol.s && lead.id > fol.id)) continue;
                    const double gap = lead.s - fol.s;
                    const double req = headway * fol.v;
                    if (gap < req - tolerance) out.push_back({t, fol.id, lead.id, gap, req});
                }
            }
        }
    });
    return out;
}

std::vector<coord::MzOccupancy> trace_occupancy(const Trace& trace, const Network& net)
{
    const CorridorConfig& cfg = net.config();
    std::vector<coord::MzOccupancy> out;
    for (const ConflictZoneSpec& zone : cfg.zones) {
        coord::MzOccupancy occ;
        occ.zone_z = zone.z;
        // (vehicle) -> interval; a vehicle visits each zone at most once.
        std::map<VehicleId, coord::OccupancyInterval> seen;
        for (const TraceRecord& rec : trace.records) {
            const RouteZone* rz = net.find(rec.route, zone.z);
            if (!rz || rec.s < rz->p_mz || rec.s >= rz->p_exit) continue;
            auto [it, fresh] = seen.try_emplace(rec.id, coord::OccupancyInterval{rec.id, rec.t, rec.t + trace.dt, rec.route});
            if (!fresh) {
                it->second.t_enter = std::min(it->second.t_enter, rec.t);
                it->second.t_exit = std::max(it->second.t_exit, rec.t + trace.dt);
            }
        }
        for (const auto& [id, iv] : seen) occ.intervals.push_back(iv);
        std::sort(occ.intervals.begin(), occ.intervals.end(),
                  [](const auto& a, const auto& b) { return a.t_enter < b.t_enter || (a.t_enter == b.t_enter && a.vehicle_id < b.vehicle_id); });
        out.push_back(std::move(occ));
    }
    return out;
}

}  // namespace cav::sim
