#include "cav/sim/metrics.hpp"

#include <algorithm>

namespace cav::sim {

Metrics compute_metrics(const Trace& trace, const CorridorConfig& cfg)
{
    std::map<VehicleId, std::vector<const TraceRecord*>> by_vehicle;
    for (const TraceRecord& r : trace.records) by_vehicle[r.id].push_back(&r);

    Metrics m;
    std::map<ZoneId, std::pair<double, std::size_t>> zone_sum;
    double corridor_sum = 0.0;
    for (auto& [id, recs] : by_vehicle) {
        std::stable_sort(recs.begin(), recs.end(), [](const TraceRecord* a, const TraceRecord* b) { return a->t < b->t; });
        const RouteSpec& route = cfg.route(recs.front()->route);
        VehicleMetrics vm;
        vm.id = id;
        vm.route = route.id;
        vm.completed = recs.back()->s >= route.length;
        vm.corridor_time = recs.back()->t - recs.front()->t;

        bool stopped = recs.front()->v < 0.1;
        int open_zone = 0;
        double zone_start = 0.0;
        for (const TraceRecord* r : recs) {
            vm.effort += r->u * r->u * trace.dt;
            vm.work += std::max(0.0, r->u * r->v) * trace.dt;
            const bool below = r->v < 0.1;
            if (below && !stopped) ++vm.stops;
            stopped = below;
            if (r->zone != open_zone) {
                if (open_zone != 0) vm.zone_time[open_zone] = r->t - zone_start;
                open_zone = r->zone;
                zone_start = r->t;
            }
        }
        m.vehicles.push_back(vm);
        if (!vm.completed) continue;
        ++m.completed;
        m.mean_effort += vm.effort;
        m.mean_work += vm.work;
        m.mean_stops += vm.stops;
        if (route.test_route) {
            ++m.test_route_completed;
            corridor_sum += vm.corridor_time;
            for (const auto& [z, dt] : vm.zone_time) {
                zone_sum[z].first += dt;
                ++zone_sum[z].second;
            }
        }
    }
    if (m.completed > 0) {
        m.mean_effort /= static_cast<double>(m.completed);
        m.mean_work /= static_cast<double>(m.completed);
        m.mean_stops /= static_cast<double>(m.completed);
    }
    if (m.test_route_completed > 0) m.mean_corridor_time = corridor_sum / static_cast<double>(m.test_route_completed);
    for (const auto& [z, acc] : zone_sum) m.mean_zone_time[z] = acc.first / static_cast<double>(acc.second);
    return m;
}

}  // namespace cav::sim
