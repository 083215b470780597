#include "cav/sim/network.hpp"

#include <algorithm>
#include <stdexcept>

namespace cav::sim {

Network::Network(const CorridorConfig& cfg)
    : cfg_(&cfg)
{
    for (const RouteSpec& r : cfg.routes) {
        std::vector<RouteZone> zones;
        for (const ConflictZoneSpec& z : cfg.zones) {
            if (const ZoneFeed* f = z.feed(r.id)) zones.push_back({z.z, f->p_entry, f->p_mz, f->p_mz + z.S, f->priority});
        }
        std::sort(zones.begin(), zones.end(), [](const RouteZone& a, const RouteZone& b) { return a.p_entry < b.p_entry; });
        by_route_.emplace_back(r.id, std::move(zones));
    }
}

const std::vector<RouteZone>& Network::zones_on(RouteId route) const
{
    for (const auto& [id, zones] : by_route_) {
        if (id == route) return zones;
    }
    throw std::out_of_range("unknown route");
}

const RouteZone* Network::find(RouteId route, ZoneId z) const
{
    for (const RouteZone& rz : zones_on(route)) {
        if (rz.z == z) return &rz;
    }
    return nullptr;
}

const RouteZone* Network::zone_at(RouteId route, double s) const
{
    for (const RouteZone& rz : zones_on(route)) {
        if (s >= rz.p_entry && s < rz.p_exit) return &rz;
    }
    return nullptr;
}

const RouteZone* Network::next_mz(RouteId route, double s) const
{
    for (const RouteZone& rz : zones_on(route)) {
        if (rz.p_mz > s) return &rz;
    }
    return nullptr;
}

std::vector<RouteId> Network::conflicting_routes(ZoneId z, RouteId route) const
{
    std::vector<RouteId> out;
    const ConflictZoneSpec& zone = cfg_->zone(z);
    for (const ZoneFeed& f : zone.feeds) {
        if (f.route != route && zone.relation(route, f.route) == LaneRelation::ConflictLane) out.push_back(f.route);
    }
    return out;
}

}  // namespace cav::sim
