#pragma once

#include <vector>

#include "cav/core/config.hpp"

namespace cav::sim {

/// One conflict zone as seen from a particular route.
struct RouteZone {
    ZoneId z = 0;
    double p_entry = 0.0;
    double p_mz = 0.0;
    double p_exit = 0.0;  // p_mz + S
    Priority priority = Priority::Major;
};

/// Per-route zone lookup over a validated corridor.
class Network {
  public:
    explicit Network(const CorridorConfig& cfg);

    const CorridorConfig& config() const { return *cfg_; }
    const std::vector<RouteZone>& zones_on(RouteId route) const;
    const RouteZone* find(RouteId route, ZoneId z) const;
    /// Zone whose CZ or MZ contains s, i.e. s in [p_entry, p_exit).
    const RouteZone* zone_at(RouteId route, double s) const;
    /// First zone on the route whose MZ entry is still ahead of s.
    const RouteZone* next_mz(RouteId route, double s) const;
    /// Routes with a conflict-lane relation to `route` in zone z.
    std::vector<RouteId> conflicting_routes(ZoneId z, RouteId route) const;

  private:
    const CorridorConfig* cfg_;
    std::vector<std::pair<RouteId, std::vector<RouteZone>>> by_route_;
};

}  // namespace cav::sim
