#include "cav/sim/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cav::sim {

namespace {

double idm(double v, double desired, double gap, double dv, const BaselineParams& p)
{
    const double free = desired > 0.0 ? 1.0 - std::pow(v / desired, 4) : -1.0;
    if (!std::isfinite(gap)) return p.max_accel * free;
    const double s_star = p.min_gap + std::max(0.0, v * p.headway + v * dv / (2.0 * std::sqrt(p.max_accel * p.comfort_decel)));
    const double g = std::max(gap, 0.01);
    return p.max_accel * (free - (s_star / g) * (s_star / g));
}

}  // namespace

double baseline_step(const VehicleState& vehicle, const std::optional<VehicleState>& leader, const BaselineParams& params,
                     const ZoneContext& context)
{
    const double v = vehicle.v;
    double u = idm(v, context.desired_speed, std::numeric_limits<double>::infinity(), 0.0, params);
    if (leader) u = std::min(u, idm(v, context.desired_speed, leader->s - vehicle.s, v - leader->v, params));
    if (context.stop_line) {
        // A stopped obstacle one jam gap beyond the line makes the equilibrium stop land on the line.
        const double gap = *context.stop_line + params.min_gap - vehicle.s;
        u = std::min(u, idm(v, context.desired_speed, gap, v, params));
    }
    if (context.next_lower && context.next_lower->limit < v) {
        const double dist = context.next_lower->from - vehicle.s;
        if (dist > 0.0) {
            const double need = (v * v - context.next_lower->limit * context.next_lower->limit) / (2.0 * dist);
            if (need >= 0.5 * params.comfort_decel) u = std::min(u, -need);
        }
    }
    const double floor = -std::max(params.comfort_decel, params.emergency_decel);
    return std::clamp(u, floor, params.max_accel);
}

double free_travel_time(double v, double distance, double desired, const BaselineParams& params)
{
    constexpr double h = 0.05;
    double s = 0.0;
    double t = 0.0;
    while (s < distance && t < 600.0) {
        const double u = std::clamp(idm(v, desired, std::numeric_limits<double>::infinity(), 0.0, params), -params.comfort_decel,
                                    params.max_accel);
        v = std::max(0.0, v + u * h);
        s += v * h;
        t += h;
    }
    return t;
}

}  // namespace cav::sim
