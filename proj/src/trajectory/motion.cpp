#include "cav/trajectory/motion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cav::traj {

Motion::Motion(const TrajectoryCoefficients& plan, double hold_speed, double hold_until)
    : arcs_(plan.arcs)
{
    if (hold_until > plan.tm) {
        const Sample end = eval(plan, plan.tm);
        Arc hold;
        hold.kind = ArcKind::Unconstrained;
        hold.t_begin = plan.tm;
        hold.t_end = hold_until;
        hold.c = hold_speed;
        hold.d = end.p;
        arcs_.push_back(hold);
    }
}

Sample Motion::at(double t) const
{
    t = std::clamp(t, t_begin(), t_end());
    const Arc* arc = &arcs_.back();
    for (const Arc& a : arcs_) {
        if (t <= a.t_end) {
            arc = &a;
            break;
        }
    }
    const double tau = t - arc->t_begin;
    return {arc->a * tau + arc->b, 0.5 * arc->a * tau * tau + arc->b * tau + arc->c,
            arc->a * tau * tau * tau / 6.0 + 0.5 * arc->b * tau * tau + arc->c * tau + arc->d};
}

namespace {

// Absolute-time cubic coefficients c0 + c1 x + c2 x^2 + c3 x^3 with x = t - origin.
struct Cubic {
    double c0, c1, c2, c3;
    double operator()(double x) const { return ((c3 * x + c2) * x + c1) * x + c0; }
};

// Position of `arc` as a cubic in x = t - origin.
Cubic position(const Arc& arc, double origin)
{
    const double s = origin - arc.t_begin;  // tau = x + s
    // p = a tau^3/6 + b tau^2/2 + c tau + d
    const double a = arc.a / 6.0, b = arc.b / 2.0, c = arc.c, d = arc.d;
    return {a * s * s * s + b * s * s + c * s + d, 3 * a * s * s + 2 * b * s + c, 3 * a * s + b, a};
}

Cubic speed(const Arc& arc, double origin)
{
    const double s = origin - arc.t_begin;
    const double a = arc.a / 2.0, b = arc.b, c = arc.c;
    return {a * s * s + b * s + c, 2 * a * s + b, a, 0.0};
}

std::vector<double> breakpoints(const Motion& m, double from, double to)
{
    std::vector<double> out;
    for (const Arc& a : m.arcs()) {
        if (a.t_end > from && a.t_end < to) out.push_back(a.t_end);
    }
    return out;
}

const Arc& arc_at(const Motion& m, double t)
{
    for (const Arc& a : m.arcs()) {
        if (t <= a.t_end) return a;
    }
    return m.arcs().back();
}

}  // namespace

Clearance min_clearance(const Motion& leader, const Motion& follower, double headway, double from, double to)
{
    std::vector<double> cuts{from, to};
    for (double t : breakpoints(leader, from, to)) cuts.push_back(t);
    for (double t : breakpoints(follower, from, to)) cuts.push_back(t);
    std::sort(cuts.begin(), cuts.end());

    Clearance best{std::numeric_limits<double>::infinity(), from};
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i];
        const double hi = cuts[i + 1];
        if (hi - lo <= 0.0) continue;
        const double mid = 0.5 * (lo + hi);
        const Cubic pl = position(arc_at(leader, mid), lo);
        const Cubic pf = position(arc_at(follower, mid), lo);
        const Cubic vf = speed(arc_at(follower, mid), lo);
        const Cubic g{pl.c0 - pf.c0 - headway * vf.c0, pl.c1 - pf.c1 - headway * vf.c1,
                      pl.c2 - pf.c2 - headway * vf.c2, pl.c3 - pf.c3};
        std::vector<double> xs{0.0, hi - lo};
        // g'(x) = 3 c3 x^2 + 2 c2 x + c1
        const double A = 3 * g.c3, B = 2 * g.c2, C = g.c1;
        if (std::abs(A) > 1e-15) {
            const double disc = B * B - 4 * A * C;
            if (disc >= 0) {
                const double sq = std::sqrt(disc);
                xs.push_back((-B + sq) / (2 * A));
                xs.push_back((-B - sq) / (2 * A));
            }
        } else if (std::abs(B) > 1e-15) {
            xs.push_back(-C / B);
        }
        for (double x : xs) {
            if (x < 0.0 || x > hi - lo) continue;
            const double val = g(x);
            if (val < best.value) best = {val, lo + x};
        }
    }
    return best;
}

}  // namespace cav::traj
