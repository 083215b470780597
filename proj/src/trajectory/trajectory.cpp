#include "cav/trajectory/trajectory.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/format.h>

namespace cav::traj {

namespace {

constexpr double kWindowSlack = 1e-9;
constexpr double kArcEps = 1e-12;

Sample eval_arc(const Arc& arc, double t)
{
    const double tau = t - arc.t_begin;
    return {arc.a * tau + arc.b,
            0.5 * arc.a * tau * tau + arc.b * tau + arc.c,
            arc.a * tau * tau * tau / 6.0 + 0.5 * arc.b * tau * tau + arc.c * tau + arc.d};
}

void sync_head(TrajectoryCoefficients& tc)
{
    const Arc& first = tc.arcs.front();
    tc.a = first.a;
    tc.b = first.b;
    tc.c = first.c;
    tc.d = first.d;
    tc.t0 = first.t_begin;
    tc.tm = tc.arcs.back().t_end;
}

void check_bc(const BoundaryConditions& bc)
{
    if (!(bc.tm - bc.t0 >= kMinHorizon)) {
        throw DegenerateHorizonError(fmt::format("horizon tm - t0 = {:.3g} s is below {:.0e} s", bc.tm - bc.t0, kMinHorizon));
    }
}

// Real roots of q2 x^2 + q1 x + q0 in ascending order.
std::vector<double> quadratic_roots(double q2, double q1, double q0)
{
    std::vector<double> roots;
    const double scale = std::max({std::abs(q2), std::abs(q1), std::abs(q0), 1e-300});
    if (std::abs(q2) <= 1e-14 * scale) {
        if (std::abs(q1) > 1e-14 * scale) roots.push_back(-q0 / q1);
        return roots;
    }
    const double disc = q1 * q1 - 4.0 * q2 * q0;
    if (disc < 0.0) return roots;
    const double sq = std::sqrt(disc);
    // Numerically stable pair.
    const double qq = -0.5 * (q1 + std::copysign(sq, q1));
    if (qq != 0.0) {
        roots.push_back(qq / q2);
        roots.push_back(q0 / qq);
    } else {
        roots.push_back(0.0);
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

struct Interval {
    double lo;
    double hi;
    double extreme;
};

// Sub-intervals of [0, len] where f(tau) - limit has sign `sign` by more than tol.
// f is a polynomial of degree <= 2 described by (q2, q1, q0).
std::vector<Interval> exceed_intervals(double q2, double q1, double q0, double len, double limit, double sign,
                                       double tol)
{
    auto f = [&](double x) { return (q2 * x + q1) * x + q0; };
    std::vector<double> cuts{0.0};
    for (double r : quadratic_roots(q2, q1, q0 - limit)) {
        if (r > 0.0 && r < len) cuts.push_back(r);
    }
    // Vertex of the quadratic, where the extreme excess can sit.
    double vertex = -1.0;
    if (q2 != 0.0) {
        vertex = -q1 / (2.0 * q2);
        if (vertex > 0.0 && vertex < len) cuts.push_back(vertex);
    }
    cuts.push_back(len);
    std::sort(cuts.begin(), cuts.end());

    std::vector<Interval> out;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        const double lo = cuts[i];
        const double hi = cuts[i + 1];
        const double mid = 0.5 * (lo + hi);
        double worst = sign * (f(mid) - limit);
        double extreme = f(mid);
        for (double x : {lo, hi}) {
            const double e = sign * (f(x) - limit);
            if (e > worst) {
                worst = e;
                extreme = f(x);
            }
        }
        if (worst > tol) {
            if (!out.empty() && std::abs(out.back().hi - lo) <= 1e-12) {
                out.back().hi = hi;
                if (sign * (extreme - out.back().extreme) > 0) out.back().extreme = extreme;
            } else {
                out.push_back({lo, hi, extreme});
            }
        }
    }
    return out;
}

double arc_effort(const Arc& arc)
{
    const double T = arc.t_end - arc.t_begin;
    return arc.a * arc.a * T * T * T / 3.0 + arc.a * arc.b * T * T + arc.b * arc.b * T;
}

}  // namespace

TrajectoryCoefficients solve_unconstrained(const BoundaryConditions& bc)
{
    check_bc(bc);
    const double T = bc.tm - bc.t0;
    const double E = bc.p_mz - bc.p0 - bc.v0 * T;  // distance beyond constant-speed cruise

    Arc arc;
    arc.t_begin = bc.t0;
    arc.t_end = bc.tm;
    arc.c = bc.v0;
    arc.d = bc.p0;
    if (bc.terminal_speed) {
        const double F = *bc.terminal_speed - bc.v0;
        arc.a = 6.0 * F / (T * T) - 12.0 * E / (T * T * T);
        arc.b = 6.0 * E / (T * T) - 2.0 * F / T;
    } else {
        // u(T) = 0 (transversality)
        arc.a = -3.0 * E / (T * T * T);
        arc.b = 3.0 * E / (T * T);
    }

    TrajectoryCoefficients tc;
    tc.arcs.push_back(arc);
    sync_head(tc);
    return tc;
}

Sample eval(const TrajectoryCoefficients& coeffs, double t)
{
    if (coeffs.arcs.empty()) throw OutsideWindowError("empty trajectory");
    if (t < coeffs.t0 - kWindowSlack || t > coeffs.tm + kWindowSlack) {
        throw OutsideWindowError(fmt::format("t = {} outside [{}, {}]", t, coeffs.t0, coeffs.tm));
    }
    for (const Arc& arc : coeffs.arcs) {
        if (t <= arc.t_end) return eval_arc(arc, t);
    }
    return eval_arc(coeffs.arcs.back(), t);
}

std::vector<Violation> check_feasibility(const TrajectoryCoefficients& coeffs, const Bounds& bounds, double tol)
{
    std::vector<Violation> out;
    auto add = [&](Constraint c, const Arc& arc, const std::vector<Interval>& ivs, bool higher_is_worse) {
        for (const auto& iv : ivs) {
            const double lo = arc.t_begin + iv.lo;
            const double hi = arc.t_begin + iv.hi;
            // Merge with a violation of the same kind ending where this one starts.
            auto prev = std::find_if(out.rbegin(), out.rend(), [&](const Violation& v) { return v.constraint == c; });
            if (prev != out.rend() && std::abs(prev->t_end - lo) <= 1e-9) {
                prev->t_end = hi;
                if ((iv.extreme > prev->extreme) == higher_is_worse) prev->extreme = iv.extreme;
                continue;
            }
            out.push_back({c, lo, hi, iv.extreme});
        }
    };

    for (const Arc& arc : coeffs.arcs) {
        const double len = arc.t_end - arc.t_begin;
        // u = a tau + b
        add(Constraint::UMax, arc, exceed_intervals(0.0, arc.a, arc.b, len, bounds.u_max, +1.0, tol), true);
        add(Constraint::UMin, arc, exceed_intervals(0.0, arc.a, arc.b, len, bounds.u_min, -1.0, tol), false);
        // v = a tau^2 / 2 + b tau + c
        add(Constraint::VMax, arc, exceed_intervals(0.5 * arc.a, arc.b, arc.c, len, bounds.v_max, +1.0, tol), true);
        add(Constraint::VMin, arc, exceed_intervals(0.5 * arc.a, arc.b, arc.c, len, bounds.v_min, -1.0, tol), false);
    }
    return out;
}

TrajectoryCoefficients solve_with_speed_arc(const BoundaryConditions& bc, const Bounds& bounds, SpeedBound which)
{
    check_bc(bc);
    const double T = bc.tm - bc.t0;
    const double D = bc.p_mz - bc.p0;
    const double vb = which == SpeedBound::VMax ? bounds.v_max : bounds.v_min;
    const double vf = bc.terminal_speed.value_or(vb);
    const double sgn = which == SpeedBound::VMax ? 1.0 : -1.0;

    // Magnitudes of the speed change on the entry and exit arcs.
    const double A = sgn * (vb - bc.v0);
    const double B = sgn * (vb - vf);
    // Distance the cruise-only profile would over/undershoot by.
    const double K = sgn * 3.0 * (vb * T - D);
    constexpr double eps = 1e-12;
    if (A < -eps || B < -eps) {
        throw InfeasibleHorizonError("boundary speeds lie beyond the pieced speed bound");
    }
    if (K < -eps * std::max(1.0, std::abs(vb * T) + std::abs(D))) {
        throw InfeasibleHorizonError(fmt::format("horizon {:.4f} s cannot cover {:.4f} m while respecting the speed bound",
                                                 T, D));
    }

    double tau1 = 0.0;
    double tau3 = 0.0;
    const double Ap = std::max(A, 0.0);
    const double Bp = std::max(B, 0.0);
    const double denom = Ap * std::sqrt(Ap) + Bp * std::sqrt(Bp);
    if (denom > 0.0) {
        const double Kp = std::max(K, 0.0);
        tau1 = std::sqrt(Ap) * Kp / denom;
        tau3 = std::sqrt(Bp) * Kp / denom;
    } else if (std::abs(K) > 1e-9 * std::max(1.0, D)) {
        throw InfeasibleHorizonError("cruise at the bound cannot meet the arrival time");
    }
    if (tau1 + tau3 > T * (1.0 + 1e-12)) {
        throw InfeasibleHorizonError("switch times do not fit inside the horizon");
    }
    // Entry/exit arcs need a speed change to go with their length.
    if (tau1 > 0.0 && Ap <= eps) tau1 = 0.0;
    if (tau3 > 0.0 && Bp <= eps) tau3 = 0.0;
    const double tau2 = std::max(0.0, T - tau1 - tau3);

    const ArcKind cruise = which == SpeedBound::VMax ? ArcKind::VMaxCruise : ArcKind::VMinCruise;
    TrajectoryCoefficients tc;
    double t = bc.t0;
    double p = bc.p0;
    if (tau1 > kArcEps) {
        Arc a1;
        a1.t_begin = t;
        a1.t_end = t + tau1;
        a1.a = 2.0 * (bc.v0 - vb) / (tau1 * tau1);
        a1.b = -a1.a * tau1;
        a1.c = bc.v0;
        a1.d = p;
        tc.arcs.push_back(a1);
        p += tau1 * (2.0 * vb + bc.v0) / 3.0;
        t += tau1;
    }
    if (tau2 > kArcEps) {
        Arc a2;
        a2.kind = cruise;
        a2.t_begin = t;
        a2.t_end = t + tau2;
        a2.c = vb;
        a2.d = p;
        tc.arcs.push_back(a2);
        p += vb * tau2;
        t += tau2;
    }
    if (tau3 > kArcEps) {
        Arc a3;
        a3.t_begin = t;
        a3.t_end = bc.tm;
        a3.a = 2.0 * (vf - vb) / (tau3 * tau3);
        a3.b = 0.0;
        a3.c = vb;
        a3.d = p;
        tc.arcs.push_back(a3);
    }
    if (tc.arcs.empty()) {
        throw InfeasibleHorizonError("no arcs remain after piecing");
    }
    tc.arcs.back().t_end = bc.tm;
    tc.arcs.front().t_begin = bc.t0;
    sync_head(tc);
    return tc;
}

double control_effort(const TrajectoryCoefficients& coeffs)
{
    double total = 0.0;
    for (const Arc& arc : coeffs.arcs) total += arc_effort(arc);
    return total;
}

PlanResult plan(const BoundaryConditions& bc, const Bounds& bounds)
{
    PlanResult result;
    TrajectoryCoefficients tc = solve_unconstrained(bc);
    auto violations = check_feasibility(tc, bounds);
    if (violations.empty()) {
        result.coeffs = std::move(tc);
        return result;
    }

    bool vmax = false;
    bool vmin = false;
    for (const auto& v : violations) {
        vmax |= v.constraint == Constraint::VMax;
        vmin |= v.constraint == Constraint::VMin;
    }
    if (vmax != vmin) {
        try {
            TrajectoryCoefficients pieced =
                solve_with_speed_arc(bc, bounds, vmax ? SpeedBound::VMax : SpeedBound::VMin);
            auto remaining = check_feasibility(pieced, bounds);
            if (remaining.empty()) {
                result.coeffs = std::move(pieced);
                result.pieced = true;
                return result;
            }
            violations = std::move(remaining);
        } catch (const InfeasibleHorizonError&) {
        }
    }
    result.violations = std::move(violations);
    return result;
}

}  // namespace cav::traj
