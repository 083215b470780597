#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "cav/core/types.hpp"

/// Closed-form energy-optimal trajectories for a double integrator.
///
/// Every arc is a polynomial in local time tau = t - t_begin:
///   u = a tau + b,  v = a tau^2/2 + b tau + c,  p = a tau^3/6 + b tau^2/2 + c tau + d,
/// so c and d are the speed and position at the start of the arc.
namespace cav::traj {

enum class ArcKind { Unconstrained, VMaxCruise, VMinCruise };

struct Arc {
    ArcKind kind = ArcKind::Unconstrained;
    double t_begin = 0.0;
    double t_end = 0.0;
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
};

struct TrajectoryCoefficients {
    // First arc's coefficients (local time from t0).
    double a = 0.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;
    double t0 = 0.0;
    double tm = 0.0;
    std::vector<Arc> arcs;
};

struct BoundaryConditions {
    double p0 = 0.0;
    double v0 = 0.0;
    double t0 = 0.0;
    double p_mz = 0.0;
    double tm = 0.0;
    // When set, v(tm) is fixed instead of the transversality condition u(tm) = 0.
    std::optional<double> terminal_speed;
};

struct Sample {
    double u = 0.0;
    double v = 0.0;
    double p = 0.0;
};

class DegenerateHorizonError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class InfeasibleHorizonError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class OutsideWindowError : public std::out_of_range {
    using std::out_of_range::out_of_range;
};

inline constexpr double kMinHorizon = 1e-6;

/// Solves p(t0)=p0, v(t0)=v0, p(tm)=p_mz and either u(tm)=0 or v(tm)=terminal_speed.
/// Throws DegenerateHorizonError when tm - t0 < 1e-6 s.
TrajectoryCoefficients solve_unconstrained(const BoundaryConditions& bc);

/// Throws OutsideWindowError for t outside [t0, tm] (1e-9 s slack).
Sample eval(const TrajectoryCoefficients& coeffs, double t);

enum class Constraint { UMax, UMin, VMax, VMin };

struct Violation {
    Constraint constraint = Constraint::VMax;
    double t_begin = 0.0;
    double t_end = 0.0;
    double extreme = 0.0;  // most violating value of u or v on the interval
};

/// Every maximal interval on which u or v leaves `bounds`, found from polynomial roots.
std::vector<Violation> check_feasibility(const TrajectoryCoefficients& coeffs, const Bounds& bounds,
                                         double tol = 1e-9);

enum class SpeedBound { VMax, VMin };

/// Three-arc solution: unconstrained, cruise at the bound, unconstrained. Degenerate arcs are dropped.
/// Throws InfeasibleHorizonError when no non-negative switch times exist.
TrajectoryCoefficients solve_with_speed_arc(const BoundaryConditions& bc, const Bounds& bounds, SpeedBound which);

/// Exact integral of u^2 over [t0, tm].
double control_effort(const TrajectoryCoefficients& coeffs);

/// Result of planning under the full bound set.
struct PlanResult {
    std::optional<TrajectoryCoefficients> coeffs;
    std::vector<Violation> violations;  // non-empty when coeffs is empty
    bool pieced = false;
};

/// Unconstrained solve, then speed-arc piecing for a single speed violation.
/// Control-bound violations (or several simultaneous constraints) are returned unresolved.
PlanResult plan(const BoundaryConditions& bc, const Bounds& bounds);

}  // namespace cav::traj
