#pragma once

#include <vector>

#include "cav/trajectory/trajectory.hpp"

namespace cav::traj {

/// A planned trajectory extended past tm by a constant-speed hold (the merging-zone traversal).
class Motion {
  public:
    Motion() = default;
    Motion(const TrajectoryCoefficients& plan, double hold_speed, double hold_until);

    double t_begin() const { return arcs_.front().t_begin; }
    double t_end() const { return arcs_.back().t_end; }
    bool empty() const { return arcs_.empty(); }
    const std::vector<Arc>& arcs() const { return arcs_; }

    /// Clamps t into [t_begin, t_end].
    Sample at(double t) const;

  private:
    std::vector<Arc> arcs_;
};

struct Clearance {
    double value = 0.0;  // min of p_leader - p_follower - h * v_follower
    double at = 0.0;
};

/// Minimum rear-end clearance over [from, to] (both motions must cover it), computed per
/// polynomial piece from the roots of its derivative.
Clearance min_clearance(const Motion& leader, const Motion& follower, double headway, double from, double to);

}  // namespace cav::traj
