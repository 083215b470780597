#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "cav/core/config.hpp"

namespace cav::sim {

/// Per-route Poisson arrivals. Each route draws from its own stream seeded by (seed, route id),
/// so adding a route never perturbs the others.
class Spawner {
  public:
    Spawner(const CorridorConfig& cfg, std::uint64_t seed);

    /// Number of new arrivals on each route (config order) with arrival time <= t.
    std::vector<int> arrivals_until(double t);

  private:
    struct Stream {
        double rate = 0.0;
        double next = 0.0;
        std::mt19937_64 rng;
    };
    std::vector<Stream> streams_;
};

}  // namespace cav::sim
