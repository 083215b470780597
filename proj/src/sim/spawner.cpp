#include "cav/sim/spawner.hpp"

#include <cmath>
#include <limits>

namespace cav::sim {

namespace {

double exponential(std::mt19937_64& rng, double rate)
{
    // Inverse transform on a 53-bit uniform keeps the stream identical across standard libraries.
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return -std::log1p(-u) / rate;
}

}  // namespace

Spawner::Spawner(const CorridorConfig& cfg, std::uint64_t seed)
{
    for (const RouteSpec& r : cfg.routes) {
        std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                          static_cast<std::uint32_t>(r.id)};
        Stream s;
        s.rate = r.flow;
        s.rng.seed(seq);
        s.next = s.rate > 0.0 ? exponential(s.rng, s.rate) : std::numeric_limits<double>::infinity();
        streams_.push_back(std::move(s));
    }
}

std::vector<int> Spawner::arrivals_until(double t)
{
    std::vector<int> out;
    out.reserve(streams_.size());
    for (Stream& s : streams_) {
        int n = 0;
        while (s.next <= t) {
            ++n;
            s.next += exponential(s.rng, s.rate);
        }
        out.push_back(n);
    }
    return out;
}

}  // namespace cav::sim
