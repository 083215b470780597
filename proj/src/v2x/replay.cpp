#include "cav/v2x/replay.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <thread>

#include <fmt/format.h>

#include "cav/v2x/broker.hpp"

namespace cav::v2x {

BsmFrame frame_for(const sim::TraceRecord& r, std::uint8_t seq)
{
    BsmFrame f;
    f.vehicle_id = r.id;
    f.latitude = r.route;
    f.speed = static_cast<std::uint16_t>(std::clamp<long long>(std::llround(r.v / kSpeedUnit), 0, 0xFFFF));
    f.elevation = static_cast<std::int32_t>(r.tm_ms);
    f.length = static_cast<std::uint16_t>(std::clamp<long long>(std::llround(r.dist_to_mz * 10.0), 0, 0xFFFF));
    f.width = static_cast<std::uint16_t>(r.zone);
    f.seq = seq;
    f.timestamp_ms = static_cast<std::uint64_t>(std::llround(r.t * 1000.0));
    return f;
}

std::string bsm_topic(int zone) { return fmt::format("bsm/{}", zone); }

ReplayStats replay_publish(const sim::Trace& trace, const std::string& host, std::uint16_t port, double rate)
{
    using clock = std::chrono::steady_clock;
    Client client = Client::connect(host, port);
    const auto start = clock::now();
    ReplayStats stats;
    std::uint8_t seq = 0;
    for (const auto& r : trace.records) {
        if (rate > 0.0) {
            const auto due = start + std::chrono::duration_cast<clock::duration>(
                                         std::chrono::duration<double>(static_cast<double>(stats.frames) / rate));
            std::this_thread::sleep_until(due);
        }
        const auto bytes = encode_bsm(frame_for(r, seq++));
        client.publish(bsm_topic(r.zone), Bytes(bytes.begin(), bytes.end()));
        ++stats.frames;
    }
    client.publish(kEofTopic, {});
    stats.seconds = std::chrono::duration<double>(clock::now() - start).count();
    return stats;
}

}  // namespace cav::v2x
