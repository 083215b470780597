#pragma once

#include <cstdint>
#include <string>

#include "cav/sim/trace.hpp"
#include "cav/v2x/bsm.hpp"

namespace cav::v2x {

inline constexpr const char* kEofTopic = "replay/eof";

/// BSM for one trace record. The latitude field carries the route id as a lane tag.
BsmFrame frame_for(const sim::TraceRecord& r, std::uint8_t seq);

std::string bsm_topic(int zone);

struct ReplayStats {
    std::size_t frames = 0;
    double seconds = 0.0;
};

/// Publishes every record in order on "bsm/<zone>" at `rate` frames per second (<= 0: unthrottled),
/// then an empty message on replay/eof. Throws SocketError when the broker is unreachable.
ReplayStats replay_publish(const sim::Trace& trace, const std::string& host, std::uint16_t port, double rate);

}  // namespace cav::v2x
