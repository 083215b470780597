#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace cav::v2x {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::uint8_t kOpSubscribe = 0x01;
inline constexpr std::uint8_t kOpPublish = 0x02;
inline constexpr std::uint32_t kMaxFrame = 1u << 20;

/// A trailing '#' makes the topic a prefix pattern ("bsm/#" matches "bsm/1").
struct Subscribe {
    std::string topic;
    bool operator==(const Subscribe&) const = default;
};

struct Publish {
    std::string topic;
    Bytes payload;
    bool operator==(const Publish&) const = default;
};

using Message = std::variant<Subscribe, Publish>;

class WireError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Non-empty, at most 65535 bytes, no NUL.
bool valid_topic(const std::string& topic);
bool topic_matches(const std::string& pattern, const std::string& topic);

/// Payload without the length prefix:
///   0x01 topic...                        SUBSCRIBE
///   0x02 u16 topic_len, topic, bytes...  PUBLISH
Bytes encode_message(const Message& m);
Message decode_message(const Bytes& payload);

/// u32 big-endian length, then the payload.
Bytes frame(const Message& m);

}  // namespace cav::v2x
