#include "cav/v2x/wire.hpp"

#include <algorithm>

#include <fmt/format.h>

namespace cav::v2x {

bool valid_topic(const std::string& topic)
{
    return !topic.empty() && topic.size() <= 0xFFFF && topic.find('\0') == std::string::npos;
}

bool topic_matches(const std::string& pattern, const std::string& topic)
{
    if (!pattern.empty() && pattern.back() == '#') {
        return topic.compare(0, pattern.size() - 1, pattern, 0, pattern.size() - 1) == 0 &&
               topic.size() >= pattern.size() - 1;
    }
    return pattern == topic;
}

Bytes encode_message(const Message& m)
{
    Bytes out;
    if (const auto* s = std::get_if<Subscribe>(&m)) {
        if (!valid_topic(s->topic)) throw WireError("invalid topic");
        out.push_back(kOpSubscribe);
        out.insert(out.end(), s->topic.begin(), s->topic.end());
        return out;
    }
    const auto& p = std::get<Publish>(m);
    if (!valid_topic(p.topic)) throw WireError("invalid topic");
    out.reserve(3 + p.topic.size() + p.payload.size());
    out.push_back(kOpPublish);
    out.push_back(static_cast<std::uint8_t>(p.topic.size() >> 8));
    out.push_back(static_cast<std::uint8_t>(p.topic.size()));
    out.insert(out.end(), p.topic.begin(), p.topic.end());
    out.insert(out.end(), p.payload.begin(), p.payload.end());
    return out;
}

Message decode_message(const Bytes& payload)
{
    if (payload.empty()) throw WireError("empty frame");
    switch (payload[0]) {
    case kOpSubscribe: {
        std::string topic(payload.begin() + 1, payload.end());
        if (!valid_topic(topic)) throw WireError("invalid subscribe topic");
        return Subscribe{std::move(topic)};
    }
    case kOpPublish: {
        if (payload.size() < 3) throw WireError("truncated publish header");
        const std::size_t n = static_cast<std::size_t>(payload[1]) << 8 | payload[2];
        if (payload.size() < 3 + n) throw WireError("publish topic runs past the frame");
        std::string topic(payload.begin() + 3, payload.begin() + 3 + static_cast<std::ptrdiff_t>(n));
        if (!valid_topic(topic)) throw WireError("invalid publish topic");
        return Publish{std::move(topic), Bytes(payload.begin() + 3 + static_cast<std::ptrdiff_t>(n), payload.end())};
    }
    default:
        throw WireError(fmt::format("unknown op 0x{:02x}", payload[0]));
    }
}

Bytes frame(const Message& m)
{
    const Bytes body = encode_message(m);
    if (body.size() > kMaxFrame) throw WireError("frame too large");
    const auto n = static_cast<std::uint32_t>(body.size());
    Bytes out{static_cast<std::uint8_t>(n >> 24), static_cast<std::uint8_t>(n >> 16), static_cast<std::uint8_t>(n >> 8),
              static_cast<std::uint8_t>(n)};
    out.resize(4 + body.size());
    std::copy(body.begin(), body.end(), out.begin() + 4);
    return out;
}

}  // namespace cav::v2x
