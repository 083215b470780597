#include "cav/v2x/bsm.hpp"

#include <fmt/format.h>

namespace cav::v2x {

namespace {

class Writer {
  public:
    explicit Writer(std::array<std::uint8_t, kBsmSize>& out)
        : out_(out)
    {
    }
    template <typename T>
    void put(T value)
    {
        using U = std::make_unsigned_t<T>;
        const auto bits = static_cast<U>(value);
        for (int shift = 8 * (static_cast<int>(sizeof(T)) - 1); shift >= 0; shift -= 8) {
            out_[pos_++] = static_cast<std::uint8_t>(bits >> shift);
        }
    }

  private:
    std::array<std::uint8_t, kBsmSize>& out_;
    std::size_t pos_ = 0;
};

class Reader {
  public:
    explicit Reader(std::span<const std::uint8_t> in)
        : in_(in)
    {
    }
    template <typename T>
    T get()
    {
        using U = std::make_unsigned_t<T>;
        U bits = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) bits = static_cast<U>((bits << 8) | in_[pos_++]);
        return static_cast<T>(bits);
    }

  private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

}  // namespace

std::array<std::uint8_t, kBsmSize> encode_bsm(const BsmFrame& f)
{
    if (f.msg_id != kMsgBsm && f.msg_id != kMsgSpat) {
        throw BsmError(BsmError::Kind::UnknownMessage, fmt::format("unknown msg_id 0x{:02x}", f.msg_id));
    }
    if (f.width > 3) throw BsmError(BsmError::Kind::OutOfRange, fmt::format("zone id {} outside 0..3", f.width));
    if (f.timestamp_ms > 0xFFFFFFFFull) {
        throw BsmError(BsmError::Kind::OutOfRange, fmt::format("timestamp {} ms does not fit 32 bits", f.timestamp_ms));
    }
    std::array<std::uint8_t, kBsmSize> out{};
    Writer w(out);
    w.put(f.msg_id);
    w.put(f.vehicle_id);
    w.put(f.latitude);
    w.put(f.longitude);
    w.put(f.speed);
    w.put(f.elevation);
    w.put(f.length);
    w.put(f.width);
    w.put(f.seq);
    w.put(static_cast<std::uint32_t>(f.timestamp_ms));
    return out;
}

BsmFrame decode_bsm(std::span<const std::uint8_t> bytes)
{
    if (bytes.size() != kBsmSize) {
        throw BsmError(BsmError::Kind::Length, fmt::format("frame is {} bytes, expected {}", bytes.size(), kBsmSize));
    }
    Reader r(bytes);
    BsmFrame f;
    f.msg_id = r.get<std::uint8_t>();
    if (f.msg_id == kMsgSpat) {
        BsmFrame marker;
        marker.msg_id = kMsgSpat;
        marker.timestamp_ms = static_cast<std::uint32_t>(bytes[24]) << 24 | static_cast<std::uint32_t>(bytes[25]) << 16 |
                              static_cast<std::uint32_t>(bytes[26]) << 8 | bytes[27];
        return marker;
    }
    if (f.msg_id != kMsgBsm) {
        throw BsmError(BsmError::Kind::UnknownMessage, fmt::format("unknown msg_id 0x{:02x}", f.msg_id));
    }
    f.vehicle_id = r.get<std::uint32_t>();
    f.latitude = r.get<std::int32_t>();
    f.longitude = r.get<std::int32_t>();
    f.speed = r.get<std::uint16_t>();
    f.elevation = r.get<std::int32_t>();
    f.length = r.get<std::uint16_t>();
    f.width = r.get<std::uint16_t>();
    f.seq = r.get<std::uint8_t>();
    f.timestamp_ms = r.get<std::uint32_t>();
    if (f.width > 3) throw BsmError(BsmError::Kind::OutOfRange, fmt::format("zone id {} outside 0..3", f.width));
    return f;
}

}  // namespace cav::v2x
