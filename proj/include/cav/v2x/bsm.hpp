#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>

namespace cav::v2x {

inline constexpr std::uint8_t kMsgBsm = 0x14;
inline constexpr std::uint8_t kMsgSpat = 0x13;
inline constexpr std::size_t kBsmSize = 28;
inline constexpr double kSpeedUnit = 0.02;  // m/s per speed code

/// Basic safety message with three fields carrying scheduling data:
/// elevation = merging time (ms, -1 when unscheduled), length = distance to the MZ (dm),
/// width = current zone (0 outside every zone).
struct BsmFrame {
    std::uint8_t msg_id = kMsgBsm;
    std::uint32_t vehicle_id = 0;
    std::int32_t latitude = 0;   // 1e-7 deg
    std::int32_t longitude = 0;  // 1e-7 deg
    std::uint16_t speed = 0;     // 0.02 m/s
    std::int32_t elevation = 0;
    std::uint16_t length = 0;
    std::uint16_t width = 0;
    std::uint8_t seq = 0;
    std::uint64_t timestamp_ms = 0;

    double speed_mps() const { return speed * kSpeedUnit; }
    std::int64_t tm_ms() const { return elevation; }
    double dist_to_mz() const { return length * 0.1; }
    int zone() const { return width; }
    bool is_spat() const { return msg_id == kMsgSpat; }

    bool operator==(const BsmFrame&) const = default;
};

class BsmError : public std::runtime_error {
  public:
    enum class Kind { Length, UnknownMessage, OutOfRange };
    BsmError(Kind kind, const std::string& what)
        : std::runtime_error(what)
        , kind_(kind)
    {
    }
    Kind kind() const noexcept { return kind_; }

  private:
    Kind kind_;
};

/// 28-byte big-endian record in field order. The timestamp travels as u32 milliseconds.
/// Throws BsmError(OutOfRange) for width > 3, timestamps >= 2^32 ms or an unknown msg_id.
std::array<std::uint8_t, kBsmSize> encode_bsm(const BsmFrame& frame);

/// Inverse of encode_bsm. A SPaT frame decodes to msg_id and timestamp only.
BsmFrame decode_bsm(std::span<const std::uint8_t> bytes);

}  // namespace cav::v2x
