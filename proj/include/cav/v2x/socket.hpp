#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "cav/v2x/wire.hpp"

namespace cav::v2x {

class SocketError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Owning TCP socket descriptor.
class Socket {
  public:
    Socket() = default;
    explicit Socket(int fd)
        : fd_(fd)
    {
    }
    Socket(Socket&& other) noexcept;
    Socket& operator=(Socket&& other) noexcept;
    Socket(const Socket&) = delete;
    Socket& operator=(const Socket&) = delete;
    ~Socket();

    int fd() const { return fd_; }
    bool valid() const { return fd_ >= 0; }
    void close();
    /// Wakes any thread blocked in accept/recv on this socket.
    void shutdown();

  private:
    int fd_ = -1;
};

/// Listens on host:port (port 0 picks a free one). Throws SocketError on bind failure.
Socket listen_tcp(const std::string& host, std::uint16_t port);
std::uint16_t local_port(const Socket& s);
/// Blocks for the next connection; empty once the listener is shut down.
std::optional<Socket> accept_tcp(const Socket& listener);
Socket connect_tcp(const std::string& host, std::uint16_t port);

void send_all(const Socket& s, const Bytes& data);
/// Next length-prefixed payload; empty on orderly close. Throws WireError on an oversized length
/// and SocketError on a mid-frame disconnect.
std::optional<Bytes> read_frame(const Socket& s);

}  // namespace cav::v2x
