#include "cav/v2x/socket.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include <fmt/format.h>

namespace cav::v2x {

namespace {

[[noreturn]] void fail(const std::string& what)
{
    throw SocketError(fmt::format("{}: {}", what, std::strerror(errno)));
}

sockaddr_in resolve(const std::string& host, std::uint16_t port)
{
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    const std::string h = host.empty() || host == "localhost" ? "127.0.0.1" : host;
    if (inet_pton(AF_INET, h.c_str(), &addr.sin_addr) == 1) return addr;
    addrinfo hints{};
    hints.ai_family = AF_INET;
    addrinfo* res = nullptr;
    if (getaddrinfo(h.c_str(), nullptr, &hints, &res) != 0 || res == nullptr) {
        throw SocketError(fmt::format("cannot resolve {}", host));
    }
    addr.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
    freeaddrinfo(res);
    return addr;
}

// false on orderly close before the first byte
bool recv_exact(const Socket& s, std::uint8_t* buf, std::size_t n)
{
    std::size_t got = 0;
    while (got < n) {
        const ssize_t r = ::recv(s.fd(), buf + got, n - got, 0);
        if (r == 0) {
            if (got == 0) return false;
            throw SocketError("connection closed mid-frame");
        }
        if (r < 0) {
            if (errno == EINTR) continue;
            if (got == 0 && (errno == ECONNRESET || errno == EBADF || errno == EINVAL)) return false;
            fail("recv");
        }
        got += static_cast<std::size_t>(r);
    }
    return true;
}

}  // namespace

Socket::Socket(Socket&& other) noexcept
    : fd_(other.fd_)
{
    other.fd_ = -1;
}

Socket& Socket::operator=(Socket&& other) noexcept
{
    if (this != &other) {
        close();
        fd_ = other.fd_;
        other.fd_ = -1;
    }
    return *this;
}

Socket::~Socket() { close(); }

void Socket::close()
{
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

void Socket::shutdown()
{
    if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

Socket listen_tcp(const std::string& host, std::uint16_t port)
{
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) fail("socket");
    int one = 1;
    ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr = resolve(host, port);
    if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        fail(fmt::format("bind {}:{}", host, port));
    }
    if (::listen(s.fd(), 64) != 0) fail("listen");
    return s;
}

std::uint16_t local_port(const Socket& s)
{
    sockaddr_in addr{};
    socklen_t len = sizeof addr;
    if (::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&addr), &len) != 0) fail("getsockname");
    return ntohs(addr.sin_port);
}

std::optional<Socket> accept_tcp(const Socket& listener)
{
    for (;;) {
        const int fd = ::accept(listener.fd(), nullptr, nullptr);
        if (fd >= 0) {
            int one = 1;
            ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
            return Socket(fd);
        }
        if (errno == EINTR || errno == ECONNABORTED) continue;
        return std::nullopt;
    }
}

Socket connect_tcp(const std::string& host, std::uint16_t port)
{
    Socket s(::socket(AF_INET, SOCK_STREAM, 0));
    if (!s.valid()) fail("socket");
    sockaddr_in addr = resolve(host, port);
    if (::connect(s.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        fail(fmt::format("connect {}:{}", host, port));
    }
    int one = 1;
    ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return s;
}

void send_all(const Socket& s, const Bytes& data)
{
    std::size_t sent = 0;
    while (sent < data.size()) {
        const ssize_t r = ::send(s.fd(), data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
        if (r < 0) {
            if (errno == EINTR) continue;
            fail("send");
        }
        sent += static_cast<std::size_t>(r);
    }
}

std::optional<Bytes> read_frame(const Socket& s)
{
    std::uint8_t hdr[4];
    if (!recv_exact(s, hdr, 4)) return std::nullopt;
    const std::uint32_t n = static_cast<std::uint32_t>(hdr[0]) << 24 | static_cast<std::uint32_t>(hdr[1]) << 16 |
                            static_cast<std::uint32_t>(hdr[2]) << 8 | hdr[3];
    if (n > kMaxFrame) throw WireError(fmt::format("frame length {} exceeds {}", n, kMaxFrame));
    Bytes out(n);
    if (n > 0 && !recv_exact(s, out.data(), n)) throw SocketError("connection closed mid-frame");
    return out;
}

}  // namespace cav::v2x
