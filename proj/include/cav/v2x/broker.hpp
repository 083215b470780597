#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cav/v2x/socket.hpp"
#include "cav/v2x/wire.hpp"

namespace cav::v2x {

struct BrokerStats {
    std::uint64_t published = 0;
    std::uint64_t delivered = 0;
    std::uint64_t unmatched = 0;  // publishes with no subscriber
    std::uint64_t malformed = 0;  // connections closed for a bad frame
};

/// Topic broker over the framed protocol. One intake thread per connection feeds a single fan-out
/// queue, so every subscriber sees publishes in one global arrival order. QoS 0, no persistence.
class Broker {
  public:
    /// Binds immediately; throws SocketError when the address is unavailable.
    Broker(const std::string& host, std::uint16_t port);
    ~Broker();
    Broker(const Broker&) = delete;
    Broker& operator=(const Broker&) = delete;

    std::uint16_t port() const { return port_; }
    void start();
    void stop();
    BrokerStats stats() const;

  private:
    struct Conn {
        std::uint64_t id = 0;
        Socket sock;
        std::mutex send_mu;
        std::vector<std::string> patterns;  // guarded by Broker::mu_
        bool alive = true;
    };

    void accept_loop();
    void read_loop(std::shared_ptr<Conn> conn);
    void fanout_loop();
    void drop(const std::shared_ptr<Conn>& conn);

    Socket listener_;
    std::uint16_t port_ = 0;
    std::atomic<bool> running_{false};
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::vector<std::shared_ptr<Conn>> conns_;
    std::deque<Publish> queue_;
    std::vector<std::thread> readers_;
    std::thread acceptor_;
    std::thread fanout_;
    std::uint64_t next_conn_ = 1;
    BrokerStats stats_;
};

/// Blocking client for the framed protocol.
class Client {
  public:
    static Client connect(const std::string& host, std::uint16_t port);

    void subscribe(const std::string& topic);
    void publish(const std::string& topic, const Bytes& payload);
    /// Round-trips a private topic through the broker, so every earlier subscription is in effect
    /// once it returns. Publishes received meanwhile stay queued for receive().
    void sync();
    /// Next publish; empty once the broker closes the connection.
    std::optional<Publish> receive();
    /// Unblocks a receive() running on another thread.
    void shutdown() { sock_.shutdown(); }

  private:
    explicit Client(Socket s)
        : sock_(std::move(s))
    {
    }
    Socket sock_;
    std::deque<Publish> pending_;
};

}  // namespace cav::v2x
