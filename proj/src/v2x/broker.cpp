#include "cav/v2x/broker.hpp"

#include <random>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace cav::v2x {

Broker::Broker(const std::string& host, std::uint16_t port)
    : listener_(listen_tcp(host, port))
    , port_(local_port(listener_))
{
}

Broker::~Broker() { stop(); }

void Broker::start()
{
    if (running_.exchange(true)) return;
    acceptor_ = std::thread([this] { accept_loop(); });
    fanout_ = std::thread([this] { fanout_loop(); });
    spdlog::info("broker listening on port {}", port_);
}

void Broker::stop()
{
    if (!running_.exchange(false)) return;
    listener_.shutdown();
    {
        std::lock_guard lock(mu_);
        for (auto& c : conns_) c->sock.shutdown();
    }
    cv_.notify_all();
    if (acceptor_.joinable()) acceptor_.join();
    if (fanout_.joinable()) fanout_.join();
    std::vector<std::thread> readers;
    {
        std::lock_guard lock(mu_);
        readers.swap(readers_);
    }
    for (auto& t : readers) t.join();
    std::lock_guard lock(mu_);
    conns_.clear();
    listener_.close();
}

BrokerStats Broker::stats() const
{
    std::lock_guard lock(mu_);
    return stats_;
}

void Broker::accept_loop()
{
    while (running_) {
        std::optional<Socket> s = accept_tcp(listener_);
        if (!s) break;
        auto conn = std::make_shared<Conn>();
        conn->sock = std::move(*s);
        std::lock_guard lock(mu_);
        if (!running_) {
            conn->sock.shutdown();
            break;
        }
        conn->id = next_conn_++;
        conns_.push_back(conn);
        readers_.emplace_back([this, conn] { read_loop(conn); });
    }
}

void Broker::drop(const std::shared_ptr<Conn>& conn)
{
    std::lock_guard lock(mu_);
    conn->alive = false;
    std::erase(conns_, conn);
}

void Broker::read_loop(std::shared_ptr<Conn> conn)
{
    try {
        while (running_) {
            std::optional<Bytes> payload = read_frame(conn->sock);
            if (!payload) break;
            Message m = decode_message(*payload);
            std::lock_guard lock(mu_);
            if (auto* sub = std::get_if<Subscribe>(&m)) {
                conn->patterns.push_back(std::move(sub->topic));
            } else {
                queue_.push_back(std::move(std::get<Publish>(m)));
                cv_.notify_one();
            }
        }
    } catch (const WireError& e) {
        spdlog::warn("broker: closing connection {}: {}", conn->id, e.what());
        std::lock_guard lock(mu_);
        ++stats_.malformed;
    } catch (const SocketError& e) {
        spdlog::debug("broker: connection {} ended: {}", conn->id, e.what());
    }
    conn->sock.shutdown();
    drop(conn);
}

void Broker::fanout_loop()
{
    for (;;) {
        Publish msg;
        std::vector<std::shared_ptr<Conn>> targets;
        {
            std::unique_lock lock(mu_);
            cv_.wait(lock, [&] { return !queue_.empty() || !running_; });
            if (queue_.empty()) return;
            msg = std::move(queue_.front());
            queue_.pop_front();
            ++stats_.published;
            for (const auto& c : conns_) {
                for (const auto& p : c->patterns) {
                    if (topic_matches(p, msg.topic)) {
                        targets.push_back(c);
                        break;
                    }
                }
            }
            if (targets.empty()) ++stats_.unmatched;
        }
        if (targets.empty()) continue;
        const Bytes bytes = frame(msg);
        for (const auto& c : targets) {
            try {
                std::lock_guard send_lock(c->send_mu);
                send_all(c->sock, bytes);
                std::lock_guard lock(mu_);
                ++stats_.delivered;
            } catch (const SocketError& e) {
                spdlog::debug("broker: send to connection {} failed: {}", c->id, e.what());
                c->sock.shutdown();
            }
        }
    }
}

Client Client::connect(const std::string& host, std::uint16_t port) { return Client(connect_tcp(host, port)); }

void Client::subscribe(const std::string& topic) { send_all(sock_, frame(Subscribe{topic})); }

void Client::publish(const std::string& topic, const Bytes& payload) { send_all(sock_, frame(Publish{topic, payload})); }

void Client::sync()
{
    std::random_device rd;
    const std::string topic = fmt::format("sync/{:08x}{:08x}", rd(), rd());
    subscribe(topic);
    publish(topic, {});
    std::deque<Publish> held;
    for (;;) {
        std::optional<Bytes> payload = read_frame(sock_);
        if (!payload) throw SocketError("broker closed the connection during sync");
        Message m = decode_message(*payload);
        auto* p = std::get_if<Publish>(&m);
        if (p == nullptr) continue;
        if (p->topic == topic) break;
        held.push_back(std::move(*p));
    }
    for (auto& p : held) pending_.push_back(std::move(p));
}

std::optional<Publish> Client::receive()
{
    if (!pending_.empty()) {
        Publish p = std::move(pending_.front());
        pending_.pop_front();
        return p;
    }
    for (;;) {
        std::optional<Bytes> payload = read_frame(sock_);
        if (!payload) return std::nullopt;
        Message m = decode_message(*payload);
        if (auto* p = std::get_if<Publish>(&m)) return std::move(*p);
    }
}

}  // namespace cav::v2x
