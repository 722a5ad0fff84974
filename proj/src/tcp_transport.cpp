// SPDX-License-Identifier: Apache-2.0

#include "porch/tcp_transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstring>

#include "porch/error.hpp"

namespace porch::tcp {

namespace {

int make_listener(const harness::Endpoint& endpoint) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw Error(Errc::BindFailure, "socket: " + std::string(strerror(errno)));
    const int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(endpoint.port);
    ::inet_pton(AF_INET, endpoint.address.c_str(), &addr.sin_addr);
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        const int saved = errno;
        ::close(fd);
        throw Error(Errc::BindFailure, endpoint.address + ":" +
                                           std::to_string(endpoint.port) + ": " +
                                           strerror(saved));
    }
    if (::listen(fd, 64) != 0) {
        const int saved = errno;
        ::close(fd);
        throw Error(Errc::BindFailure, std::string("listen: ") + strerror(saved));
    }
    return fd;
}

int connect_to(const harness::Endpoint& endpoint) {
    const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0)
        throw Error(Errc::ConnectFailure, "socket: " + std::string(strerror(errno)));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(endpoint.port);
    ::inet_pton(AF_INET, endpoint.address.c_str(), &addr.sin_addr);
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        const int saved = errno;
        ::close(fd);
        throw Error(Errc::ConnectFailure, endpoint.address + ":" +
                                              std::to_string(endpoint.port) + ": " +
                                              strerror(saved));
    }
    const int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    return fd;
}

void write_all(int fd, const std::uint8_t* data, std::size_t len) {
    std::size_t off = 0;
    while (off < len) {
        const ssize_t n = ::send(fd, data + off, len - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw Error(Errc::ConnectFailure,
                        std::string("send: ") + strerror(errno));
        }
        off += std::size_t(n);
    }
}

std::int64_t epoch_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

std::int64_t steady_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

} // namespace

struct TcpCluster::Listener {
    NodeId node;
    int fd = -1;
};

struct TcpCluster::Connection {
    NodeId owner;                      // node whose port accepted this stream
    int fd = -1;
    std::vector<std::uint8_t> buffer;  // undecoded stream bytes
    std::vector<dnp3m::Frame> frames;  // frames of the message in progress
    bool closed = false;
};

class TcpCluster::Context final : public harness::NodeContext {
public:
    Context(TcpCluster& cluster, const NodeId& self) : cluster_(cluster), self_(self) {}

    Tick now() const override { return cluster_.now_ms(); }
    std::int64_t timestamp() const override { return epoch_ms(); }

    void send(const NodeId& to, const dnp3m::Message& message) override {
        std::vector<std::uint8_t> bytes;
        for (const dnp3m::Frame& frame : dnp3m::fragment(message)) {
            const std::vector<std::uint8_t> encoded = dnp3m::encode_frame(frame);
            bytes.insert(bytes.end(), encoded.begin(), encoded.end());
        }
        cluster_.send_bytes(self_, to, bytes);
        if (cluster_.options_.record_trace) {
            const auto [kind, cycle] = harness::peek_body(message.body);
            cluster_.trace_.push_back({cluster_.now_ms(), "send", self_.name(),
                                       to.name(), cycle, kind});
        }
    }

    void set_timer(Tick delay, std::uint64_t token) override {
        cluster_.timers_.push_back({cluster_.now_ms() + delay, self_, token});
    }

    void trace(std::string_view kind, std::string_view detail,
               std::uint64_t cycle) override {
        if (cluster_.options_.record_trace)
            cluster_.trace_.push_back({cluster_.now_ms(), std::string(kind),
                                       self_.name(), "", cycle, std::string(detail)});
    }

private:
    TcpCluster& cluster_;
    NodeId self_;
};

TcpCluster::TcpCluster(const std::vector<harness::Node*>& nodes, Options options)
    : options_(std::move(options)) {
    std::uint16_t next_port = options_.base_port;
    for (harness::Node* node : nodes) {
        nodes_.emplace(node->id(), node);
        harness::Endpoint endpoint;
        endpoint.node = node->id();
        endpoint.port = next_port++;
        auto listener = std::make_unique<Listener>();
        listener->node = node->id();
        listener->fd = make_listener(endpoint);
        listeners_.push_back(std::move(listener));
        endpoints_.emplace(node->id(), endpoint);
    }
    for (const auto& [id, endpoint] : options_.external) endpoints_.emplace(id, endpoint);
    start_ms_ = steady_ms();
}

TcpCluster::~TcpCluster() {
    for (auto& listener : listeners_)
        if (listener->fd >= 0) ::close(listener->fd);
    for (auto& conn : connections_)
        if (conn->fd >= 0) ::close(conn->fd);
    for (auto& [link, fd] : outgoing_)
        if (fd >= 0) ::close(fd);
}

Tick TcpCluster::now_ms() const { return steady_ms() - start_ms_; }

void TcpCluster::send_bytes(const NodeId& from, const NodeId& to,
                            const std::vector<std::uint8_t>& bytes) {
    const auto endpoint = endpoints_.find(to);
    if (endpoint == endpoints_.end()) throw Error(Errc::UnknownEndpoint, to.name());
    int& fd = outgoing_[{from, to}];
    if (fd <= 0) fd = connect_to(endpoint->second);
    write_all(fd, bytes.data(), bytes.size());
}

void TcpCluster::pump_connection(Connection& conn) {
    // Stream bytes arrive in arbitrary chunks; the codec's remainder
    // reporting finds the frame boundaries.
    std::span<const std::uint8_t> view(conn.buffer);
    std::size_t consumed = 0;
    for (;;) {
        const dnp3m::DecodeResult decoded = dnp3m::decode_frame(view.subspan(consumed));
        if (decoded.status == dnp3m::CodecStatus::Truncated) break; // need more bytes
        if (decoded.status != dnp3m::CodecStatus::Ok) {
            // Poisoned stream; drop the connection.
            conn.closed = true;
            break;
        }
        consumed += decoded.consumed;
        conn.frames.push_back(decoded.frame);
        if (!decoded.frame.full()) {
            const dnp3m::ReassembleResult message = dnp3m::reassemble(conn.frames);
            conn.frames.clear();
            if (message.status == dnp3m::CodecStatus::Ok) {
                const auto node = nodes_.find(conn.owner);
                if (node != nodes_.end()) {
                    if (options_.record_trace) {
                        const auto [kind, cycle] =
                            harness::peek_body(message.message.body);
                        trace_.push_back({now_ms(), "deliver", "", conn.owner.name(),
                                          cycle, kind});
                    }
                    Context ctx(*this, conn.owner);
                    node->second->on_message(message.message, ctx);
                }
            }
        }
    }
    if (consumed > 0)
        conn.buffer.erase(conn.buffer.begin(), conn.buffer.begin() + long(consumed));
}

bool TcpCluster::run(const std::function<bool()>& done, Tick max_wall_ms) {
    for (auto& [id, node] : nodes_) {
        Context ctx(*this, id);
        node->start(ctx);
    }

    const Tick deadline = now_ms() + max_wall_ms;
    std::vector<std::uint8_t> chunk(64 * 1024);

    while (!done()) {
        if (now_ms() >= deadline) return false;

        // Fire due timers first.
        const Tick now = now_ms();
        Tick next_deadline = deadline;
        for (std::size_t i = 0; i < timers_.size();) {
            if (timers_[i].deadline <= now) {
                const TimerEntry entry = timers_[i];
                timers_.erase(timers_.begin() + long(i));
                const auto node = nodes_.find(entry.node);
                if (node != nodes_.end()) {
                    Context ctx(*this, entry.node);
                    node->second->on_timer(entry.token, ctx);
                }
            } else {
                next_deadline = std::min(next_deadline, timers_[i].deadline);
                ++i;
            }
        }

        std::vector<pollfd> fds;
        fds.reserve(listeners_.size() + connections_.size());
        for (const auto& listener : listeners_)
            fds.push_back({listener->fd, POLLIN, 0});
        for (const auto& conn : connections_)
            fds.push_back({conn->fd, POLLIN, 0});

        const int timeout = int(std::clamp<Tick>(next_deadline - now_ms(), 0, 50));
        const int ready = ::poll(fds.data(), fds.size(), timeout);
        if (ready <= 0) continue;

        std::size_t slot = 0;
        for (const auto& listener : listeners_) {
            if (fds[slot++].revents & POLLIN) {
                const int fd = ::accept(listener->fd, nullptr, nullptr);
                if (fd >= 0) {
                    auto conn = std::make_unique<Connection>();
                    conn->owner = listener->node;
                    conn->fd = fd;
                    connections_.push_back(std::move(conn));
                }
            }
        }
        const std::size_t conn_count = connections_.size();
        for (std::size_t i = 0; i < conn_count && slot < fds.size(); ++i, ++slot) {
            Connection& conn = *connections_[i];
            if (!(fds[slot].revents & (POLLIN | POLLHUP))) continue;
            const ssize_t n = ::recv(conn.fd, chunk.data(), chunk.size(), 0);
            if (n <= 0) {
                conn.closed = true;
                continue;
            }
            conn.buffer.insert(conn.buffer.end(), chunk.begin(), chunk.begin() + n);
            pump_connection(conn);
        }
        std::erase_if(connections_, [](const std::unique_ptr<Connection>& conn) {
            if (conn->closed && conn->fd >= 0) ::close(conn->fd);
            return conn->closed;
        });
    }
    return true;
}

} // namespace porch::tcp
