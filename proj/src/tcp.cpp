#include "tmm/errors.hpp"
#include "tmm/session.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace tmm {

namespace {

void write_all(int fd, const char* data, std::size_t n) {
    while (n > 0) {
        const ssize_t w = ::send(fd, data, n, MSG_NOSIGNAL);
        if (w < 0) {
            if (errno == EINTR) continue;
            throw TransportError(std::string("tcp: send failed: ") + std::strerror(errno));
        }
        data += w;
        n -= static_cast<std::size_t>(w);
    }
}

std::string encode(const nlohmann::json& message) {
    const std::string body = message.dump();
    if (body.size() > kMaxFrameBytes) throw TransportError("tcp: frame too large");
    const auto n = static_cast<std::uint32_t>(body.size());
    std::string out(4, '\0');
    out[0] = static_cast<char>((n >> 24) & 0xff);
    out[1] = static_cast<char>((n >> 16) & 0xff);
    out[2] = static_cast<char>((n >> 8) & 0xff);
    out[3] = static_cast<char>(n & 0xff);
    return out + body;
}

/// Pulls one complete frame off the front of `buffer`, if there is one.
std::optional<std::string> take_frame(std::string& buffer) {
    if (buffer.size() < 4) return std::nullopt;
    const auto b = [&](int i) { return static_cast<std::uint32_t>(static_cast<unsigned char>(buffer[static_cast<std::size_t>(i)])); };
    const std::uint32_t n = (b(0) << 24) | (b(1) << 16) | (b(2) << 8) | b(3);
    if (n > kMaxFrameBytes) throw TransportError("tcp: oversized frame");
    if (buffer.size() < 4 + n) return std::nullopt;
    std::string body = buffer.substr(4, n);
    buffer.erase(0, 4 + n);
    return body;
}

}  // namespace

class TcpServer::Link final : public Connection {
public:
    explicit Link(int fd) : fd_(fd) {}
    ~Link() override { close(); }

    void send(const nlohmann::json& message) override {
        const std::string frame = encode(message);
        std::lock_guard lock(mu_);
        if (fd_ < 0) return;
        try {
            write_all(fd_, frame.data(), frame.size());
        } catch (const TransportError&) {
            ::shutdown(fd_, SHUT_RDWR);  // reader notices and reports the disconnect
        }
    }

    void shutdown() {
        std::lock_guard lock(mu_);
        if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
    }

    void close() {
        std::lock_guard lock(mu_);
        if (fd_ >= 0) ::close(fd_);
        fd_ = -1;
    }

    int fd() const { return fd_; }

private:
    std::mutex mu_;
    int fd_;
};

TcpServer::TcpServer(SessionService& service, std::uint16_t port, const std::string& bind_address)
    : service_(service) {
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw TransportError("tcp: socket failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr) != 1) {
        ::close(listen_fd_);
        throw ConfigError("tcp: bad bind address " + bind_address);
    }
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 || ::listen(listen_fd_, 16) != 0) {
        const std::string why = std::strerror(errno);
        ::close(listen_fd_);
        throw TransportError("tcp: cannot listen on port " + std::to_string(port) + ": " + why);
    }
    socklen_t len = sizeof addr;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&addr), &len);
    port_ = ntohs(addr.sin_port);
    accept_thread_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

void TcpServer::stop() {
    std::vector<std::thread> readers;
    {
        std::lock_guard lock(mu_);
        if (stopped_) return;
        stopped_ = true;
        ::shutdown(listen_fd_, SHUT_RDWR);
        for (auto& l : links_) l->shutdown();
        readers.swap(readers_);
    }
    if (accept_thread_.joinable()) accept_thread_.join();
    for (auto& t : readers) t.join();
    ::close(listen_fd_);
}

void TcpServer::accept_loop() {
    for (;;) {
        const int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            return;
        }
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        auto link = std::make_shared<Link>(fd);
        std::lock_guard lock(mu_);
        if (stopped_) return;
        links_.push_back(link);
        readers_.emplace_back([this, link] {
            std::string buffer;
            char chunk[4096];
            try {
                for (;;) {
                    const ssize_t r = ::recv(link->fd(), chunk, sizeof chunk, 0);
                    if (r <= 0) break;
                    buffer.append(chunk, static_cast<std::size_t>(r));
                    while (auto body = take_frame(buffer)) {
                        nlohmann::json message;
                        try {
                            message = nlohmann::json::parse(*body);
                        } catch (const nlohmann::json::parse_error&) {
                            link->send({{"type", "error"}, {"seq", 0}, {"code", "bad-json"}, {"message", "unparseable frame"}});
                            continue;
                        }
                        service_.handle(message, link);
                    }
                }
            } catch (const TransportError&) {
            }
            service_.disconnected(link);
            link->close();
        });
    }
}

TcpClient::TcpClient(const std::string& host, std::uint16_t port) {
    fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd_ < 0) throw TransportError("tcp: socket failed");
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(port);
    if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1 ||
        ::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
        ::close(fd_);
        fd_ = -1;
        throw TransportError("tcp: cannot connect to " + host + ":" + std::to_string(port));
    }
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

TcpClient::~TcpClient() { close(); }

void TcpClient::close() {
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
}

void TcpClient::send(const nlohmann::json& message) {
    if (fd_ < 0) throw TransportError("tcp: client closed");
    const std::string frame = encode(message);
    write_all(fd_, frame.data(), frame.size());
}

std::optional<nlohmann::json> TcpClient::receive(std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        if (auto body = take_frame(buffer_)) return nlohmann::json::parse(*body);
        if (fd_ < 0) throw TransportError("tcp: client closed");
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return std::nullopt;
        pollfd p{fd_, POLLIN, 0};
        const int ready = ::poll(&p, 1, static_cast<int>(left.count()));
        if (ready < 0 && errno == EINTR) continue;
        if (ready <= 0) return std::nullopt;
        char chunk[4096];
        const ssize_t r = ::recv(fd_, chunk, sizeof chunk, 0);
        if (r <= 0) throw TransportError("tcp: server closed the connection");
        buffer_.append(chunk, static_cast<std::size_t>(r));
    }
}

}  // namespace tmm
