#pragma once

#include "tmm/harness.hpp"

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

namespace tmm {

/// One client link as the session service sees it. Transports implement send.
class Connection {
public:
    virtual ~Connection() = default;
    virtual void send(const nlohmann::json& message) = 0;
};

/// In-memory connection; tests read what the server sent.
class QueueConnection final : public Connection {
public:
    void send(const nlohmann::json& message) override;
    std::optional<nlohmann::json> pop(std::chrono::milliseconds timeout);
    /// Pops until a message of `type` arrives, or nothing within the timeout.
    std::optional<nlohmann::json> pop_until(const std::string& type, std::chrono::milliseconds timeout);

private:
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<nlohmann::json> queue_;
};

struct SessionConfig {
    std::vector<LayoutPtr> practice_layouts;  // 2 expected
    std::vector<LayoutPtr> trial_layouts;     // 4 expected
    QuestionBank bank;
    std::filesystem::path log_dir = "logs";
    std::chrono::milliseconds tick_interval{100};
    std::chrono::milliseconds resume_grace{30000};
    std::chrono::milliseconds question_timeout{30000};
    VisibilityRegion user_region = parse_region("D4");
    VisibilityRegion robot_region = full_region();
    RobotConfig robot_config;
    QuerySchedule schedule;
    std::uint64_t seed = 1;
};

/// Picks the practice and trial layouts from a directory by file-name prefix.
SessionConfig session_config_from_dir(const std::filesystem::path& layout_dir, QuestionBank bank);

enum class SessionPhase : std::uint8_t { Running, Disconnected, Done, Abandoned };

struct SessionSummary {
    std::string id;
    SessionPhase phase = SessionPhase::Running;
    int trial = 0;
    std::vector<std::filesystem::path> logs;
};

/// User-visible render model of one tick: the user's visible cells plus the
/// always-visible floorplan, agent poses and appliances.
nlohmann::json render_frame(const WorldState& state, const VisibilityRegion& user_region);

/// Transport-agnostic live-play service. Every session runs its game loop on
/// its own thread; messages go out through the session's current connection.
class SessionService {
public:
    explicit SessionService(SessionConfig config);
    ~SessionService();
    SessionService(const SessionService&) = delete;
    SessionService& operator=(const SessionService&) = delete;

    /// Entry point for every client message arriving on `conn`.
    void handle(const nlohmann::json& message, const std::shared_ptr<Connection>& conn);
    /// The transport lost `conn`.
    void disconnected(const std::shared_ptr<Connection>& conn);

    std::optional<SessionSummary> summary(const std::string& id) const;
    /// Waits for the session to reach Done or Abandoned.
    bool wait_finished(const std::string& id, std::chrono::milliseconds timeout) const;
    void stop();

private:
    struct Session;

    void run(const std::shared_ptr<Session>& s);
    void send(Session& s, nlohmann::json message);
    void reply_error(const std::shared_ptr<Connection>& conn, const std::string& session, const std::string& code,
                     const std::string& message);

    SessionConfig config_;
    mutable std::mutex mu_;
    mutable std::condition_variable finished_cv_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
    std::vector<std::thread> threads_;
    int created_ = 0;
    bool stopping_ = false;
};

// ---- TCP transport: 4-byte big-endian length prefix + JSON body ------------

inline constexpr std::uint32_t kMaxFrameBytes = 1U << 20;

class TcpServer {
public:
    /// Port 0 picks an ephemeral port.
    TcpServer(SessionService& service, std::uint16_t port, const std::string& bind_address = "127.0.0.1");
    ~TcpServer();
    std::uint16_t port() const { return port_; }
    void stop();

private:
    class Link;
    void accept_loop();

    SessionService& service_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::thread accept_thread_;
    std::mutex mu_;
    std::vector<std::shared_ptr<Link>> links_;
    std::vector<std::thread> readers_;
    bool stopped_ = false;
};

class TcpClient {
public:
    TcpClient(const std::string& host, std::uint16_t port);
    ~TcpClient();
    void send(const nlohmann::json& message);
    /// Nothing on timeout; throws TransportError once the server closed.
    std::optional<nlohmann::json> receive(std::chrono::milliseconds timeout);
    void close();

private:
    int fd_ = -1;
    std::string buffer_;
};

}  // namespace tmm
