#include "tmm/session.hpp"

#include "tmm/digest.hpp"
#include "tmm/errors.hpp"

#include <random>

namespace tmm {

void QueueConnection::send(const nlohmann::json& message) {
    {
        std::lock_guard lock(mu_);
        queue_.push_back(message);
    }
    cv_.notify_all();
}

std::optional<nlohmann::json> QueueConnection::pop(std::chrono::milliseconds timeout) {
    std::unique_lock lock(mu_);
    if (!cv_.wait_for(lock, timeout, [&] { return !queue_.empty(); })) return std::nullopt;
    nlohmann::json m = std::move(queue_.front());
    queue_.pop_front();
    return m;
}

std::optional<nlohmann::json> QueueConnection::pop_until(const std::string& type, std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
        const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) return std::nullopt;
        auto m = pop(left);
        if (!m) return std::nullopt;
        if (m->value("type", "") == type) return m;
    }
}

SessionConfig session_config_from_dir(const std::filesystem::path& layout_dir, QuestionBank bank) {
    SessionConfig config;
    config.bank = std::move(bank);
    for (auto& l : load_layout_dir(layout_dir)) {
        auto ptr = std::make_shared<const Layout>(std::move(l));
        if (ptr->name.rfind("practice", 0) == 0) config.practice_layouts.push_back(ptr);
        else config.trial_layouts.push_back(ptr);
    }
    if (config.practice_layouts.size() != 2 || config.trial_layouts.size() != 4)
        throw ConfigError("serve: expected 2 practice and 4 trial layouts in " + layout_dir.string() + ", found " +
                          std::to_string(config.practice_layouts.size()) + " and " +
                          std::to_string(config.trial_layouts.size()));
    return config;
}

namespace {

nlohmann::json item_json(Cell c, const SceneItem& item) {
    nlohmann::json j{{"x", c.x}, {"y", c.y}, {"class", to_string(item.cls)}};
    if (item.cls == ItemClass::Soup) {
        nlohmann::json contents = nlohmann::json::array();
        for (auto k : item.soup_contents) contents.push_back(to_string(k));
        j["contents"] = contents;
        j["plated"] = item.plated;
    }
    return j;
}

}  // namespace

nlohmann::json render_frame(const WorldState& state, const VisibilityRegion& user_region) {
    const ObservationSet obs = filter_observations(state, AgentId::Human, user_region);
    const Layout& layout = *state.layout;
    nlohmann::json tiles = nlohmann::json::array();
    for (int y = 0; y < layout.height; ++y) {
        std::string row;
        for (int x = 0; x < layout.width; ++x) row += tile_char(layout.tile({x, y}));
        tiles.push_back(row);
    }
    nlohmann::json visible = nlohmann::json::array();
    for (Cell c : obs.visible_cells) visible.push_back({c.x, c.y});
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& a : obs.agents) {
        nlohmann::json j{{"id", to_string(a.id)}, {"x", a.cell.x}, {"y", a.cell.y}, {"facing", to_string(a.facing)}};
        if (a.hand_visible) j["held"] = a.held ? item_json(a.cell, *a.held) : nlohmann::json(nullptr);
        agents.push_back(j);
    }
    nlohmann::json items = nlohmann::json::array();
    for (const auto& [cell, item] : obs.items) items.push_back(item_json(cell, item));
    nlohmann::json pots = nlohmann::json::array();
    for (const auto& p : obs.pots) {
        nlohmann::json j{{"x", p.cell.x}, {"y", p.cell.y}};
        if (p.contents_visible) {
            nlohmann::json contents = nlohmann::json::array();
            for (auto k : p.contents) contents.push_back(to_string(k));
            j["contents"] = contents;
            j["phase"] = to_string(p.phase);
            j["cook_ticks_remaining"] = p.cook_ticks_remaining;
        }
        pots.push_back(j);
    }
    return {{"tick", state.tick},  {"width", layout.width}, {"height", layout.height}, {"tiles", tiles},
            {"visible", visible},  {"agents", agents},      {"items", items},          {"pots", pots}};
}

struct SessionService::Session {
    std::string id;
    std::string token;
    std::string user;
    int number = 0;

    std::mutex mu;
    std::condition_variable cv;
    std::shared_ptr<Connection> conn;
    long out_seq = 0;
    long in_seq = 0;
    std::deque<Action> actions;
    std::optional<SAQuestion> open_question;
    std::optional<std::string> answer;
    SessionPhase phase = SessionPhase::Running;
    std::chrono::steady_clock::time_point disconnected_at;
    bool stop = false;
    int trial = 0;
    int tick = 0;  // of the last frame sent
    nlohmann::json last_frame;
    std::vector<std::filesystem::path> logs;
};

SessionService::SessionService(SessionConfig config) : config_(std::move(config)) {
    if (config_.practice_layouts.empty() && config_.trial_layouts.empty())
        throw ConfigError("serve: no layouts configured");
}

SessionService::~SessionService() { stop(); }

void SessionService::stop() {
    std::vector<std::thread> threads;
    {
        std::lock_guard lock(mu_);
        if (stopping_ && threads_.empty()) return;
        stopping_ = true;
        for (auto& [id, s] : sessions_) {
            std::lock_guard sl(s->mu);
            s->stop = true;
            s->cv.notify_all();
        }
        threads.swap(threads_);
    }
    for (auto& t : threads) t.join();
}

void SessionService::send(Session& s, nlohmann::json message) {
    message["session"] = s.id;
    message["seq"] = ++s.out_seq;
    if (s.conn) s.conn->send(message);
}

void SessionService::reply_error(const std::shared_ptr<Connection>& conn, const std::string& session,
                                 const std::string& code, const std::string& message) {
    if (conn)
        conn->send({{"type", "error"}, {"session", session}, {"seq", 0}, {"code", code}, {"message", message}});
}

void SessionService::handle(const nlohmann::json& message, const std::shared_ptr<Connection>& conn) {
    const std::string type = message.is_object() ? message.value("type", "") : "";
    if (type == "session-create") {
        auto s = std::make_shared<Session>();
        {
            std::lock_guard lock(mu_);
            if (stopping_) return reply_error(conn, "", "stopping", "service is shutting down");
            s->number = ++created_;
            s->id = "s" + std::to_string(s->number);
            std::random_device rd;
            s->token = sha256_hex(s->id + ":" + std::to_string(rd()) + ":" + std::to_string(rd())).substr(0, 32);
            s->user = message.value("user", "anonymous");
            s->conn = conn;
            if (message.contains("seq") && message["seq"].is_number_integer()) s->in_seq = message["seq"].get<long>();
            sessions_[s->id] = s;
        }
        nlohmann::json plan = nlohmann::json::array();
        for (const auto& l : config_.practice_layouts) plan.push_back({{"layout", l->name}, {"practice", true}});
        for (const auto& l : config_.trial_layouts) plan.push_back({{"layout", l->name}, {"practice", false}});
        {
            std::lock_guard sl(s->mu);
            send(*s, {{"type", "session-created"},
                      {"resume_token", s->token},
                      {"user", s->user},
                      {"plan", plan},
                      {"tick_interval_ms", config_.tick_interval.count()}});
        }
        std::lock_guard lock(mu_);
        threads_.emplace_back([this, s] { run(s); });
        return;
    }

    const std::string id = message.is_object() && message.contains("session") && message["session"].is_string()
                               ? message["session"].get<std::string>()
                               : "";
    std::shared_ptr<Session> s;
    {
        std::lock_guard lock(mu_);
        if (auto it = sessions_.find(id); it != sessions_.end()) s = it->second;
    }
    if (!s) return reply_error(conn, id, "unknown-session", "no session '" + id + "'");

    std::lock_guard sl(s->mu);
    if (!message.contains("seq") || !message["seq"].is_number_integer() || message["seq"].get<long>() <= s->in_seq)
        return reply_error(conn, id, "stale-seq", "sequence numbers must increase");
    s->in_seq = message["seq"].get<long>();

    if (type == "resume") {
        if (message.value("token", "") != s->token) return reply_error(conn, id, "bad-token", "resume token mismatch");
        if (s->phase == SessionPhase::Done || s->phase == SessionPhase::Abandoned)
            return reply_error(conn, id, "session-over", "session already ended");
        s->conn = conn;
        s->phase = SessionPhase::Running;
        send(*s, {{"type", "resumed"}, {"trial", s->trial}});
        if (!s->last_frame.is_null()) send(*s, s->last_frame);
        if (s->open_question)
            send(*s, {{"type", "query-open"},
                      {"question", s->open_question->id},
                      {"text", s->open_question->text},
                      {"choices", s->open_question->choices},
                      {"deadline_ms", config_.question_timeout.count()}});
        s->cv.notify_all();
        return;
    }
    if (conn != s->conn) return reply_error(conn, id, "not-attached", "connection is not attached to the session");

    auto error = [&](const std::string& code, const std::string& text) {
        send(*s, {{"type", "error"}, {"code", code}, {"message", text}});
    };
    if (type == "action") {
        if (s->phase != SessionPhase::Running) return error("not-running", "session is not running");
        if (s->open_question) return error("paused", "game is paused for a question");
        if (message.contains("trial") && (!message["trial"].is_number_integer() || message["trial"].get<int>() != s->trial))
            return error("stale-trial", "action is for another trial");
        if (!message.contains("tick") || !message["tick"].is_number_integer() || message["tick"].get<int>() > s->tick)
            return error("bad-tick", "action must carry the tick of a frame already sent");
        const auto a = message.contains("action") && message["action"].is_string()
                           ? parse_action(message["action"].get<std::string>())
                           : std::nullopt;
        if (!a) return error("bad-action", "unknown action code");
        if (s->actions.size() >= 64) return error("overflow", "too many queued actions");
        s->actions.push_back(*a);
    } else if (type == "query-answer") {
        const std::string q = message.value("question", "");
        if (!s->open_question || s->open_question->id != q || s->answer)
            return error("no-pending-question", "question '" + q + "' is not pending");
        if (message.contains("tick") && (!message["tick"].is_number_integer() || message["tick"].get<int>() != s->tick))
            return error("bad-tick", "answer is for another pause");
        std::string label;
        if (message.contains("answer") && message["answer"].is_string()) label = message["answer"].get<std::string>();
        if (!label.empty() && !s->open_question->has_choice(label))
            return error("bad-choice", "'" + label + "' is not a choice");
        s->answer = label;
        s->cv.notify_all();
    } else {
        error("unknown-type", "unknown message type '" + type + "'");
    }
}

void SessionService::disconnected(const std::shared_ptr<Connection>& conn) {
    std::vector<std::shared_ptr<Session>> all;
    {
        std::lock_guard lock(mu_);
        for (auto& [id, s] : sessions_) all.push_back(s);
    }
    for (auto& s : all) {
        std::lock_guard sl(s->mu);
        if (s->conn != conn) continue;
        s->conn.reset();
        if (s->phase == SessionPhase::Running) {
            s->phase = SessionPhase::Disconnected;
            s->disconnected_at = std::chrono::steady_clock::now();
        }
        s->cv.notify_all();
    }
}

std::optional<SessionSummary> SessionService::summary(const std::string& id) const {
    std::shared_ptr<Session> s;
    {
        std::lock_guard lock(mu_);
        auto it = sessions_.find(id);
        if (it == sessions_.end()) return std::nullopt;
        s = it->second;
    }
    std::lock_guard sl(s->mu);
    return SessionSummary{s->id, s->phase, s->trial, s->logs};
}

bool SessionService::wait_finished(const std::string& id, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mu_);
    return finished_cv_.wait_for(lock, timeout, [&] {
        auto it = sessions_.find(id);
        if (it == sessions_.end()) return false;
        std::lock_guard sl(it->second->mu);
        return it->second->phase == SessionPhase::Done || it->second->phase == SessionPhase::Abandoned;
    });
}

void SessionService::run(const std::shared_ptr<Session>& sp) {
    Session& s = *sp;
    using clock = std::chrono::steady_clock;
    std::vector<std::pair<LayoutPtr, bool>> plan;
    for (const auto& l : config_.practice_layouts) plan.emplace_back(l, true);
    for (const auto& l : config_.trial_layouts) plan.emplace_back(l, false);

    auto persist = [&](Episode& ep, int trial) {
        const auto path = config_.log_dir / (s.id + "_trial" + std::to_string(trial) + "_" + ep.spec().layout->name + ".jsonl");
        save_log(ep.log(), path);
        s.logs.push_back(path);
        return path;
    };
    auto end_session = [&](SessionPhase phase) {
        {
            std::lock_guard lock(s.mu);
            s.phase = phase;
            if (phase == SessionPhase::Done) send(s, {{"type", "session-complete"}, {"logs", s.logs.size()}});
        }
        std::lock_guard lock(mu_);
        finished_cv_.notify_all();
    };

    for (std::size_t i = 0; i < plan.size(); ++i) {
        EpisodeSpec spec;
        spec.layout = plan[i].first;
        spec.practice = plan[i].second;
        spec.trial = static_cast<int>(i);
        spec.seed = config_.seed + 1000ULL * static_cast<std::uint64_t>(s.number) + i;
        spec.human_policy = "client";
        spec.robot_policy = "robot";
        spec.robot_region = config_.robot_region;
        spec.human_region = config_.user_region;
        spec.robot_config = config_.robot_config;
        spec.schedule = config_.schedule;
        spec.episode_id = s.id + "-" + std::to_string(i);
        spec.user_id = s.user;
        Episode ep(spec, std::make_unique<NoopPolicy>(), std::make_unique<RobotPolicy>(AgentId::Robot, config_.robot_config),
                   config_.bank);

        std::unique_lock lock(s.mu);
        s.trial = static_cast<int>(i);
        s.actions.clear();
        auto frame = [&] {
            nlohmann::json f = render_frame(ep.state(), config_.user_region);
            f["type"] = "state-frame";
            f["trial"] = s.trial;
            f["practice"] = spec.practice;
            s.last_frame = f;
            s.tick = ep.state().tick;
            send(s, f);
        };
        send(s, {{"type", "trial-start"},
                 {"trial", s.trial},
                 {"practice", spec.practice},
                 {"layout", layout_to_json(*spec.layout)}});
        frame();

        clock::time_point opened{};
        for (;;) {
            if (s.stop) {
                ep.finish("stopped", false, "service stopped");
                persist(ep, s.trial);
                lock.unlock();
                return end_session(SessionPhase::Abandoned);
            }
            if (s.phase == SessionPhase::Disconnected) {
                const auto deadline = s.disconnected_at + config_.resume_grace;
                s.cv.wait_until(lock, deadline, [&] { return s.stop || s.phase != SessionPhase::Disconnected; });
                if (s.phase == SessionPhase::Disconnected && !s.stop && clock::now() >= deadline) {
                    ep.finish("abandoned", false, "client did not resume within the grace period");
                    persist(ep, s.trial);
                    lock.unlock();
                    return end_session(SessionPhase::Abandoned);
                }
                continue;
            }
            if (ep.paused()) {
                const SAQuestion q = ep.pending().front();
                if (!s.open_question) {
                    s.open_question = q;
                    s.answer.reset();
                    opened = clock::now();
                    send(s, {{"type", "query-open"},
                             {"question", q.id},
                             {"text", q.text},
                             {"choices", q.choices},
                             {"tick", ep.state().tick},
                             {"deadline_ms", config_.question_timeout.count()}});
                }
                const bool got = s.cv.wait_until(lock, opened + config_.question_timeout, [&] {
                    return s.stop || s.answer.has_value() || s.phase != SessionPhase::Running;
                });
                if (s.stop || s.phase != SessionPhase::Running) continue;
                const long pause_ms =
                    std::chrono::duration_cast<std::chrono::milliseconds>(clock::now() - opened).count();
                const std::string label = got ? *s.answer : std::string();
                ep.answer(q.id, label, pause_ms);
                send(s, {{"type", "query-ack"},
                         {"question", q.id},
                         {"answer", label.empty() ? nlohmann::json(nullptr) : nlohmann::json(label)},
                         {"timed_out", !got}});
                s.open_question.reset();
                s.answer.reset();
                continue;
            }
            if (ep.finished()) break;

            s.cv.wait_for(lock, config_.tick_interval, [&] { return s.stop || s.phase != SessionPhase::Running; });
            if (s.stop || s.phase != SessionPhase::Running) continue;
            Action a = Action::wait();
            if (!s.actions.empty()) {
                a = s.actions.front();
                s.actions.pop_front();
            }
            ep.advance(a);
            frame();
        }
        ep.finish("terminal");
        const auto path = persist(ep, s.trial);
        send(s, {{"type", "trial-complete"},
                 {"trial", s.trial},
                 {"practice", spec.practice},
                 {"delivered", ep.state().delivered_soups.size()},
                 {"log", path.string()}});
    }
    end_session(SessionPhase::Done);
}

}  // namespace tmm
