#include "tmm/harness.hpp"

#include "tmm/digest.hpp"
#include "tmm/errors.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace tmm {

namespace {

nlohmann::json config_json(const LogHeader& h) {
    return {{"format_version", h.format_version},
            {"layout", layout_to_json(*h.layout)},
            {"seed", h.seed},
            {"regions", {{"robot", h.robot_region.label()}, {"human", h.human_region.label()}}},
            {"policies", {{"human", h.human_policy}, {"robot", h.robot_policy}}},
            {"robot_config", {{"dish_lead_ticks", h.robot_config.dish_lead_ticks}}},
            {"schedule",
             {{"period_ticks", h.schedule.period_ticks}, {"max_questions", h.schedule.max_questions_per_pause}}}};
}

nlohmann::json action_json(const std::optional<Action>& a) {
    return a ? nlohmann::json(to_string(*a)) : nlohmann::json(nullptr);
}

Action parse_logged_action(const nlohmann::json& j, int tick) {
    const auto a = parse_action(j.get<std::string>());
    if (!a) throw CorruptionError("log: unknown action code", tick);
    return *a;
}

}  // namespace

std::string config_hash(const LogHeader& header) { return sha256_hex(config_json(header).dump()); }

void write_log(const ReplayLog& log, std::ostream& out) {
    nlohmann::json header = config_json(log.header);
    header["type"] = "header";
    header["config_hash"] = log.header.config_hash;
    header["episode"] = log.header.episode_id;
    header["user"] = log.header.user_id;
    header["practice"] = log.header.practice;
    header["trial"] = log.header.trial;
    out << header.dump() << '\n';

    std::multimap<int, const QueryEvent*> by_tick;
    for (const auto& q : log.queries) by_tick.emplace(q.tick, &q);
    for (const auto& f : log.frames) {
        nlohmann::json actions = nullptr;
        if (f.human || f.robot) actions = {{"human", action_json(f.human)}, {"robot", action_json(f.robot)}};
        out << nlohmann::json{{"type", "frame"}, {"tick", f.state.tick}, {"state", to_json(f.state)}, {"actions", actions}}.dump()
            << '\n';
        auto [lo, hi] = by_tick.equal_range(f.state.tick);
        for (auto it = lo; it != hi; ++it) {
            const QueryEvent& q = *it->second;
            out << nlohmann::json{{"type", "query"},
                                  {"tick", q.tick},
                                  {"question", q.question_id},
                                  {"answer", q.answer.empty() ? nlohmann::json(nullptr) : nlohmann::json(q.answer)},
                                  {"pause_ms", q.pause_ms}}
                       .dump()
                << '\n';
        }
    }
    if (log.footer)
        out << nlohmann::json{{"type", "footer"},
                              {"reason", log.footer->reason},
                              {"complete", log.footer->complete},
                              {"diagnostic", log.footer->diagnostic}}
                   .dump()
            << '\n';
}

std::string log_text(const ReplayLog& log) {
    std::ostringstream out;
    write_log(log, out);
    return out.str();
}

void save_log(const ReplayLog& log, const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const auto tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("log: cannot write " + tmp);
        write_log(log, out);
    }
    std::filesystem::rename(tmp, path);
}

ReplayLog read_log(std::istream& in) {
    ReplayLog log;
    std::string line;
    bool have_header = false;
    int last_tick = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error&) {
            throw CorruptionError("log: malformed record", last_tick + 1);
        }
        try {
            const std::string type = j.at("type").get<std::string>();
            if (type == "header") {
                const int version = j.at("format_version").get<int>();
                if (version != kLogFormatVersion)
                    throw UnsupportedVersionError("log: format version " + std::to_string(version) +
                                                  " is not supported (expected " +
                                                  std::to_string(kLogFormatVersion) + ")");
                LogHeader& h = log.header;
                h.format_version = version;
                h.layout = std::make_shared<const Layout>(layout_from_json(j.at("layout")));
                h.seed = j.at("seed").get<std::uint64_t>();
                h.robot_region = parse_region(j.at("regions").at("robot").get<std::string>());
                h.human_region = parse_region(j.at("regions").at("human").get<std::string>());
                h.human_policy = j.at("policies").at("human").get<std::string>();
                h.robot_policy = j.at("policies").at("robot").get<std::string>();
                h.robot_config.dish_lead_ticks = j.at("robot_config").at("dish_lead_ticks").get<int>();
                h.schedule.period_ticks = j.at("schedule").at("period_ticks").get<int>();
                h.schedule.max_questions_per_pause = j.at("schedule").at("max_questions").get<int>();
                h.config_hash = j.at("config_hash").get<std::string>();
                h.episode_id = j.value("episode", "");
                h.user_id = j.value("user", "");
                h.practice = j.value("practice", false);
                h.trial = j.value("trial", 0);
                have_header = true;
            } else if (!have_header) {
                throw CorruptionError("log: record before header", 0);
            } else if (type == "frame") {
                LogFrame f;
                const int tick = j.at("tick").get<int>();
                f.state = world_from_json(j.at("state"), log.header.layout);
                if (f.state.tick != tick || tick != last_tick + 1) throw CorruptionError("log: frames not dense", tick);
                if (!j.at("actions").is_null()) {
                    f.human = parse_logged_action(j.at("actions").at("human"), tick);
                    f.robot = parse_logged_action(j.at("actions").at("robot"), tick);
                }
                last_tick = tick;
                log.frames.push_back(std::move(f));
            } else if (type == "query") {
                QueryEvent q;
                q.tick = j.at("tick").get<int>();
                q.question_id = j.at("question").get<std::string>();
                if (!j.at("answer").is_null()) q.answer = j.at("answer").get<std::string>();
                q.pause_ms = j.at("pause_ms").get<long>();
                log.queries.push_back(std::move(q));
            } else if (type == "footer") {
                log.footer = LogFooter{j.at("reason").get<std::string>(), j.at("complete").get<bool>(),
                                       j.value("diagnostic", "")};
            } else {
                throw CorruptionError("log: unknown record type '" + type + "'", last_tick + 1);
            }
        } catch (const nlohmann::json::exception& e) {
            throw CorruptionError(std::string("log: bad record: ") + e.what(), last_tick + 1);
        } catch (const ConfigError& e) {
            throw CorruptionError(std::string("log: bad record: ") + e.what(), last_tick + 1);
        }
    }
    if (!have_header) throw CorruptionError("log: missing header", 0);
    return log;
}

ReplayLog parse_log(const std::string& text) {
    std::istringstream in(text);
    return read_log(in);
}

ReplayLog load_log(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("log: cannot open " + path.string());
    return read_log(in);
}

std::vector<WorldState> replay(const ReplayLog& log) {
    if (config_hash(log.header) != log.header.config_hash)
        throw CorruptionError("replay: header config hash mismatch", 0);
    if (log.frames.empty()) throw CorruptionError("replay: no frames", 0);
    std::vector<WorldState> out;
    WorldState w = init_game(log.header.layout, log.header.seed);
    for (std::size_t i = 0; i < log.frames.size(); ++i) {
        const LogFrame& f = log.frames[i];
        if (canonical_text(w) != canonical_text(f.state)) throw CorruptionError("replay: frame diverges", f.state.tick);
        out.push_back(w);
        if (i + 1 == log.frames.size()) break;
        if (!f.human || !f.robot) throw CorruptionError("replay: missing actions", f.state.tick);
        w = step(w, {{AgentId::Human, *f.human}, {AgentId::Robot, *f.robot}}).state;
    }
    return out;
}

std::vector<Action> human_trace(const ReplayLog& log) {
    std::vector<Action> out;
    for (const auto& f : log.frames)
        if (f.human) out.push_back(*f.human);
    return out;
}

LogHeader make_header(const EpisodeSpec& spec) {
    if (!spec.layout) throw ConfigError("episode: no layout");
    LogHeader h;
    h.layout = spec.layout;
    h.seed = spec.seed;
    h.robot_region = spec.robot_region;
    h.human_region = spec.human_region;
    h.human_policy = spec.human_policy;
    h.robot_policy = spec.robot_policy;
    h.robot_config = spec.robot_config;
    h.schedule = spec.schedule;
    h.episode_id = spec.episode_id;
    h.user_id = spec.user_id;
    h.practice = spec.practice;
    h.trial = spec.trial;
    h.config_hash = config_hash(h);
    return h;
}

Episode::Episode(EpisodeSpec spec, std::unique_ptr<Policy> human, std::unique_ptr<Policy> robot,
                 const QuestionBank& bank)
    : spec_(std::move(spec)),
      human_(std::move(human)),
      robot_(std::move(robot)),
      bank_(bank),
      state_(init_game(spec_.layout, spec_.seed)),
      robot_belief_(init_belief(state_)),
      human_belief_(init_belief(state_)),
      query_rng_(spec_.seed ^ 0x5a17e0c3d2b14f69ULL) {
    if (!human_ || !robot_) throw ConfigError("episode: both policies are required");
    log_.header = make_header(spec_);
    log_.frames.push_back({state_, std::nullopt, std::nullopt});
    arrive();
}

void Episode::arrive() { pending_ = schedule_queries(state_.tick, spec_.schedule, bank_, query_rng_); }

void Episode::answer(const std::string& question_id, const std::string& label, long pause_ms) {
    if (pending_.empty() || pending_.front().id != question_id)
        throw ProtocolError("no pending question '" + question_id + "'");
    if (!label.empty() && !pending_.front().has_choice(label))
        throw ProtocolError("'" + label + "' is not a choice of '" + question_id + "'");
    log_.queries.push_back({state_.tick, question_id, label, pause_ms});
    pending_.erase(pending_.begin());
}

std::vector<EnvironmentEvent> Episode::advance(std::optional<Action> human_action) {
    if (paused()) throw LifecycleError("episode: questions are pending");
    if (is_terminal(state_)) throw LifecycleError("episode: already over");
    const Action h = human_action ? *human_action : human_->next(human_belief_, AgentId::Human);
    const Action r = robot_->next(robot_belief_, AgentId::Robot);
    log_.frames.back().human = h;
    log_.frames.back().robot = r;
    StepResult res = step(state_, {{AgentId::Human, h}, {AgentId::Robot, r}});
    state_ = std::move(res.state);
    robot_belief_ = update_belief(robot_belief_, filter_observations(state_, AgentId::Robot, spec_.robot_region));
    human_belief_ = update_belief(human_belief_, filter_observations(state_, AgentId::Human, spec_.human_region));
    log_.frames.push_back({state_, std::nullopt, std::nullopt});
    arrive();
    return std::move(res.events);
}

ReplayLog& Episode::finish(const std::string& reason, bool complete, std::string diagnostic) {
    if (!log_.footer) log_.footer = LogFooter{reason, complete, std::move(diagnostic)};
    return log_;
}

std::optional<HumanProxy> parse_proxy(std::string_view s) {
    if (s == "perfect") return HumanProxy::PerfectRecall;
    if (s == "filtered") return HumanProxy::FilteredMemory;
    if (s == "random") return HumanProxy::Random;
    return std::nullopt;
}

ReplayLog run_scripted_episode(const EpisodeSpec& spec, const QuestionBank& bank, HumanProxy proxy) {
    return run_scripted_episode(spec, make_policy(spec.human_policy, AgentId::Human, spec.seed, spec.robot_config),
                                make_policy(spec.robot_policy, AgentId::Robot, spec.seed, spec.robot_config), bank,
                                proxy);
}

ReplayLog run_scripted_episode(const EpisodeSpec& spec, std::unique_ptr<Policy> human, std::unique_ptr<Policy> robot,
                               const QuestionBank& bank, HumanProxy proxy) {
    Episode ep(spec, std::move(human), std::move(robot), bank);
    const VisibilityRegion memory = proxy == HumanProxy::FilteredMemory ? parse_region("D4") : full_region();
    BeliefState recall = init_belief(ep.state());
    std::mt19937_64 rng(spec.seed ^ 0x2545f4914f6cdd1dULL);
    try {
        for (;;) {
            while (ep.paused()) {
                const SAQuestion q = ep.pending().front();
                std::string label = proxy == HumanProxy::Random
                                        ? q.choices[rng() % q.choices.size()]
                                        : answer_lp(recall, q, AnswerSource::Human).label;
                ep.answer(q.id, label, 0);
            }
            if (ep.finished()) break;
            ep.advance();
            if (proxy != HumanProxy::Random)
                recall = update_belief(recall, filter_observations(ep.state(), AgentId::Human, memory));
        }
        ep.finish("terminal");
    } catch (const std::exception& e) {
        ep.finish("aborted", false, e.what());
    }
    return ep.log();
}

void reconstruct_beliefs(const ReplayLog& log, const VisibilityRegion& robot_region,
                         const VisibilityRegion& user_region,
                         const std::function<void(const LogFrame&, const BeliefTriple&)>& visit) {
    if (log.frames.empty()) return;
    BeliefState truth = init_belief(log.frames.front().state);
    BeliefState robot = truth;
    BeliefState pred = truth;
    visit(log.frames.front(), {truth, robot, pred});
    for (std::size_t i = 1; i < log.frames.size(); ++i) {
        const WorldState& w = log.frames[i].state;
        truth = update_belief(truth, filter_observations(w, AgentId::Robot, full_region()));
        robot = update_belief(robot, filter_observations(w, AgentId::Robot, robot_region));
        pred = predict_teammate_belief(robot, pred, AgentId::Human, user_region);
        visit(log.frames[i], {truth, robot, pred});
    }
}

std::vector<VisibilityRegion> default_conditions() {
    std::vector<VisibilityRegion> out;
    for (RegionKind k : {RegionKind::V, RegionKind::O, RegionKind::D})
        for (int r : {2, 3, 4, 5}) out.push_back({k, static_cast<double>(r)});
    out.push_back(full_region(RegionKind::O));
    out.push_back(full_region(RegionKind::D));
    return out;
}

SweepReport posthoc_sweep(const std::vector<ReplayLog>& logs, const QuestionBank& bank, const SweepConfig& config) {
    if (config.robot_conditions.empty()) throw ConfigError("sweep: no robot conditions");
    if (config.answerers.empty()) throw ConfigError("sweep: no answerers");
    for (const auto& a : config.answerers) {
        if (a != "lp" && a != "llm") throw ConfigError("sweep: unknown answerer '" + a + "'");
        if (a == "llm" && !config.llm) throw ConfigError("sweep: the llm answerer needs a client");
    }

    std::vector<const ReplayLog*> used;
    for (const auto& l : logs)
        if (config.include_practice || !l.header.practice) used.push_back(&l);

    struct Cell {
        std::size_t condition;
        const ReplayLog* log;
        std::vector<SweepRow> rows;
    };
    std::vector<Cell> cells;
    for (std::size_t c = 0; c < config.robot_conditions.size(); ++c)
        for (const auto* l : used) cells.push_back({c, l, {}});

    auto run_cell = [&](Cell& cell) {
        const ReplayLog& log = *cell.log;
        std::multimap<int, const QueryEvent*> by_tick;
        for (const auto& q : log.queries) by_tick.emplace(q.tick, &q);
        std::vector<std::vector<double>> scores(config.answerers.size());
        std::vector<int> abstentions(config.answerers.size(), 0);

        reconstruct_beliefs(log, config.robot_conditions[cell.condition], config.user_region,
                            [&](const LogFrame& frame, const BeliefTriple& b) {
                                auto [lo, hi] = by_tick.equal_range(frame.state.tick);
                                for (auto it = lo; it != hi; ++it) {
                                    const QueryEvent& ev = *it->second;
                                    const SAQuestion& q = find_question(bank, ev.question_id);
                                    const SAAnswer human{q.id, ev.answer, AnswerSource::Human, ev.tick};
                                    for (std::size_t a = 0; a < config.answerers.size(); ++a) {
                                        SAAnswer mine;
                                        if (config.answerers[a] == "lp") {
                                            mine = answer_lp(b.pred, q);
                                        } else {
                                            try {
                                                mine = answer_llm(b.pred, q, *config.llm);
                                            } catch (const TransportError&) {
                                                mine = {q.id, "", AnswerSource::BetaPredLLM, ev.tick};
                                            }
                                        }
                                        if (mine.abstained()) ++abstentions[a];
                                        scores[a].push_back(score_answer(mine, human, q));
                                    }
                                }
                            });

        for (std::size_t a = 0; a < config.answerers.size(); ++a) {
            SweepRow row;
            row.condition = config.robot_conditions[cell.condition].label();
            row.layout = log.header.layout->name;
            row.episode = log.header.episode_id;
            row.answerer = config.answerers[a];
            row.n_questions = static_cast<int>(scores[a].size());
            row.abstentions = abstentions[a];
            if (scores[a].empty()) {
                row.score = row.variance = std::numeric_limits<double>::quiet_NaN();
            } else {
                double sum = 0.0;
                for (double s : scores[a]) sum += s;
                row.score = sum / static_cast<double>(scores[a].size());
                double var = 0.0;
                for (double s : scores[a]) var += (s - row.score) * (s - row.score);
                row.variance = var / static_cast<double>(scores[a].size());
            }
            cell.rows.push_back(std::move(row));
        }
    };

    const unsigned hw = std::max(1U, std::thread::hardware_concurrency());
    const std::size_t n_threads =
        std::min<std::size_t>(cells.size(), config.threads > 0 ? static_cast<std::size_t>(config.threads) : hw);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (std::size_t i; (i = next++) < cells.size();) {
            try {
                run_cell(cells[i]);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);

    SweepReport report;
    for (auto& c : cells)
        for (auto& r : c.rows) report.rows.push_back(std::move(r));
    return report;
}

std::string to_csv(const SweepReport& report) {
    std::ostringstream out;
    out << "condition,layout,episode,answerer,n_questions,score,variance\n";
    auto num = [](double v) {
        if (std::isnan(v)) return std::string("nan");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.6f", v);
        return std::string(buf);
    };
    for (const auto& r : report.rows)
        out << r.condition << ',' << r.layout << ',' << r.episode << ',' << r.answerer << ',' << r.n_questions << ','
            << num(r.score) << ',' << num(r.variance) << '\n';
    return out.str();
}

}  // namespace tmm
