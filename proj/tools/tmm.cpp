// tmm: command-line front end for episodes, replays, sweeps and live play.

#include "tmm/errors.hpp"
#include "tmm/harness.hpp"
#include "tmm/session.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace tmm;

namespace {

std::filesystem::path data_dir() {
    if (const char* env = std::getenv("TMM_DATA_DIR"); env && *env) return env;
    return TMM_DATA_DIR;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream in(s);
    for (std::string part; std::getline(in, part, sep);)
        if (!part.empty()) out.push_back(part);
    return out;
}

std::vector<ReplayLog> gather_logs(const std::vector<std::string>& inputs) {
    std::vector<std::filesystem::path> files;
    for (const auto& in : inputs) {
        if (std::filesystem::is_directory(in)) {
            for (const auto& e : std::filesystem::directory_iterator(in))
                if (e.path().extension() == ".jsonl") files.push_back(e.path());
        } else {
            files.emplace_back(in);
        }
    }
    std::sort(files.begin(), files.end());
    std::vector<ReplayLog> logs;
    for (const auto& f : files) logs.push_back(load_log(f));
    return logs;
}

std::atomic<bool> g_interrupted{false};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-agent kitchen simulator and belief-state harness"};
    app.require_subcommand(1);

    // play
    auto* play = app.add_subcommand("play", "run a scripted episode and write its replay log");
    std::string layout_path, human_policy = "noop", robot_policy = "robot", out_path, robot_region = "Ofull",
                human_region = "Ofull", proxy_name = "perfect";
    std::string bank_path = (data_dir() / "bank.json").string();
    std::uint64_t seed = 0;
    play->add_option("--layout", layout_path, "layout file")->required();
    play->add_option("--seed", seed, "episode seed");
    play->add_option("--human-policy", human_policy, "noop | random | robot");
    play->add_option("--robot-policy", robot_policy, "robot | noop | random");
    play->add_option("--robot-region", robot_region, "live robot view, e.g. Ofull, V3");
    play->add_option("--human-region", human_region, "live scripted-human view");
    play->add_option("--proxy", proxy_name, "human answer proxy: perfect | filtered | random");
    play->add_option("--bank", bank_path, "question bank");
    play->add_option("--out", out_path, "output log (.jsonl)")->required();

    // replay
    auto* rep = app.add_subcommand("replay", "verify or inspect a replay log");
    std::string log_path;
    bool inspect = false;
    rep->add_option("--log", log_path, "replay log")->required();
    rep->add_flag("--inspect", inspect, "print one line per frame");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "post-hoc visibility sweep over recorded logs");
    std::vector<std::string> log_inputs;
    std::string conditions = "default", user_region = "D4", answerers = "lp", report_path = "report.csv";
    std::string llm_endpoint, llm_model = "default", llm_cache;
    int threads = 0, llm_retries = 2, llm_timeout_ms = 30000, llm_in_flight = 4;
    bool include_practice = false;
    sweep->add_option("--logs", log_inputs, "log files or directories")->required();
    sweep->add_option("--conditions", conditions, "comma list of robot regions, or 'default' for the 14");
    sweep->add_option("--user-region", user_region, "user region");
    sweep->add_option("--answerers", answerers, "lp, llm or lp,llm");
    sweep->add_option("--out", report_path, "CSV report");
    sweep->add_option("--threads", threads, "worker threads (0 = all cores)");
    sweep->add_option("--bank", bank_path, "question bank");
    sweep->add_flag("--include-practice", include_practice, "also score practice logs");
    sweep->add_option("--llm-endpoint", llm_endpoint, "chat-completions URL");
    sweep->add_option("--llm-model", llm_model, "model name");
    sweep->add_option("--llm-cache", llm_cache, "response cache directory");
    sweep->add_option("--llm-retries", llm_retries, "retries per call");
    sweep->add_option("--llm-timeout-ms", llm_timeout_ms, "per-call timeout");
    sweep->add_option("--llm-in-flight", llm_in_flight, "concurrent call cap");

    // serve
    auto* serve = app.add_subcommand("serve", "live session service over length-prefixed TCP");
    int port = 7400, tick_ms = 100, grace_ms = 30000, question_ms = 30000;
    std::string layout_dir = (data_dir() / "layouts").string(), log_dir = "logs", bind = "127.0.0.1";
    serve->add_option("--port", port, "listen port");
    serve->add_option("--bind", bind, "bind address");
    serve->add_option("--layout-dir", layout_dir, "directory with practice_* and trial_* layouts");
    serve->add_option("--bank", bank_path, "question bank");
    serve->add_option("--log-dir", log_dir, "where replay logs go");
    serve->add_option("--tick-ms", tick_ms, "tick interval");
    serve->add_option("--resume-grace-ms", grace_ms, "grace period after a disconnect");
    serve->add_option("--question-timeout-ms", question_ms, "auto-abstain deadline");

    // layouts validate
    auto* layouts = app.add_subcommand("layouts", "layout utilities");
    layouts->require_subcommand(1);
    auto* validate_cmd = layouts->add_subcommand("validate", "check layout files");
    std::vector<std::string> layout_inputs;
    validate_cmd->add_option("paths", layout_inputs, "layout files or directories");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*play) {
            EpisodeSpec spec;
            spec.layout = std::make_shared<const Layout>(load_layout(layout_path));
            spec.seed = seed;
            spec.human_policy = human_policy;
            spec.robot_policy = robot_policy;
            spec.robot_region = parse_region(robot_region);
            spec.human_region = parse_region(human_region);
            spec.episode_id = spec.layout->name + "-" + std::to_string(seed);
            const auto proxy = parse_proxy(proxy_name);
            if (!proxy) throw ConfigError("unknown proxy '" + proxy_name + "'");
            const ReplayLog log = run_scripted_episode(spec, load_bank(bank_path), *proxy);
            save_log(log, out_path);
            const WorldState& last = log.frames.back().state;
            std::cout << spec.layout->name << " seed " << seed << ": " << log.frames.size() << " frames, "
                      << last.delivered_soups.size() << " soups, " << log.queries.size() << " questions, "
                      << log.footer->reason << "\n";
            return log.footer->complete ? 0 : 1;
        }
        if (*rep) {
            const ReplayLog log = load_log(log_path);
            const auto frames = replay(log);
            if (inspect)
                for (const auto& f : log.frames)
                    std::cout << f.state.tick << " human=" << (f.human ? to_string(*f.human) : "-")
                              << " robot=" << (f.robot ? to_string(*f.robot) : "-")
                              << " delivered=" << f.state.delivered_soups.size() << "\n";
            std::cout << "ok: " << frames.size() << " frames reproduce exactly, " << log.queries.size()
                      << " query events\n";
            return 0;
        }
        if (*sweep) {
            SweepConfig config;
            if (conditions != "default") {
                config.robot_conditions.clear();
                for (const auto& c : split(conditions, ',')) config.robot_conditions.push_back(parse_region(c));
            }
            config.user_region = parse_region(user_region);
            config.answerers = split(answerers, ',');
            config.threads = threads;
            config.include_practice = include_practice;
            std::shared_ptr<LlmClient> client;
            if (std::find(config.answerers.begin(), config.answerers.end(), "llm") != config.answerers.end()) {
                if (llm_endpoint.empty()) throw ConfigError("--llm-endpoint is required for the llm answerer");
                HttpClientConfig hc;
                hc.endpoint = llm_endpoint;
                hc.model = llm_model;
                hc.retries = llm_retries;
                hc.timeout = std::chrono::milliseconds(llm_timeout_ms);
                client = std::make_shared<HttpLlmClient>(hc);
                if (!llm_cache.empty()) client = std::make_shared<CachingClient>(client, llm_cache, llm_in_flight);
                config.llm = client.get();
            }
            const auto logs = gather_logs(log_inputs);
            const SweepReport report = posthoc_sweep(logs, load_bank(bank_path), config);
            std::ofstream(report_path) << to_csv(report);
            std::cout << report.rows.size() << " rows written to " << report_path << "\n";
            return 0;
        }
        if (*serve) {
            SessionConfig config = session_config_from_dir(layout_dir, load_bank(bank_path));
            config.log_dir = log_dir;
            config.tick_interval = std::chrono::milliseconds(tick_ms);
            config.resume_grace = std::chrono::milliseconds(grace_ms);
            config.question_timeout = std::chrono::milliseconds(question_ms);
            SessionService service(std::move(config));
            TcpServer server(service, static_cast<std::uint16_t>(port), bind);
            std::signal(SIGINT, [](int) { g_interrupted = true; });
            std::signal(SIGTERM, [](int) { g_interrupted = true; });
            std::cout << "listening on " << bind << ":" << server.port() << "\n" << std::flush;
            while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(200));
            server.stop();
            service.stop();
            return 0;
        }
        if (*validate_cmd) {
            if (layout_inputs.empty()) layout_inputs.push_back((data_dir() / "layouts").string());
            int bad = 0;
            for (const auto& in : layout_inputs) {
                std::vector<std::filesystem::path> files;
                if (std::filesystem::is_directory(in)) {
                    for (const auto& e : std::filesystem::directory_iterator(in))
                        if (e.path().extension() == ".layout") files.push_back(e.path());
                    std::sort(files.begin(), files.end());
                } else {
                    files.emplace_back(in);
                }
                for (const auto& f : files) {
                    try {
                        const Layout l = load_layout(f);
                        std::cout << "ok   " << f.string() << " (" << l.width << "x" << l.height << ", "
                                  << l.initial_ingredients() << " ingredients, " << l.initial_count(ItemClass::Dish)
                                  << " dishes)\n";
                    } catch (const ConfigError& e) {
                        ++bad;
                        std::cout << "FAIL " << f.string() << ": " << e.what() << "\n";
                    }
                }
            }
            return bad == 0 ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
