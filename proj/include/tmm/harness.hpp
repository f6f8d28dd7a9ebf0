#pragma once

#include "tmm/llm.hpp"
#include "tmm/robot.hpp"
#include "tmm/sa.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace tmm {

inline constexpr int kLogFormatVersion = 1;

// ---- replay log -----------------------------------------------------------

struct LogHeader {
    int format_version = kLogFormatVersion;
    LayoutPtr layout;
    std::uint64_t seed = 0;
    VisibilityRegion robot_region = full_region();  // live robot policy
    VisibilityRegion human_region = full_region();  // live scripted human policy
    std::string human_policy = "noop";
    std::string robot_policy = "robot";
    RobotConfig robot_config;
    QuerySchedule schedule;
    std::string config_hash;
    std::string episode_id;
    std::string user_id;
    bool practice = false;
    int trial = 0;
};

struct LogFrame {
    WorldState state;
    std::optional<Action> human;  // both absent on the terminal frame
    std::optional<Action> robot;
};

struct QueryEvent {
    int tick = 0;
    std::string question_id;
    std::string answer;  // empty for an abstention
    long pause_ms = 0;
};

struct LogFooter {
    std::string reason = "terminal";  // terminal | aborted | abandoned
    bool complete = true;
    std::string diagnostic;
};

struct ReplayLog {
    LogHeader header;
    std::vector<LogFrame> frames;
    std::vector<QueryEvent> queries;
    std::optional<LogFooter> footer;
};

/// SHA-256 over everything that determines the frames.
std::string config_hash(const LogHeader& header);

/// One JSON record per line: header, frames (queries after the frame of their
/// tick), footer.
void write_log(const ReplayLog& log, std::ostream& out);
std::string log_text(const ReplayLog& log);
void save_log(const ReplayLog& log, const std::filesystem::path& path);

/// Throws UnsupportedVersionError for other format versions, CorruptionError
/// for malformed records.
ReplayLog read_log(std::istream& in);
ReplayLog parse_log(const std::string& text);
ReplayLog load_log(const std::filesystem::path& path);

/// Re-simulates from the header and recorded actions. Throws CorruptionError
/// naming the first divergent tick, or on a config hash mismatch.
std::vector<WorldState> replay(const ReplayLog& log);

/// Human actions indexed by tick, for re-running a recorded episode.
std::vector<Action> human_trace(const ReplayLog& log);

// ---- episodes -------------------------------------------------------------

struct EpisodeSpec {
    LayoutPtr layout;
    std::uint64_t seed = 0;
    std::string human_policy = "noop";
    std::string robot_policy = "robot";
    VisibilityRegion robot_region = full_region();
    VisibilityRegion human_region = full_region();
    RobotConfig robot_config;
    QuerySchedule schedule;
    std::string episode_id;
    std::string user_id;
    bool practice = false;
    int trial = 0;
};

LogHeader make_header(const EpisodeSpec& spec);

/// Steps one game, runs the agent policies over their own beliefs, draws
/// questions at pause ticks and records everything into a ReplayLog. Shared
/// by scripted runs and live sessions.
class Episode {
public:
    Episode(EpisodeSpec spec, std::unique_ptr<Policy> human, std::unique_ptr<Policy> robot,
            const QuestionBank& bank);

    const WorldState& state() const { return state_; }
    const BeliefState& robot_belief() const { return robot_belief_; }
    const EpisodeSpec& spec() const { return spec_; }

    /// Questions still to answer at the current tick.
    const std::vector<SAQuestion>& pending() const { return pending_; }
    bool paused() const { return !pending_.empty(); }

    /// Answers the first pending question. Throws ProtocolError for any other id.
    void answer(const std::string& question_id, const std::string& label, long pause_ms);

    /// Game over and nothing pending.
    bool finished() const { return is_terminal(state_) && pending_.empty(); }

    /// One tick; the human action comes from `human_action` when given, else
    /// from the human policy. Throws LifecycleError while paused or finished.
    std::vector<EnvironmentEvent> advance(std::optional<Action> human_action = std::nullopt);

    /// Closes the log. Idempotent.
    ReplayLog& finish(const std::string& reason = "terminal", bool complete = true, std::string diagnostic = {});
    const ReplayLog& log() const { return log_; }

private:
    void arrive();

    EpisodeSpec spec_;
    std::unique_ptr<Policy> human_;
    std::unique_ptr<Policy> robot_;
    const QuestionBank& bank_;
    WorldState state_;
    BeliefState robot_belief_;
    BeliefState human_belief_;
    std::mt19937_64 query_rng_;
    std::vector<SAQuestion> pending_;
    ReplayLog log_;
};

enum class HumanProxy : std::uint8_t { PerfectRecall, FilteredMemory, Random };

std::optional<HumanProxy> parse_proxy(std::string_view s);

/// Runs a whole episode with a scripted answer proxy for the human. A policy
/// exception aborts the run and returns the partial log.
ReplayLog run_scripted_episode(const EpisodeSpec& spec, const QuestionBank& bank,
                               HumanProxy proxy = HumanProxy::PerfectRecall);
ReplayLog run_scripted_episode(const EpisodeSpec& spec, std::unique_ptr<Policy> human,
                               std::unique_ptr<Policy> robot, const QuestionBank& bank,
                               HumanProxy proxy = HumanProxy::PerfectRecall);

// ---- reconstruction and sweeps -------------------------------------------

/// The three belief chains at one tick of a recorded episode.
struct BeliefTriple {
    const BeliefState& truth;
    const BeliefState& robot;
    const BeliefState& pred;
};

/// Rebuilds beta-true, beta-robot and beta-pred over every frame, calling
/// `visit(tick, frame, beliefs)` after each.
void reconstruct_beliefs(const ReplayLog& log, const VisibilityRegion& robot_region,
                         const VisibilityRegion& user_region,
                         const std::function<void(const LogFrame&, const BeliefTriple&)>& visit);

std::vector<VisibilityRegion> default_conditions();

struct SweepConfig {
    std::vector<VisibilityRegion> robot_conditions = default_conditions();
    VisibilityRegion user_region = parse_region("D4");
    std::vector<std::string> answerers{"lp"};
    bool include_practice = false;
    int threads = 0;  // 0: hardware concurrency
    LlmClient* llm = nullptr;
};

struct SweepRow {
    std::string condition;
    std::string layout;
    std::string episode;
    std::string answerer;
    int n_questions = 0;
    double score = 0.0;     // NaN when nothing was asked
    double variance = 0.0;  // population variance of per-question scores
    int abstentions = 0;
};

struct SweepReport {
    std::vector<SweepRow> rows;
};

/// Throws ConfigError for an empty condition or answerer list.
SweepReport posthoc_sweep(const std::vector<ReplayLog>& logs, const QuestionBank& bank, const SweepConfig& config);

std::string to_csv(const SweepReport& report);

}  // namespace tmm
