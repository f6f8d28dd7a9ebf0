#pragma once

#include "tmm/belief.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace tmm {

enum class AnswerKind : std::uint8_t { Region, Count, ItemClass, Boolean };
enum class ScorerKind : std::uint8_t { Exact, SpatialPartial };

struct SAQuestion {
    std::string id;
    int level = 1;
    std::string text;
    std::vector<std::string> choices;
    AnswerKind answer_kind = AnswerKind::Region;
    ScorerKind scorer = ScorerKind::Exact;
    std::string rule;  // hand-crafted rule identifier; empty means none

    bool has_choice(const std::string& label) const;
};

using QuestionBank = std::vector<SAQuestion>;

/// Reads the bank file (JSON list of questions). Throws ConfigError.
QuestionBank load_bank(const std::filesystem::path& path);
QuestionBank bank_from_json(const nlohmann::json& j);
nlohmann::json to_json(const SAQuestion& q);
const SAQuestion& find_question(const QuestionBank& bank, const std::string& id);

enum class AnswerSource : std::uint8_t { Human, BetaTrue, BetaRobot, BetaPredLP, BetaPredLLM };

std::string to_string(AnswerSource s);

struct SAAnswer {
    std::string question_id;
    std::string label;  // empty for an abstention
    AnswerSource source = AnswerSource::BetaPredLP;
    int tick = 0;

    bool abstained() const { return label.empty(); }
};

// ---- regions --------------------------------------------------------------

inline constexpr const char* kNoneLabel = "None";

/// Named 3x3 partition of the board ("North-West" ... "South-East").
std::string region_label(Cell c, int width, int height);
const std::vector<std::string>& region_labels();
/// Grid position (col, row) of a region label, if it is one.
std::optional<Cell> region_position(const std::string& label);

// ---- rules ----------------------------------------------------------------

/// Answers a question from one belief snapshot. Throws UnsupportedQuestionError
/// when the question has no hand-crafted rule.
SAAnswer answer_lp(const BeliefState& belief, const SAQuestion& question,
                   AnswerSource source = AnswerSource::BetaPredLP);

bool has_rule(const std::string& rule);

/// Soups that can still be delivered given believed ingredients, pots and dishes.
int soups_remaining(const BeliefState& belief);

// ---- scoring --------------------------------------------------------------

/// Throws ProtocolError when the answers are for different questions.
double score_answer(const SAAnswer& a, const SAAnswer& b, const SAQuestion& question);

struct AgreementReport {
    std::vector<double> scores;
    double score = 0.0;  // mean over every asked question
};

/// Throws UndefinedScoreError on zero questions, ProtocolError on misaligned streams.
AgreementReport aggregate_scores(const std::vector<SAAnswer>& a, const std::vector<SAAnswer>& b,
                                 const QuestionBank& bank);

// ---- scheduling -----------------------------------------------------------

struct QuerySchedule {
    int period_ticks = 300;
    int max_questions_per_pause = 2;
};

bool is_pause_tick(int tick, const QuerySchedule& schedule);

/// Questions for a pause at `tick`; empty away from pause ticks. Draws without
/// replacement among questions with a known rule.
std::vector<SAQuestion> schedule_queries(int tick, const QuerySchedule& schedule, const QuestionBank& bank,
                                         std::mt19937_64& rng);

}  // namespace tmm
