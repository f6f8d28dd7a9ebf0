#include "tmm/sa.hpp"

#include "tmm/errors.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>

namespace tmm {

bool SAQuestion::has_choice(const std::string& label) const {
    return std::find(choices.begin(), choices.end(), label) != choices.end();
}

namespace {

AnswerKind parse_answer_kind(const std::string& s) {
    if (s == "region") return AnswerKind::Region;
    if (s == "count") return AnswerKind::Count;
    if (s == "item_class") return AnswerKind::ItemClass;
    if (s == "boolean") return AnswerKind::Boolean;
    throw ConfigError("bank: unknown answer_kind '" + s + "'");
}

std::string answer_kind_name(AnswerKind k) {
    switch (k) {
        case AnswerKind::Region: return "region";
        case AnswerKind::Count: return "count";
        case AnswerKind::ItemClass: return "item_class";
        case AnswerKind::Boolean: return "boolean";
    }
    return "?";
}

std::string count_label(int n) { return n >= 5 ? "5+" : std::to_string(n); }
std::string yes_no(bool b) { return b ? "Yes" : "No"; }

std::string class_label(ItemClass c) {
    switch (c) {
        case ItemClass::Onion: return "Onion";
        case ItemClass::Tomato: return "Tomato";
        case ItemClass::Dish: return "Dish";
        case ItemClass::Soup: return "Soup";
    }
    return "?";
}

bool loose_or_held(const BeliefObject& o) {
    return std::holds_alternative<OnCounter>(o.location) || std::holds_alternative<HeldBy>(o.location);
}

int free_count(const BeliefState& b, ItemClass cls) {
    return static_cast<int>(std::count_if(b.objects.begin(), b.objects.end(),
                                          [&](const BeliefObject& o) { return o.cls == cls && loose_or_held(o); }));
}

int free_ingredients(const BeliefState& b) {
    return free_count(b, ItemClass::Onion) + free_count(b, ItemClass::Tomato);
}

std::string closest_region(const BeliefState& b, ItemClass cls) {
    const Cell user = b.agent(AgentId::Human).cell;
    std::optional<Cell> best;
    for (const auto& o : b.objects) {
        const auto* c = std::get_if<OnCounter>(&o.location);
        if (o.cls != cls || !c) continue;
        if (!best || distance2(user, c->cell) < distance2(user, *best) ||
            (distance2(user, c->cell) == distance2(user, *best) && c->cell < *best))
            best = c->cell;
    }
    if (!best) return kNoneLabel;
    return region_label(*best, b.layout->width, b.layout->height);
}

const PotBelief* pot_nearest_user(const BeliefState& b) {
    const Cell user = b.agent(AgentId::Human).cell;
    const PotBelief* best = nullptr;
    for (const auto& p : b.pots)
        if (!best || distance2(user, p.cell) < distance2(user, best->cell)) best = &p;
    return best;
}

bool pot_open(const PotBelief& p) { return p.phase == PotPhase::Idle || p.phase == PotPhase::Filling; }

using Rule = std::function<std::string(const BeliefState&)>;

const std::map<std::string, Rule>& rules() {
    static const std::map<std::string, Rule> table{
        {"closest_tomato", [](const BeliefState& b) { return closest_region(b, ItemClass::Tomato); }},
        {"closest_onion", [](const BeliefState& b) { return closest_region(b, ItemClass::Onion); }},
        {"closest_dish", [](const BeliefState& b) { return closest_region(b, ItemClass::Dish); }},
        {"teammate_held",
         [](const BeliefState& b) -> std::string {
             const auto* h = b.held_by(AgentId::Robot);
             return h ? class_label(h->cls) : "Nothing";
         }},
        {"pot_contents",
         [](const BeliefState& b) {
             const auto* p = pot_nearest_user(b);
             return std::to_string(p ? b.pot_contents(p->cell).size() : 0);
         }},
        {"soups_remaining", [](const BeliefState& b) { return count_label(soups_remaining(b)); }},
        {"soup_cookable",
         [](const BeliefState& b) {
             const int avail = free_ingredients(b);
             bool ok = false;
             for (const auto& p : b.pots)
                 if (pot_open(p) && kSoupSize - static_cast<int>(b.pot_contents(p.cell).size()) <= avail) ok = true;
             return yes_no(ok);
         }},
        {"dishes_remaining", [](const BeliefState& b) { return count_label(free_count(b, ItemClass::Dish)); }},
        {"scarcest_ingredient",
         [](const BeliefState& b) -> std::string {
             const int onions = free_count(b, ItemClass::Onion);
             const int tomatoes = free_count(b, ItemClass::Tomato);
             if (onions == tomatoes) return "Tie";
             return onions < tomatoes ? "Onion" : "Tomato";
         }},
        {"teammate_can_plate",
         [](const BeliefState& b) {
             const auto* h = b.held_by(AgentId::Robot);
             const bool ready = std::any_of(b.pots.begin(), b.pots.end(),
                                            [](const PotBelief& p) { return p.phase == PotPhase::Ready; });
             return yes_no(h && h->cls == ItemClass::Dish && ready);
         }},
    };
    return table;
}

}  // namespace

QuestionBank bank_from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ConfigError("bank: expected a list of questions");
    QuestionBank bank;
    try {
        for (const auto& q : j) {
            SAQuestion s;
            s.id = q.at("id").get<std::string>();
            s.level = q.at("level").get<int>();
            s.text = q.at("text").get<std::string>();
            s.choices = q.at("choices").get<std::vector<std::string>>();
            s.answer_kind = parse_answer_kind(q.at("answer_kind").get<std::string>());
            const auto scorer = q.at("scorer").get<std::string>();
            if (scorer == "exact") s.scorer = ScorerKind::Exact;
            else if (scorer == "spatial_partial") s.scorer = ScorerKind::SpatialPartial;
            else throw ConfigError("bank: unknown scorer '" + scorer + "'");
            s.rule = q.value("rule", "");
            if (s.choices.size() < 2) throw ConfigError("bank: question '" + s.id + "' needs at least two choices");
            if (s.level != 1 && s.level != 2) throw ConfigError("bank: question '" + s.id + "' has level outside 1..2");
            for (const auto& other : bank)
                if (other.id == s.id) throw ConfigError("bank: duplicate question id '" + s.id + "'");
            bank.push_back(std::move(s));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bank: ") + e.what());
    }
    return bank;
}

QuestionBank load_bank(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("bank: cannot open " + path.string());
    try {
        return bank_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("bank: ") + e.what());
    }
}

nlohmann::json to_json(const SAQuestion& q) {
    return {{"id", q.id},
            {"level", q.level},
            {"text", q.text},
            {"choices", q.choices},
            {"answer_kind", answer_kind_name(q.answer_kind)},
            {"scorer", q.scorer == ScorerKind::Exact ? "exact" : "spatial_partial"},
            {"rule", q.rule}};
}

const SAQuestion& find_question(const QuestionBank& bank, const std::string& id) {
    for (const auto& q : bank)
        if (q.id == id) return q;
    throw ProtocolError("unknown question id '" + id + "'");
}

std::string to_string(AnswerSource s) {
    switch (s) {
        case AnswerSource::Human: return "human";
        case AnswerSource::BetaTrue: return "beta_true";
        case AnswerSource::BetaRobot: return "beta_robot";
        case AnswerSource::BetaPredLP: return "beta_pred_LP";
        case AnswerSource::BetaPredLLM: return "beta_pred_LLM";
    }
    return "?";
}

const std::vector<std::string>& region_labels() {
    static const std::vector<std::string> labels{"North-West", "North", "North-East", "West", "Center",
                                                 "East", "South-West", "South", "South-East"};
    return labels;
}

std::string region_label(Cell c, int width, int height) {
    const int col = std::clamp(3 * c.x / width, 0, 2);
    const int row = std::clamp(3 * c.y / height, 0, 2);
    return region_labels()[static_cast<std::size_t>(row * 3 + col)];
}

std::optional<Cell> region_position(const std::string& label) {
    const auto& labels = region_labels();
    const auto it = std::find(labels.begin(), labels.end(), label);
    if (it == labels.end()) return std::nullopt;
    const int i = static_cast<int>(it - labels.begin());
    return Cell{i % 3, i / 3};
}

int soups_remaining(const BeliefState& b) {
    int plated = 0;
    for (const auto& o : b.objects)
        if (o.cls == ItemClass::Soup && o.plated && on_board(o.location)) ++plated;

    int in_flight = 0;
    std::vector<int> needs;
    for (const auto& p : b.pots) {
        if (p.phase == PotPhase::Cooking || p.phase == PotPhase::Ready) {
            ++in_flight;
            continue;
        }
        const int n = static_cast<int>(b.pot_contents(p.cell).size());
        if (n > 0) needs.push_back(kSoupSize - n);
    }
    std::sort(needs.begin(), needs.end());
    int left = free_ingredients(b);
    int completable = 0;
    for (int need : needs) {
        if (need > left) break;
        left -= need;
        ++completable;
    }
    completable += left / kSoupSize;
    return plated + std::min(free_count(b, ItemClass::Dish), in_flight + completable);
}

bool has_rule(const std::string& rule) { return rules().count(rule) != 0; }

SAAnswer answer_lp(const BeliefState& belief, const SAQuestion& question, AnswerSource source) {
    const auto it = rules().find(question.rule);
    if (it == rules().end())
        throw UnsupportedQuestionError("no hand-crafted rule for question '" + question.id + "'");
    std::string label = it->second(belief);
    if (!question.has_choice(label))
        throw ConfigError("question '" + question.id + "' lacks the choice '" + label + "'");
    return {question.id, std::move(label), source, belief.tick};
}

double score_answer(const SAAnswer& a, const SAAnswer& b, const SAQuestion& question) {
    if (a.question_id != b.question_id || a.question_id != question.id)
        throw ProtocolError("score_answer: answers are for different questions");
    if (a.abstained() || b.abstained()) return 0.0;
    if (a.label == b.label) return 1.0;
    if (question.scorer == ScorerKind::SpatialPartial) {
        const auto pa = region_position(a.label);
        const auto pb = region_position(b.label);
        if (pa && pb && std::max(std::abs(pa->x - pb->x), std::abs(pa->y - pb->y)) == 1) return 0.5;
    }
    return 0.0;
}

AgreementReport aggregate_scores(const std::vector<SAAnswer>& a, const std::vector<SAAnswer>& b,
                                 const QuestionBank& bank) {
    if (a.size() != b.size()) throw ProtocolError("aggregate_scores: answer streams differ in length");
    if (a.empty()) throw UndefinedScoreError("aggregate_scores: no questions were asked");
    AgreementReport report;
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].tick != b[i].tick) throw ProtocolError("aggregate_scores: answer streams are not aligned");
        report.scores.push_back(score_answer(a[i], b[i], find_question(bank, a[i].question_id)));
        sum += report.scores.back();
    }
    report.score = sum / static_cast<double>(a.size());
    return report;
}

bool is_pause_tick(int tick, const QuerySchedule& schedule) {
    return tick > 0 && schedule.period_ticks > 0 && tick % schedule.period_ticks == 0;
}

std::vector<SAQuestion> schedule_queries(int tick, const QuerySchedule& schedule, const QuestionBank& bank,
                                         std::mt19937_64& rng) {
    if (!is_pause_tick(tick, schedule)) return {};
    std::vector<SAQuestion> pool;
    for (const auto& q : bank)
        if (has_rule(q.rule)) pool.push_back(q);
    if (pool.empty()) {
        std::clog << "schedule_queries: no applicable questions at tick " << tick << "\n";
        return {};
    }
    std::vector<SAQuestion> out;
    const auto k = std::min<std::size_t>(pool.size(), static_cast<std::size_t>(std::max(0, schedule.max_questions_per_pause)));
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng() % (pool.size() - i));
        std::swap(pool[i], pool[j]);
        out.push_back(pool[i]);
    }
    return out;
}

}  // namespace tmm
