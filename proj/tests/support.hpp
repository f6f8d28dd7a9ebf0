#pragma once

#include "tmm/belief.hpp"
#include "tmm/harness.hpp"
#include "tmm/robot.hpp"
#include "tmm/sa.hpp"

#include <memory>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace tmm::test {

inline LayoutPtr layout_from(std::string_view text) { return std::make_shared<const Layout>(parse_layout(text)); }

inline LayoutPtr data_layout(const std::string& name) {
    return std::make_shared<const Layout>(load_layout(std::filesystem::path(TMM_DATA_DIR) / "layouts" / (name + ".layout")));
}

inline std::vector<LayoutPtr> data_layouts() {
    std::vector<LayoutPtr> out;
    for (auto& l : load_layout_dir(std::filesystem::path(TMM_DATA_DIR) / "layouts"))
        out.push_back(std::make_shared<const Layout>(std::move(l)));
    return out;
}

inline const QuestionBank& bank() {
    static const QuestionBank b = load_bank(std::filesystem::path(TMM_DATA_DIR) / "bank.json");
    return b;
}

// 8x6, six onions and two dishes, one pot, one station.
inline constexpr std::string_view kKitchen8x6 = R"(name = kitchen8x6
human = 2,2 S
robot = 5,3 N
item = onion 0,1
item = onion 0,2
item = onion 0,3
item = onion 3,5
item = onion 4,5
item = onion 5,5
item = dish 7,1
item = dish 7,4
---
XXPXXXXX
X......X
X......S
X......X
X......X
XXXXXXXX
)";

// 5x5 with three onions and one dish.
inline constexpr std::string_view kTiny = R"(name = tiny
human = 1,1 E
robot = 3,2 W
item = onion 0,1
item = onion 0,2
item = onion 0,3
item = dish 4,3
---
XXPXX
X...X
X...S
X...X
XXXXX
)";

/// Parses one action code per character; ' ' is ignored.
inline std::vector<Action> actions(std::string_view codes) {
    std::vector<Action> out;
    for (char c : codes) {
        if (c == ' ') continue;
        out.push_back(*parse_action(std::string(1, c)));
    }
    return out;
}

/// Steps both scripts in lockstep, padding the shorter with waits.
inline WorldState run_script(WorldState w, std::string_view human, std::string_view robot,
                             std::vector<EnvironmentEvent>* events = nullptr) {
    const auto h = actions(human);
    const auto r = actions(robot);
    for (std::size_t i = 0; i < std::max(h.size(), r.size()); ++i) {
        const Action ha = i < h.size() ? h[i] : Action::wait();
        const Action ra = i < r.size() ? r[i] : Action::wait();
        auto res = step(w, {{AgentId::Human, ha}, {AgentId::Robot, ra}});
        if (events) events->insert(events->end(), res.events.begin(), res.events.end());
        w = std::move(res.state);
    }
    return w;
}

/// World states of one episode: a full-view robot with a random or robot human.
inline std::vector<WorldState> random_episode(LayoutPtr layout, std::uint64_t seed, bool robot_human = false,
                                              int max_ticks = kEpisodeTicks) {
    WorldState w = init_game(layout, seed);
    auto human = make_policy(robot_human ? "robot" : "random", AgentId::Human, seed);
    auto robot = make_policy("robot", AgentId::Robot, seed);
    BeliefState hb = init_belief(w), rb = init_belief(w);
    std::vector<WorldState> out{w};
    while (!is_terminal(w) && w.tick < max_ticks) {
        const Action ha = human->next(hb, AgentId::Human);
        const Action ra = robot->next(rb, AgentId::Robot);
        w = step(w, {{AgentId::Human, ha}, {AgentId::Robot, ra}}).state;
        hb = update_belief(hb, filter_observations(w, AgentId::Human, full_region()));
        rb = update_belief(rb, filter_observations(w, AgentId::Robot, full_region()));
        out.push_back(w);
    }
    return out;
}

/// Scripted episode spec with a random human on one of the data layouts.
inline EpisodeSpec scripted_spec(LayoutPtr layout, std::uint64_t seed, std::string human = "random") {
    EpisodeSpec spec;
    spec.layout = std::move(layout);
    spec.seed = seed;
    spec.human_policy = std::move(human);
    spec.episode_id = spec.layout->name + "-" + std::to_string(seed);
    return spec;
}

/// Beta-true chain over a sequence of states.
inline std::vector<BeliefState> truth_chain(const std::vector<WorldState>& states) {
    std::vector<BeliefState> out{init_belief(states.front())};
    for (std::size_t i = 1; i < states.size(); ++i)
        out.push_back(update_belief(out.back(), filter_observations(states[i], AgentId::Robot, full_region())));
    return out;
}

// One dish. The robot (V2, looking north) watches the human take it at (3,0),
// then the human shelves it at (7,0) out of sight and waits.
inline constexpr std::string_view kShelvedDish = R"(name = shelved_dish
human = 2,1 E
robot = 3,2 N
item = onion 0,1
item = onion 0,2
item = onion 0,3
item = dish 3,0
---
XXXXXXXXPX
X........X
X........S
X........X
XXXXXXXXXX
)";

inline constexpr std::string_view kShelvedDishHuman = "ENI EEEE NI";

inline QuestionBank only_questions(std::initializer_list<std::string_view> ids) {
    QuestionBank out;
    for (auto id : ids)
        for (const auto& q : bank())
            if (q.id == id) out.push_back(q);
    return out;
}

inline EpisodeSpec shelved_dish_spec() {
    EpisodeSpec spec;
    spec.layout = layout_from(kShelvedDish);
    spec.human_policy = "trace";
    spec.robot_policy = "noop";
    spec.robot_region = parse_region("V2");
    spec.episode_id = "shelved-dish";
    return spec;
}

inline ReplayLog run_shelved_dish(const QuestionBank& questions) {
    return run_scripted_episode(shelved_dish_spec(), std::make_unique<TracePolicy>(actions(kShelvedDishHuman)),
                                make_policy("noop", AgentId::Robot, 0), questions);
}

}  // namespace tmm::test
