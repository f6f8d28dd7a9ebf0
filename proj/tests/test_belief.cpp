#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "tmm/errors.hpp"

#include <sstream>

using namespace tmm;
using namespace tmm::test;

TEST_CASE("init_belief seeds every item and the census") {
    const WorldState w = init_game(layout_from(kKitchen8x6), 0);
    const BeliefState b = init_belief(w);
    CHECK(b.objects.size() == 8);
    CHECK(b.census.at(ItemClass::Onion) == 6);
    CHECK(b.census.at(ItemClass::Dish) == 2);
    CHECK(b.census.at(ItemClass::Tomato) == 0);
    CHECK(census_report(b).holds());
    CHECK(belief_view(b) == world_view(w));
    for (std::size_t i = 1; i < b.objects.size(); ++i) CHECK(b.objects[i - 1].belief_id < b.objects[i].belief_id);
    CHECK_THROWS_AS(init_belief(step(w, {}).state), LifecycleError);
}

TEST_CASE("observations from the past are rejected; same tick is fine") {
    const auto l = layout_from(kKitchen8x6);
    WorldState w = init_game(l, 0);
    BeliefState b = init_belief(w);
    const auto obs0 = filter_observations(w, AgentId::Robot, full_region());
    w = step(w, {}).state;
    b = update_belief(b, filter_observations(w, AgentId::Robot, full_region()));
    CHECK(b.tick == 1);
    CHECK_THROWS_AS(update_belief(b, obs0), LifecycleError);
    CHECK_NOTHROW(update_belief(b, filter_observations(w, AgentId::Robot, full_region())));
}

TEST_CASE("full observation tracks the board at every tick") {
    const auto layouts = data_layouts();
    for (std::uint64_t seed = 0; seed < 12; ++seed) {
        const auto states = random_episode(layouts[seed % layouts.size()], seed, seed % 2 == 0);
        const auto chain = truth_chain(states);
        for (std::size_t i = 0; i < states.size(); ++i) {
            REQUIRE(belief_view(chain[i]) == world_view(states[i]));
            CHECK(content_signature(chain[i]) == content_signature(states[i]));
            CHECK(chain[i].conflicts == 0);
        }
    }
}

TEST_CASE("persistence: unseen objects keep their believed location") {
    const auto l = layout_from(kKitchen8x6);
    WorldState w = init_game(l, 0);
    BeliefState b = init_belief(w);
    // the robot looks north with V1; everything else changes out of view
    const auto region = parse_region("V1");
    std::map<int, Location> before;
    for (const auto& o : b.objects) before[o.belief_id] = o.location;
    w.loose_items[{7, 3}] = w.loose_items.at({0, 1});
    w.loose_items.erase({0, 1});
    w.loose_items.erase({7, 1});
    for (int i = 0; i < 25; ++i) {
        w = step(w, {}).state;
        b = update_belief(b, filter_observations(w, AgentId::Robot, region));
    }
    for (const auto& o : b.objects) CHECK(o.location == before.at(o.belief_id));
}

TEST_CASE("idempotence: the same observation twice changes nothing more") {
    const auto l = data_layout("trial_1_divided");
    const auto states = random_episode(l, 5, true, 400);
    BeliefState b = init_belief(states[0]);
    for (std::size_t i = 1; i < states.size(); ++i) {
        const auto obs = filter_observations(states[i], AgentId::Robot, parse_region("V3"));
        const BeliefState once = update_belief(b, obs);
        const BeliefState twice = update_belief(once, obs);
        REQUIRE(canonical_text(twice) == canonical_text(once));
        b = once;
    }
}

TEST_CASE("belief JSON and scene document round-trips") {
    const auto l = data_layout("trial_3_island");
    const auto states = random_episode(l, 2, true, 500);
    BeliefState b = init_belief(states[0]);
    for (std::size_t i = 1; i < states.size(); ++i) {
        b = update_belief(b, filter_observations(states[i], AgentId::Robot, parse_region("D3")));
        if (i % 50 != 0) continue;
        CHECK(canonical_text(belief_from_json(to_json(b), l)) == canonical_text(b));
        const BeliefState fromdoc = belief_from_scene_document(scene_document(b));
        CHECK(belief_view(fromdoc) == belief_view(b));
        CHECK(scene_text(fromdoc) == scene_text(b));
    }
}

TEST_CASE("scene graph relations") {
    WorldState w = init_game(layout_from(kTiny), 0);
    BeliefState b = init_belief(w);
    const SceneGraph g = derive_scene_graph(b);
    // every on-board ingredient is usable with the idle pot; the dish is not (pot not ready)
    int usable = 0;
    for (const auto& e : g.edges) usable += e.relation == "usable";
    CHECK(usable == 3);
    // the human at (1,1) is next to the onion at (0,1) and not to the pot at (2,0)
    const auto onion = std::find_if(b.objects.begin(), b.objects.end(), [](const auto& o) {
        return std::get<OnCounter>(o.location).cell == Cell{0, 1};
    });
    REQUIRE(onion != b.objects.end());
    CHECK(g.has_edge("agent:human", "obj:" + std::to_string(onion->belief_id), "adjacent"));
    CHECK_FALSE(g.has_edge("agent:human", "pot:2,0", "adjacent"));
    // fill the pot and let it cook: now the dish is usable with it
    w = run_script(w, "WIENI WSWINENI WSSWINNENI", "");
    for (int i = 0; i < kCookTicks; ++i) w = step(w, {}).state;
    BeliefState c = init_belief(init_game(w.layout, 0));
    c = update_belief(c, filter_observations(w, AgentId::Robot, full_region()));
    const SceneGraph g2 = derive_scene_graph(c);
    const auto dish = std::find_if(c.objects.begin(), c.objects.end(), [](const auto& o) { return o.cls == ItemClass::Dish; });
    CHECK(g2.has_edge("obj:" + std::to_string(dish->belief_id), "pot:2,0", "usable"));
    CHECK(g2.has_edge("agent:human", "pot:2,0", "adjacent"));
}

TEST_CASE("predict_teammate_belief under full views equals the truth chain") {
    const auto l = data_layout("trial_2_corridor");
    const auto states = random_episode(l, 8);
    BeliefState robot = init_belief(states[0]), pred = robot;
    for (std::size_t i = 1; i < states.size(); ++i) {
        robot = update_belief(robot, filter_observations(states[i], AgentId::Robot, full_region()));
        pred = predict_teammate_belief(robot, pred, AgentId::Human, full_region());
        REQUIRE(belief_view(pred) == world_view(states[i]));
    }
}
