#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "tmm/errors.hpp"

#include <set>

using namespace tmm;
using namespace tmm::test;

namespace {

int count_events(const std::vector<EnvironmentEvent>& ev, EventKind k) {
    return static_cast<int>(std::count_if(ev.begin(), ev.end(), [&](const auto& e) { return e.kind == k; }));
}

// human gathers the three onions into the pot of kTiny
constexpr std::string_view kFillTiny = "WIENI WSWINENI WSSWINNENI";

}  // namespace

TEST_CASE("grid helpers") {
    CHECK(neighbor({2, 2}, Facing::N) == Cell{2, 1});
    CHECK(neighbor({2, 2}, Facing::W) == Cell{1, 2});
    CHECK(facing_toward({1, 1}, {1, 2}) == Facing::S);
    CHECK_FALSE(facing_toward({1, 1}, {2, 2}).has_value());
    CHECK(Cell{5, 0} < Cell{0, 1});
    CHECK(canonical({ItemClass::Tomato, ItemClass::Onion, ItemClass::Tomato}) ==
          Contents{ItemClass::Onion, ItemClass::Tomato, ItemClass::Tomato});
    for (auto f : kFacings) CHECK(parse_facing(to_string(f)) == f);
    for (auto c : {ItemClass::Onion, ItemClass::Tomato, ItemClass::Dish, ItemClass::Soup})
        CHECK(parse_item_class(to_string(c)) == c);
}

TEST_CASE("layout parsing and validation") {
    const auto l = layout_from(kTiny);
    CHECK(l->width == 5);
    CHECK(l->height == 5);
    CHECK(l->cells_of(Tile::Pot) == std::vector<Cell>{{2, 0}});
    CHECK(l->initial_ingredients() == 3);
    CHECK(l->initial_count(ItemClass::Dish) == 1);
    CHECK(parse_layout(format_layout(*l)).tiles == l->tiles);
    CHECK(layout_from_json(layout_to_json(*l)).initial_items.size() == 4);

    const std::string no_pot = "name = x\nhuman = 1,1 N\nrobot = 2,1 N\nitem = onion 0,1\nitem = dish 3,1\n---\nXXXX\nX..S\nXXXX\n";
    CHECK_THROWS_AS(parse_layout(no_pot), ConfigError);
    const std::string on_counter = "name = x\nhuman = 0,0 N\nrobot = 2,1 N\n---\nXPXX\nX..S\nXXXX\n";
    CHECK_THROWS_AS(parse_layout(on_counter), ConfigError);
    const std::string same_cell = "name = x\nhuman = 1,1 N\nrobot = 1,1 N\n---\nXPXX\nX..S\nXXXX\n";
    CHECK_THROWS_AS(parse_layout(same_cell), ConfigError);
    const std::string item_on_floor = "name = x\nhuman = 1,1 N\nrobot = 2,1 N\nitem = onion 1,1\n---\nXPXX\nX..S\nXXXX\n";
    CHECK_THROWS_AS(parse_layout(item_on_floor), ConfigError);
}

TEST_CASE("every shipped layout validates") {
    const auto ls = data_layouts();
    REQUIRE(ls.size() == 6);
    for (const auto& l : ls) {
        CHECK_NOTHROW(validate(*l));
        CHECK(l->initial_ingredients() >= kSoupSize);
        CHECK(l->initial_count(ItemClass::Dish) >= 1);
    }
}

TEST_CASE("init_game") {
    const WorldState w = init_game(layout_from(kTiny), 7);
    CHECK(w.tick == 0);
    CHECK(w.loose_items.size() == 4);
    CHECK(w.pots.size() == 1);
    CHECK(w.pots[0].phase == PotPhase::Idle);
    CHECK(w.agent(AgentId::Human).cell == Cell{1, 1});
    std::set<int> ids;
    for (const auto& [c, it] : w.loose_items) ids.insert(it.id);
    CHECK(ids.size() == 4);
}

TEST_CASE("moves: facing always turns, blocked by tiles and teammate") {
    WorldState w = init_game(layout_from(kTiny), 0);
    w = run_script(w, "W", "");
    CHECK(w.agent(AgentId::Human).cell == Cell{1, 1});
    CHECK(w.agent(AgentId::Human).facing == Facing::W);
    w = run_script(w, "E", "");
    CHECK(w.agent(AgentId::Human).cell == Cell{2, 1});
    // robot at (3,2), human tries into it from (3,1)
    w = run_script(w, "E", "");
    w = run_script(w, "S", "");
    CHECK(w.agent(AgentId::Human).cell == Cell{3, 1});
    CHECK(w.agent(AgentId::Human).facing == Facing::S);
}

TEST_CASE("same target cell: the human wins") {
    WorldState w = init_game(layout_from(kTiny), 0);
    // human (1,1) and robot (3,2); both head for (2,2)? robot goes W to (2,2), human goes S then E
    w = run_script(w, "S", "");  // human -> (1,2)
    const auto res = step(w, {{AgentId::Human, Action::move(Facing::E)}, {AgentId::Robot, Action::move(Facing::W)}});
    CHECK(res.state.agent(AgentId::Human).cell == Cell{2, 2});
    CHECK(res.state.agent(AgentId::Robot).cell == Cell{3, 2});
}

TEST_CASE("pickup and place on counters") {
    WorldState w = init_game(layout_from(kTiny), 0);
    std::vector<EnvironmentEvent> ev;
    w = run_script(w, "WI", "", &ev);
    REQUIRE(w.agent(AgentId::Human).held.has_value());
    CHECK(w.agent(AgentId::Human).held->cls == ItemClass::Onion);
    CHECK(w.loose_items.count({0, 1}) == 0);
    CHECK(count_events(ev, EventKind::Pickup) == 1);
    w = run_script(w, "I", "", &ev);
    CHECK_FALSE(w.agent(AgentId::Human).held.has_value());
    CHECK(w.loose_items.count({0, 1}) == 1);
    CHECK(count_events(ev, EventKind::Place) == 1);
}

TEST_CASE("cooking: ready exactly 100 ticks after the third ingredient") {
    WorldState w = init_game(layout_from(kTiny), 0);
    std::vector<EnvironmentEvent> ev;
    w = run_script(w, kFillTiny, "", &ev);
    REQUIRE(count_events(ev, EventKind::PotFill) == 3);
    const auto start = std::find_if(ev.begin(), ev.end(), [](const auto& e) { return e.kind == EventKind::CookStart; });
    REQUIRE(start != ev.end());
    const int filled_at = start->tick;
    CHECK(w.pots[0].phase == PotPhase::Cooking);
    while (w.tick < filled_at + kCookTicks - 1) w = step(w, {}).state;
    CHECK(w.pots[0].phase == PotPhase::Cooking);
    CHECK(w.pots[0].cook_ticks_remaining == 1);
    auto res = step(w, {});
    CHECK(res.state.tick == filled_at + 100);
    CHECK(res.state.pots[0].phase == PotPhase::Ready);
    CHECK(count_events(res.events, EventKind::CookDone) == 1);
}

TEST_CASE("plating and delivery; the game ends when nothing is left") {
    WorldState w = init_game(layout_from(kTiny), 0);
    std::vector<EnvironmentEvent> ev;
    // robot fetches the dish meanwhile, then parks at (3,1)
    w = run_script(w, std::string(kFillTiny) + "W", "SEINN", &ev);
    CHECK(w.agent(AgentId::Robot).held->cls == ItemClass::Dish);
    w = run_script(w, "", "WN");
    CHECK(w.agent(AgentId::Robot).cell == Cell{2, 1});
    while (w.pots[0].phase != PotPhase::Ready) w = step(w, {}).state;
    CHECK_FALSE(is_terminal(w));
    w = run_script(w, "", "I", &ev);
    REQUIRE(w.agent(AgentId::Robot).held.has_value());
    const Item soup = *w.agent(AgentId::Robot).held;
    CHECK(soup.cls == ItemClass::Soup);
    CHECK(soup.plated);
    CHECK(soup.cooked);
    CHECK(soup.soup_contents.size() == 3);
    CHECK(w.pots[0].phase == PotPhase::Idle);
    w = run_script(w, "", "ESEI", &ev);
    CHECK(w.delivered_soups.size() == 1);
    CHECK(count_events(ev, EventKind::Deliver) == 1);
    CHECK(is_terminal(w));
    CHECK(w.tick < kEpisodeTicks);
    CHECK_THROWS_AS(step(w, {}), LifecycleError);
}

TEST_CASE("episode terminates at tick 900") {
    WorldState w = init_game(layout_from(kKitchen8x6), 0);
    for (int i = 0; i < kEpisodeTicks - 1; ++i) w = step(w, {}).state;
    CHECK_FALSE(is_terminal(w));
    w = step(w, {}).state;
    CHECK(w.tick == 900);
    CHECK(is_terminal(w));
}

TEST_CASE("further_soup_possible counts dishes and pots") {
    const auto l = layout_from(kTiny);
    WorldState w = init_game(l, 0);
    CHECK(further_soup_possible(w));
    // no dish: nothing can be served
    w.loose_items.erase({4, 3});
    CHECK_FALSE(further_soup_possible(w));
    CHECK(is_terminal(w));
    // two onions only
    WorldState v = init_game(l, 0);
    v.loose_items.erase({0, 1});
    CHECK_FALSE(further_soup_possible(v));
}

TEST_CASE("unknown agent id is a protocol error") {
    const WorldState w = init_game(layout_from(kTiny), 0);
    CHECK_THROWS_AS(step(w, {{static_cast<AgentId>(7), Action::wait()}}), ProtocolError);
}

TEST_CASE("action codes round-trip") {
    for (const char* s : {"N", "E", "S", "W", "I", "_"}) CHECK(to_string(*parse_action(s)) == s);
    CHECK_FALSE(parse_action("X").has_value());
}

TEST_CASE("world JSON round-trip is exact") {
    const auto states = random_episode(layout_from(kKitchen8x6), 3, false, 200);
    for (const auto& s : states) CHECK(canonical_text(world_from_json(to_json(s), s.layout)) == canonical_text(s));
}

TEST_CASE("property: conservation, unique ids, agent placement, tick step") {
    const auto layouts = data_layouts();
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto& l = layouts[seed % layouts.size()];
        const auto states = random_episode(l, seed, seed % 3 == 0);
        const int initial = l->initial_ingredients();
        for (std::size_t i = 0; i < states.size(); ++i) {
            const WorldState& s = states[i];
            CHECK(s.tick == static_cast<int>(i));
            // independent count
            int units = 0;
            std::set<int> ids;
            std::size_t id_count = 0;
            auto visit = [&](const Item& it) {
                ids.insert(it.id);
                ++id_count;
                units += is_ingredient(it.cls) ? 1 : static_cast<int>(it.soup_contents.size());
            };
            for (const auto& [c, it] : s.loose_items) visit(it);
            for (const auto& a : s.agents)
                if (a.held) visit(*a.held);
            for (const auto& p : s.pots) {
                units += static_cast<int>(p.contents.size());
                for (int id : p.content_ids) ids.insert(id), ++id_count;
            }
            for (const auto& d : s.delivered_soups) visit(d);
            CHECK(units == initial);
            CHECK(ingredient_units(s) == initial);
            CHECK(ids.size() == id_count);
            CHECK(s.agents[0].cell != s.agents[1].cell);
            CHECK(l->is_floor(s.agents[0].cell));
            CHECK(l->is_floor(s.agents[1].cell));
        }
    }
}

TEST_CASE("determinism: same seed and actions give identical states") {
    const auto l = data_layout("trial_3_island");
    const auto a = random_episode(l, 11);
    const auto b = random_episode(l, 11);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(canonical_text(a[i]) == canonical_text(b[i]));
}
