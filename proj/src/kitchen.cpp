#include "tmm/kitchen.hpp"

#include "tmm/errors.hpp"

#include <algorithm>

namespace tmm {

namespace {

int ingredient_units_of(const Item& item) {
    if (is_ingredient(item.cls)) return 1;
    if (item.cls == ItemClass::Soup) return static_cast<int>(item.soup_contents.size());
    return 0;
}

PotState* find_pot(WorldState& s, Cell c) {
    for (auto& p : s.pots)
        if (p.cell == c) return &p;
    return nullptr;
}

void interact(WorldState& s, AgentId who, std::vector<EnvironmentEvent>& events) {
    AgentPose& agent = s.agent(who);
    const Cell target = neighbor(agent.cell, agent.facing);
    if (!s.layout->in_bounds(target)) return;

    switch (s.layout->tile(target)) {
        case Tile::Floor:
            return;
        case Tile::Counter: {
            auto it = s.loose_items.find(target);
            if (!agent.held && it != s.loose_items.end()) {
                agent.held = it->second;
                s.loose_items.erase(it);
                events.push_back({EventKind::Pickup, s.tick, who, target, agent.held->id});
            } else if (agent.held && it == s.loose_items.end()) {
                const int id = agent.held->id;
                s.loose_items.emplace(target, *agent.held);
                agent.held.reset();
                events.push_back({EventKind::Place, s.tick, who, target, id});
            }
            return;
        }
        case Tile::Pot: {
            PotState* pot = find_pot(s, target);
            if (!pot || !agent.held) return;
            const Item held = *agent.held;
            if (is_ingredient(held.cls) && !pot->full()) {
                pot->contents.push_back(held.cls);
                pot->content_ids.push_back(held.id);
                agent.held.reset();
                pot->phase = PotPhase::Filling;
                events.push_back({EventKind::PotFill, s.tick, who, target, held.id});
                if (pot->full()) {
                    pot->phase = PotPhase::Cooking;
                    pot->cook_ticks_remaining = kCookTicks;
                    events.push_back({EventKind::CookStart, s.tick, who, target, 0});
                }
            } else if (held.cls == ItemClass::Dish && pot->phase == PotPhase::Ready) {
                Item soup;
                soup.id = s.next_item_id++;
                soup.cls = ItemClass::Soup;
                soup.soup_contents = canonical(pot->contents);
                soup.cooked = true;
                soup.plated = true;
                agent.held = soup;
                pot->contents.clear();
                pot->content_ids.clear();
                pot->cook_ticks_remaining = 0;
                pot->phase = PotPhase::Idle;
                events.push_back({EventKind::Plate, s.tick, who, target, soup.id});
            }
            return;
        }
        case Tile::ServingStation: {
            if (agent.held && agent.held->cls == ItemClass::Soup && agent.held->plated) {
                const int id = agent.held->id;
                s.delivered_soups.push_back(*agent.held);
                agent.held.reset();
                events.push_back({EventKind::Deliver, s.tick, who, target, id});
            }
            return;
        }
    }
}

}  // namespace

std::string to_string(PotPhase p) {
    switch (p) {
        case PotPhase::Idle: return "idle";
        case PotPhase::Filling: return "filling";
        case PotPhase::Cooking: return "cooking";
        case PotPhase::Ready: return "ready";
    }
    return "?";
}

std::optional<PotPhase> parse_pot_phase(std::string_view s) {
    if (s == "idle") return PotPhase::Idle;
    if (s == "filling") return PotPhase::Filling;
    if (s == "cooking") return PotPhase::Cooking;
    if (s == "ready") return PotPhase::Ready;
    return std::nullopt;
}

std::string to_string(Action a) {
    switch (a.kind) {
        case Action::Kind::Move: return to_string(a.direction);
        case Action::Kind::Interact: return "I";
        case Action::Kind::Wait: return "_";
    }
    return "_";
}

std::optional<Action> parse_action(std::string_view s) {
    if (s == "I") return Action::interact();
    if (s == "_") return Action::wait();
    if (s.size() == 1) {
        if (auto f = parse_facing(s)) return Action::move(*f);
    }
    return std::nullopt;
}

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::Pickup: return "pickup";
        case EventKind::Place: return "place";
        case EventKind::PotFill: return "pot_fill";
        case EventKind::CookStart: return "cook_start";
        case EventKind::CookDone: return "cook_done";
        case EventKind::Plate: return "plate";
        case EventKind::Deliver: return "deliver";
    }
    return "?";
}

const PotState* WorldState::pot_at(Cell c) const {
    for (const auto& p : pots)
        if (p.cell == c) return &p;
    return nullptr;
}

WorldState init_game(LayoutPtr layout, std::uint64_t seed) {
    if (!layout) throw ConfigError("init_game: no layout");
    validate(*layout);

    WorldState s;
    s.layout = layout;
    s.tick = 0;
    s.rng_seed = seed;
    for (AgentId a : kAgents) {
        const auto& spawn = layout->spawns[index_of(a)];
        s.agent(a) = AgentPose{a, spawn.cell, spawn.facing, std::nullopt};
    }
    std::vector<ItemPlacement> placements = layout->initial_items;
    std::sort(placements.begin(), placements.end(),
              [](const ItemPlacement& a, const ItemPlacement& b) { return a.cell < b.cell; });
    for (const auto& p : placements) {
        Item item;
        item.id = s.next_item_id++;
        item.cls = p.cls;
        s.loose_items.emplace(p.cell, item);
    }
    for (Cell c : layout->cells_of(Tile::Pot)) s.pots.push_back(PotState{c, {}, {}, 0, PotPhase::Idle});
    return s;
}

bool further_soup_possible(const WorldState& s) {
    int dishes = 0;
    int ingredients = 0;
    auto tally = [&](const Item& item) -> bool {
        if (item.cls == ItemClass::Soup && item.plated) return true;
        if (item.cls == ItemClass::Dish) ++dishes;
        if (is_ingredient(item.cls)) ++ingredients;
        return false;
    };
    for (const auto& [cell, item] : s.loose_items)
        if (tally(item)) return true;
    for (const auto& a : s.agents)
        if (a.held && tally(*a.held)) return true;
    if (dishes == 0) return false;
    for (const auto& p : s.pots) {
        if (p.phase == PotPhase::Cooking || p.phase == PotPhase::Ready) return true;
        const int need = kSoupSize - static_cast<int>(p.contents.size());
        if (need <= ingredients) return true;
    }
    return false;
}

bool is_terminal(const WorldState& s) {
    return s.tick >= kEpisodeTicks || !further_soup_possible(s);
}

int ingredient_units(const WorldState& s) {
    int n = 0;
    for (const auto& [cell, item] : s.loose_items) n += ingredient_units_of(item);
    for (const auto& a : s.agents)
        if (a.held) n += ingredient_units_of(*a.held);
    for (const auto& p : s.pots) n += static_cast<int>(p.contents.size());
    for (const auto& soup : s.delivered_soups) n += ingredient_units_of(soup);
    return n;
}

StepResult step(const WorldState& state, const ActionMap& actions) {
    for (const auto& [who, action] : actions)
        if (!is_known_agent(who))
            throw ProtocolError("step: action for unknown agent id " +
                                std::to_string(static_cast<int>(who)));
    if (is_terminal(state)) throw LifecycleError("step: state at tick " + std::to_string(state.tick) +
                                                 " is terminal");

    StepResult result{state, {}};
    WorldState& s = result.state;
    auto& events = result.events;
    s.tick = state.tick + 1;

    for (auto& pot : s.pots) {
        if (pot.phase != PotPhase::Cooking) continue;
        if (--pot.cook_ticks_remaining == 0) {
            pot.phase = PotPhase::Ready;
            events.push_back({EventKind::CookDone, s.tick, std::nullopt, pot.cell, 0});
        }
    }

    auto action_of = [&](AgentId a) {
        auto it = actions.find(a);
        return it == actions.end() ? Action::wait() : it->second;
    };

    std::array<std::optional<Cell>, 2> targets;
    for (AgentId a : kAgents) {
        const Action act = action_of(a);
        if (act.kind != Action::Kind::Move) continue;
        AgentPose& pose = s.agent(a);
        pose.facing = act.direction;
        const Cell t = neighbor(pose.cell, act.direction);
        if (s.layout->is_floor(t) && t != s.agent(teammate_of(a)).cell) targets[index_of(a)] = t;
    }
    // Both agents want the same cell: the lower ordinal wins.
    if (targets[0] && targets[1] && *targets[0] == *targets[1]) targets[1].reset();
    for (AgentId a : kAgents)
        if (targets[index_of(a)]) s.agent(a).cell = *targets[index_of(a)];

    for (AgentId a : kAgents)
        if (action_of(a).kind == Action::Kind::Interact) interact(s, a, events);

    return result;
}

nlohmann::json item_to_json(const Item& item) {
    nlohmann::json j{{"id", item.id}, {"class", to_string(item.cls)}};
    if (item.cls == ItemClass::Soup) {
        nlohmann::json contents = nlohmann::json::array();
        for (auto c : item.soup_contents) contents.push_back(to_string(c));
        j["contents"] = contents;
        j["cooked"] = item.cooked;
        j["plated"] = item.plated;
    }
    return j;
}

Item item_from_json(const nlohmann::json& j) {
    Item item;
    item.id = j.at("id").get<int>();
    item.cls = parse_item_class(j.at("class").get<std::string>()).value();
    if (item.cls == ItemClass::Soup) {
        for (const auto& c : j.at("contents"))
            item.soup_contents.push_back(parse_item_class(c.get<std::string>()).value());
        item.cooked = j.at("cooked").get<bool>();
        item.plated = j.at("plated").get<bool>();
    }
    return item;
}

nlohmann::json to_json(const WorldState& s) {
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& a : s.agents) {
        agents.push_back({{"id", to_string(a.id)},
                          {"x", a.cell.x},
                          {"y", a.cell.y},
                          {"facing", to_string(a.facing)},
                          {"held", a.held ? item_to_json(*a.held) : nlohmann::json()}});
    }
    nlohmann::json loose = nlohmann::json::array();
    for (const auto& [cell, item] : s.loose_items) loose.push_back({cell.x, cell.y, item_to_json(item)});
    nlohmann::json pots = nlohmann::json::array();
    for (const auto& p : s.pots) {
        nlohmann::json contents = nlohmann::json::array();
        for (auto c : p.contents) contents.push_back(to_string(c));
        pots.push_back({{"x", p.cell.x},
                        {"y", p.cell.y},
                        {"contents", contents},
                        {"ids", p.content_ids},
                        {"remaining", p.cook_ticks_remaining},
                        {"phase", to_string(p.phase)}});
    }
    nlohmann::json delivered = nlohmann::json::array();
    for (const auto& d : s.delivered_soups) delivered.push_back(item_to_json(d));
    return {{"layout", s.layout ? s.layout->name : std::string()},
            {"tick", s.tick},
            {"seed", s.rng_seed},
            {"next_id", s.next_item_id},
            {"agents", agents},
            {"loose", loose},
            {"pots", pots},
            {"delivered", delivered}};
}

WorldState world_from_json(const nlohmann::json& j, LayoutPtr layout) {
    try {
        WorldState s;
        s.layout = std::move(layout);
        s.tick = j.at("tick").get<int>();
        s.rng_seed = j.at("seed").get<std::uint64_t>();
        s.next_item_id = j.at("next_id").get<int>();
        for (const auto& a : j.at("agents")) {
            AgentPose pose;
            pose.id = parse_agent(a.at("id").get<std::string>()).value();
            pose.cell = {a.at("x").get<int>(), a.at("y").get<int>()};
            pose.facing = parse_facing(a.at("facing").get<std::string>()).value();
            if (!a.at("held").is_null()) pose.held = item_from_json(a.at("held"));
            s.agent(pose.id) = pose;
        }
        for (const auto& l : j.at("loose"))
            s.loose_items.emplace(Cell{l.at(0).get<int>(), l.at(1).get<int>()}, item_from_json(l.at(2)));
        for (const auto& p : j.at("pots")) {
            PotState pot;
            pot.cell = {p.at("x").get<int>(), p.at("y").get<int>()};
            for (const auto& c : p.at("contents"))
                pot.contents.push_back(parse_item_class(c.get<std::string>()).value());
            pot.content_ids = p.at("ids").get<std::vector<int>>();
            pot.cook_ticks_remaining = p.at("remaining").get<int>();
            pot.phase = parse_pot_phase(p.at("phase").get<std::string>()).value();
            s.pots.push_back(pot);
        }
        for (const auto& d : j.at("delivered")) s.delivered_soups.push_back(item_from_json(d));
        return s;
    } catch (const std::exception& e) {
        throw CorruptionError(std::string("world state: malformed record: ") + e.what(), -1);
    }
}

std::string canonical_text(const WorldState& s) { return to_json(s).dump(); }

}  // namespace tmm
