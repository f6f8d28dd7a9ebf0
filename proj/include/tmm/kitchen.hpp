#pragma once

#include "tmm/layout.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace tmm {

inline constexpr int kTicksPerSecond = 10;
inline constexpr int kCookTicks = 10 * kTicksPerSecond;
inline constexpr int kEpisodeTicks = 90 * kTicksPerSecond;
inline constexpr int kSoupSize = 3;

struct Item {
    int id = 0;
    ItemClass cls = ItemClass::Onion;
    Contents soup_contents;  // Soup only, canonical order
    bool cooked = false;
    bool plated = false;

    friend bool operator==(const Item&, const Item&) = default;
};

struct AgentPose {
    AgentId id = AgentId::Human;
    Cell cell;
    Facing facing = Facing::N;
    std::optional<Item> held;

    friend bool operator==(const AgentPose&, const AgentPose&) = default;
};

enum class PotPhase : std::uint8_t { Idle, Filling, Cooking, Ready };

std::string to_string(PotPhase p);
std::optional<PotPhase> parse_pot_phase(std::string_view s);

struct PotState {
    Cell cell;
    Contents contents;              // insertion order
    std::vector<int> content_ids;   // provenance of the potted ingredients
    int cook_ticks_remaining = 0;
    PotPhase phase = PotPhase::Idle;

    bool full() const { return contents.size() >= static_cast<std::size_t>(kSoupSize); }
    friend bool operator==(const PotState&, const PotState&) = default;
};

/// Full ground-truth board at one tick.
struct WorldState {
    LayoutPtr layout;
    int tick = 0;
    std::array<AgentPose, 2> agents{};
    std::map<Cell, Item> loose_items;
    std::vector<PotState> pots;  // sorted by cell
    std::vector<Item> delivered_soups;
    std::uint64_t rng_seed = 0;
    int next_item_id = 1;

    const AgentPose& agent(AgentId a) const { return agents[index_of(a)]; }
    AgentPose& agent(AgentId a) { return agents[index_of(a)]; }
    const PotState* pot_at(Cell c) const;
};

struct Action {
    enum class Kind : std::uint8_t { Move, Interact, Wait };

    Kind kind = Kind::Wait;
    Facing direction = Facing::N;  // Move only

    static constexpr Action move(Facing f) { return {Kind::Move, f}; }
    static constexpr Action interact() { return {Kind::Interact, Facing::N}; }
    static constexpr Action wait() { return {Kind::Wait, Facing::N}; }

    friend bool operator==(const Action& a, const Action& b) {
        return a.kind == b.kind && (a.kind != Kind::Move || a.direction == b.direction);
    }
};

/// Single-character action codes used in logs: N E S W (move), I (interact), _ (wait).
std::string to_string(Action a);
std::optional<Action> parse_action(std::string_view s);

using ActionMap = std::map<AgentId, Action>;

enum class EventKind : std::uint8_t { Pickup, Place, PotFill, CookStart, CookDone, Plate, Deliver };

std::string to_string(EventKind k);

struct EnvironmentEvent {
    EventKind kind = EventKind::Pickup;
    int tick = 0;  // tick of the state the event produced
    std::optional<AgentId> agent;
    Cell cell;
    int item_id = 0;

    friend bool operator==(const EnvironmentEvent&, const EnvironmentEvent&) = default;
};

struct StepResult {
    WorldState state;
    std::vector<EnvironmentEvent> events;
};

/// Throws ConfigError if the layout is invalid.
WorldState init_game(LayoutPtr layout, std::uint64_t seed);

/// Advances one tick. Agents missing from `actions` wait. Throws ProtocolError
/// for an unknown agent id and LifecycleError on a terminal state.
StepResult step(const WorldState& state, const ActionMap& actions);

bool is_terminal(const WorldState& state);

/// True when at least one more soup can still be delivered from the board.
bool further_soup_possible(const WorldState& state);

/// Ingredient units across loose, held, potted and soup (existing + delivered).
int ingredient_units(const WorldState& state);

/// Canonical, deterministic serialization (sorted keys, no layout body).
nlohmann::json to_json(const WorldState& state);
WorldState world_from_json(const nlohmann::json& j, LayoutPtr layout);
std::string canonical_text(const WorldState& state);

nlohmann::json item_to_json(const Item& item);
Item item_from_json(const nlohmann::json& j);

}  // namespace tmm
