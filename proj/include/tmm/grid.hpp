#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tmm {

/// Board coordinate. x grows east, y grows south. Ordered row-major.
struct Cell {
    int x = 0;
    int y = 0;

    friend bool operator==(const Cell&, const Cell&) = default;
    friend std::strong_ordering operator<=>(const Cell& a, const Cell& b) {
        if (auto c = a.y <=> b.y; c != 0) return c;
        return a.x <=> b.x;
    }
};

enum class Facing : std::uint8_t { N, E, S, W };

inline constexpr std::array<Facing, 4> kFacings{Facing::N, Facing::E, Facing::S, Facing::W};

constexpr Cell facing_offset(Facing f) {
    switch (f) {
        case Facing::N: return {0, -1};
        case Facing::E: return {1, 0};
        case Facing::S: return {0, 1};
        case Facing::W: return {-1, 0};
    }
    return {0, 0};
}

constexpr Cell neighbor(Cell c, Facing f) {
    const Cell d = facing_offset(f);
    return {c.x + d.x, c.y + d.y};
}

constexpr int distance2(Cell a, Cell b) {
    const int dx = a.x - b.x;
    const int dy = a.y - b.y;
    return dx * dx + dy * dy;
}

constexpr int manhattan(Cell a, Cell b) {
    return (a.x > b.x ? a.x - b.x : b.x - a.x) + (a.y > b.y ? a.y - b.y : b.y - a.y);
}

double distance(Cell a, Cell b);

constexpr bool adjacent4(Cell a, Cell b) { return manhattan(a, b) == 1; }

/// Facing that points from `from` toward the 4-adjacent cell `to`.
std::optional<Facing> facing_toward(Cell from, Cell to);

enum class AgentId : std::uint8_t { Human = 0, Robot = 1 };

inline constexpr std::array<AgentId, 2> kAgents{AgentId::Human, AgentId::Robot};

constexpr std::size_t index_of(AgentId a) { return static_cast<std::size_t>(a); }
constexpr AgentId teammate_of(AgentId a) {
    return a == AgentId::Human ? AgentId::Robot : AgentId::Human;
}
constexpr bool is_known_agent(AgentId a) {
    return a == AgentId::Human || a == AgentId::Robot;
}

enum class ItemClass : std::uint8_t { Onion, Tomato, Dish, Soup };

constexpr bool is_ingredient(ItemClass c) {
    return c == ItemClass::Onion || c == ItemClass::Tomato;
}

std::string to_string(Facing f);
std::string to_string(AgentId a);
std::string to_string(ItemClass c);
std::string to_string(Cell c);

std::optional<Facing> parse_facing(std::string_view s);
std::optional<AgentId> parse_agent(std::string_view s);
std::optional<ItemClass> parse_item_class(std::string_view s);

/// Soup ingredient multiset kept in canonical (sorted) order.
using Contents = std::vector<ItemClass>;
Contents canonical(Contents c);

}  // namespace tmm
