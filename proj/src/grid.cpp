#include "tmm/grid.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace tmm {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return out;
}

}  // namespace

double distance(Cell a, Cell b) { return std::sqrt(static_cast<double>(distance2(a, b))); }

std::optional<Facing> facing_toward(Cell from, Cell to) {
    for (Facing f : kFacings) {
        if (neighbor(from, f) == to) return f;
    }
    return std::nullopt;
}

std::string to_string(Facing f) {
    switch (f) {
        case Facing::N: return "N";
        case Facing::E: return "E";
        case Facing::S: return "S";
        case Facing::W: return "W";
    }
    return "?";
}

std::string to_string(AgentId a) {
    switch (a) {
        case AgentId::Human: return "human";
        case AgentId::Robot: return "robot";
    }
    return "unknown";
}

std::string to_string(ItemClass c) {
    switch (c) {
        case ItemClass::Onion: return "onion";
        case ItemClass::Tomato: return "tomato";
        case ItemClass::Dish: return "dish";
        case ItemClass::Soup: return "soup";
    }
    return "?";
}

std::string to_string(Cell c) { return std::to_string(c.x) + "," + std::to_string(c.y); }

std::optional<Facing> parse_facing(std::string_view s) {
    const std::string v = lower(s);
    if (v == "n") return Facing::N;
    if (v == "e") return Facing::E;
    if (v == "s") return Facing::S;
    if (v == "w") return Facing::W;
    return std::nullopt;
}

std::optional<AgentId> parse_agent(std::string_view s) {
    const std::string v = lower(s);
    if (v == "human") return AgentId::Human;
    if (v == "robot") return AgentId::Robot;
    return std::nullopt;
}

std::optional<ItemClass> parse_item_class(std::string_view s) {
    const std::string v = lower(s);
    if (v == "onion") return ItemClass::Onion;
    if (v == "tomato") return ItemClass::Tomato;
    if (v == "dish" || v == "plate") return ItemClass::Dish;
    if (v == "soup") return ItemClass::Soup;
    return std::nullopt;
}

Contents canonical(Contents c) {
    std::sort(c.begin(), c.end());
    return c;
}

}  // namespace tmm
