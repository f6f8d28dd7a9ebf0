#include "tmm/visibility.hpp"

#include "tmm/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace tmm {

SceneItem describe(const Item& item) {
    return SceneItem{item.cls, item.cls == ItemClass::Soup ? canonical(item.soup_contents) : Contents{},
                     item.plated};
}

Scene scene_of(const WorldState& state) {
    Scene scene;
    scene.layout = state.layout;
    scene.tick = state.tick;
    for (const auto& a : state.agents) {
        SceneAgent sa{a.id, a.cell, a.facing, std::nullopt};
        if (a.held) sa.held = describe(*a.held);
        scene.agents[index_of(a.id)] = sa;
    }
    for (const auto& [cell, item] : state.loose_items) scene.loose.emplace(cell, describe(item));
    for (const auto& p : state.pots)
        scene.pots.push_back(ScenePot{p.cell, canonical(p.contents), p.phase, p.cook_ticks_remaining});
    return scene;
}

bool VisibilityRegion::is_full() const { return std::isinf(radius); }

std::string VisibilityRegion::label() const {
    std::string out(1, kind == RegionKind::V ? 'V' : kind == RegionKind::O ? 'O' : 'D');
    if (is_full()) return out + "full";
    std::ostringstream r;
    r << radius;
    return out + r.str();
}

VisibilityRegion full_region(RegionKind kind) {
    return {kind, std::numeric_limits<double>::infinity()};
}

VisibilityRegion parse_region(std::string_view literal) {
    if (literal.size() < 2) throw ConfigError("region: malformed literal '" + std::string(literal) + "'");
    VisibilityRegion region;
    switch (literal.front()) {
        case 'V': case 'v': region.kind = RegionKind::V; break;
        case 'O': case 'o': region.kind = RegionKind::O; break;
        case 'D': case 'd': region.kind = RegionKind::D; break;
        default: throw ConfigError("region: unknown kind in '" + std::string(literal) + "'");
    }
    const std::string_view rest = literal.substr(1);
    if (rest == "full" || rest == "inf") {
        region.radius = std::numeric_limits<double>::infinity();
        return region;
    }
    // std::from_chars for double is unavailable on older libstdc++.
    try {
        std::size_t used = 0;
        region.radius = std::stod(std::string(rest), &used);
        if (used != rest.size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
        throw ConfigError("region: malformed radius in '" + std::string(literal) + "'");
    }
    if (!(region.radius > 0)) throw ConfigError("region: radius must be positive");
    return region;
}

bool cell_visible(Cell agent, Facing facing, const VisibilityRegion& region, Cell target) {
    if (agent == target) return true;
    const long dx = target.x - agent.x;
    const long dy = target.y - agent.y;
    const long d2 = dx * dx + dy * dy;
    if (!region.is_full() && static_cast<double>(d2) > region.radius * region.radius) return false;
    const Cell f = facing_offset(facing);
    const long dot = dx * f.x + dy * f.y;
    switch (region.kind) {
        case RegionKind::O: return true;
        case RegionKind::D: return dot >= 0;
        // angle <= 45 deg  <=>  cos >= 1/sqrt(2)  <=>  dot >= 0 and 2 dot^2 >= |d|^2
        case RegionKind::V: return dot >= 0 && 2 * dot * dot >= d2;
    }
    return false;
}

std::set<Cell> visible_cells(Cell agent, Facing facing, const VisibilityRegion& region,
                             const Layout& layout) {
    std::set<Cell> out;
    for (int y = 0; y < layout.height; ++y)
        for (int x = 0; x < layout.width; ++x)
            if (cell_visible(agent, facing, region, {x, y})) out.insert({x, y});
    return out;
}

std::set<Cell> visible_cells(const AgentPose& pose, const VisibilityRegion& region,
                             const Layout& layout) {
    return visible_cells(pose.cell, pose.facing, region, layout);
}

ObservationSet filter_observations(const Scene& source, AgentId viewer, const VisibilityRegion& region) {
    ObservationSet obs;
    obs.tick = source.tick;
    obs.viewer = viewer;
    obs.layout = source.layout;
    const SceneAgent& me = source.agents[index_of(viewer)];
    obs.visible_cells = visible_cells(me.cell, me.facing, region, *source.layout);

    for (const auto& [cell, item] : source.loose)
        if (obs.sees(cell)) obs.items.emplace(cell, item);

    for (const auto& a : source.agents) {
        ObservedAgent oa{a.id, a.cell, a.facing, obs.sees(a.cell), std::nullopt};
        if (oa.hand_visible) oa.held = a.held;
        obs.agents[index_of(a.id)] = oa;
    }

    for (const auto& p : source.pots) {
        ObservedPot op{p.cell, obs.sees(p.cell), {}, PotPhase::Idle, 0};
        if (op.contents_visible) {
            op.contents = p.contents;
            op.phase = p.phase;
            op.cook_ticks_remaining = p.cook_ticks_remaining;
        }
        obs.pots.push_back(op);
    }

    obs.appliance_cells = source.layout->cells_of(Tile::Pot);
    for (Cell c : source.layout->cells_of(Tile::ServingStation)) obs.appliance_cells.push_back(c);
    std::sort(obs.appliance_cells.begin(), obs.appliance_cells.end());
    return obs;
}

ObservationSet filter_observations(const WorldState& source, AgentId viewer,
                                   const VisibilityRegion& region) {
    return filter_observations(scene_of(source), viewer, region);
}

}  // namespace tmm
