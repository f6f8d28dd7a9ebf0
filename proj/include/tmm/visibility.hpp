#pragma once

#include "tmm/kitchen.hpp"

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tmm {

/// Identity-free description of a board item. Observations never carry ids.
struct SceneItem {
    ItemClass cls = ItemClass::Onion;
    Contents soup_contents;
    bool plated = false;

    friend bool operator==(const SceneItem&, const SceneItem&) = default;
};

SceneItem describe(const Item& item);

struct SceneAgent {
    AgentId id = AgentId::Human;
    Cell cell;
    Facing facing = Facing::N;
    std::optional<SceneItem> held;
};

struct ScenePot {
    Cell cell;
    Contents contents;
    PotPhase phase = PotPhase::Idle;
    int cook_ticks_remaining = 0;
};

/// What a filter can look at: either the true board or the content of a
/// belief state. Both render into the same shape.
struct Scene {
    LayoutPtr layout;
    int tick = 0;
    std::array<SceneAgent, 2> agents{};
    std::map<Cell, SceneItem> loose;
    std::vector<ScenePot> pots;
};

Scene scene_of(const WorldState& state);

enum class RegionKind : std::uint8_t { V, O, D };

/// Field-of-view parameter: kind plus radius in tiles. An infinite radius
/// stands for "full" and is written as e.g. `Ofull`.
struct VisibilityRegion {
    RegionKind kind = RegionKind::O;
    double radius = 1.0;

    bool is_full() const;
    std::string label() const;

    friend bool operator==(const VisibilityRegion&, const VisibilityRegion&) = default;
};

VisibilityRegion full_region(RegionKind kind = RegionKind::O);

/// Parses `<kind><radius>` (`V3`, `D4`, `O100`, `Ofull`). Throws ConfigError.
VisibilityRegion parse_region(std::string_view literal);

/// Center-point membership: Euclidean distance between cell centers within the
/// radius (inclusive) and the bearing within 45 (V) / 90 (D) degrees of the
/// facing direction, boundary inclusive. The agent's own cell always counts.
bool cell_visible(Cell agent, Facing facing, const VisibilityRegion& region, Cell target);

std::set<Cell> visible_cells(Cell agent, Facing facing, const VisibilityRegion& region,
                             const Layout& layout);
std::set<Cell> visible_cells(const AgentPose& pose, const VisibilityRegion& region,
                             const Layout& layout);

struct ObservedAgent {
    AgentId id = AgentId::Human;
    Cell cell;
    Facing facing = Facing::N;
    bool hand_visible = false;
    std::optional<SceneItem> held;  // meaningful only when hand_visible
};

struct ObservedPot {
    Cell cell;
    bool contents_visible = false;
    Contents contents;
    PotPhase phase = PotPhase::Idle;
    int cook_ticks_remaining = 0;
};

struct ObservationSet {
    int tick = 0;
    AgentId viewer = AgentId::Robot;
    LayoutPtr layout;
    std::set<Cell> visible_cells;
    std::map<Cell, SceneItem> items;        // loose items on visible cells
    std::array<ObservedAgent, 2> agents{};  // poses always present
    std::vector<ObservedPot> pots;          // locations always; contents when visible
    std::vector<Cell> appliance_cells;      // pots and serving stations, always

    const ObservedAgent& own_pose() const { return agents[index_of(viewer)]; }
    const ObservedAgent& teammate_pose() const { return agents[index_of(teammate_of(viewer))]; }
    bool sees(Cell c) const { return visible_cells.count(c) != 0; }
};

ObservationSet filter_observations(const Scene& source, AgentId viewer, const VisibilityRegion& region);
ObservationSet filter_observations(const WorldState& source, AgentId viewer,
                                   const VisibilityRegion& region);

}  // namespace tmm
