#pragma once

#include "tmm/kitchen.hpp"
#include "tmm/visibility.hpp"

#include <array>
#include <map>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace tmm {

struct OnCounter {
    Cell cell;
    friend bool operator==(const OnCounter&, const OnCounter&) = default;
};
struct HeldBy {
    AgentId agent = AgentId::Human;
    friend bool operator==(const HeldBy&, const HeldBy&) = default;
};
struct InPot {
    Cell pot;
    friend bool operator==(const InPot&, const InPot&) = default;
};

enum class OffBoardReason : std::uint8_t { Consumed, Delivered, Vanished };

struct OffBoard {
    OffBoardReason reason = OffBoardReason::Consumed;
    friend bool operator==(const OffBoard&, const OffBoard&) = default;
};

using Location = std::variant<OnCounter, HeldBy, InPot, OffBoard>;

bool on_board(const Location& loc);
std::string to_string(const Location& loc);

struct BeliefObject {
    int belief_id = 0;
    ItemClass cls = ItemClass::Onion;
    Contents soup_contents;  // Soup only
    bool plated = false;
    Location location = OffBoard{};
    Cell last_cell;  // physical position when the location was last set
    int last_observed_tick = 0;
    bool flagged = false;  // lowered confidence after a conflict

    SceneItem description() const { return {cls, soup_contents, plated}; }
};

struct PotBelief {
    Cell cell;
    PotPhase phase = PotPhase::Idle;
    int cook_ticks_remaining = 0;
    int last_observed_tick = 0;
};

struct AgentBelief {
    AgentId id = AgentId::Human;
    Cell cell;
    Facing facing = Facing::N;
};

enum class ProvenanceKind : std::uint8_t {
    Consumed,        // ingredient or dish turned into a soup
    Delivered,       // plated soup left the board
    Vanished,        // unexplained in-view disappearance
    Revived,         // vanished object observed again
    InferredPickup,  // missing object assigned to an agent with a hidden hand
    InferredPlating, // pot emptied out of view; soup assumed held
    Conflict,        // observation the census cannot explain
};

std::string to_string(ProvenanceKind k);

struct ProvenanceEntry {
    int tick = 0;
    ProvenanceKind kind = ProvenanceKind::Conflict;
    std::vector<int> belief_ids;
    std::string note;
};

/// Crisp, object-based record of what one agent is taken to know.
struct BeliefState {
    LayoutPtr layout;
    int tick = 0;
    std::vector<BeliefObject> objects;  // sorted by belief_id
    std::vector<PotBelief> pots;        // sorted by cell
    std::array<AgentBelief, 2> agents{};
    std::vector<ProvenanceEntry> provenance;
    std::map<ItemClass, int> census;  // initial onion / tomato / dish counts
    int next_id = 1;
    int conflicts = 0;

    const BeliefObject* find(int belief_id) const;
    BeliefObject* find(int belief_id);
    const BeliefObject* held_by(AgentId a) const;
    Contents pot_contents(Cell pot) const;
    const PotBelief* pot(Cell c) const;
    const AgentBelief& agent(AgentId a) const { return agents[index_of(a)]; }
};

/// Belief seeded with the full board at tick 0. Throws LifecycleError otherwise.
BeliefState init_belief(const WorldState& state);

/// Applies the three matching passes in order. Never throws on inconsistent
/// observations; conflicts are recorded in the provenance log.
BeliefState update_belief(const BeliefState& prev, const ObservationSet& obs);

/// Where a believed object physically is, with held objects at the holder's cell.
Cell believed_position(const BeliefState& belief, const BeliefObject& object);

Scene to_scene(const BeliefState& belief);

/// Full-chain helper: update_belief(prev_pred, filter(robot_belief, user, region)).
BeliefState predict_teammate_belief(const BeliefState& robot_belief, const BeliefState& prev_pred,
                                    AgentId user, const VisibilityRegion& user_region);

// ---- object permanence passes -------------------------------------------

/// One observed item with no identity. `where` is never OffBoard.
struct ObservedItem {
    SceneItem item;
    Location where;
    Cell position;
};

/// Loose, held-in-view and in-pot items, sorted by (position, class).
std::vector<ObservedItem> observed_items(const ObservationSet& obs);

struct Matching {
    std::map<std::size_t, int> pairs;     // observed index -> belief id
    std::map<int, Location> reresolved;   // belief id -> inferred location

    bool observed_matched(std::size_t i) const { return pairs.count(i) != 0; }
    bool belief_matched(int id) const;
};

/// Exact (location, class) matches, 1:1, lowest belief id first.
Matching pass1_match_static(const BeliefState& prev, std::span<const ObservedItem> items);

/// Closest-object assignment for what pass 1 left over, then the hidden-hand
/// default for believed objects that should have been seen but were not.
Matching pass2_match_nearest(const BeliefState& prev, const ObservationSet& obs,
                             std::span<const ObservedItem> items, Matching matching);

/// Soup creation / delivery / disappearance accounting; produces the next state.
BeliefState pass3_resolve_transforms(const BeliefState& prev, const ObservationSet& obs,
                                     std::span<const ObservedItem> items, const Matching& matching);

/// Whether a candidate believed object may explain an observed item in pass 2.
bool pass2_eligible(const BeliefObject& believed, const ObservedItem& observed);

/// Minimum total-distance assignment used by pass 2. `cost[i][j]` is the
/// distance from observed i to candidate j, or a negative value when the pair
/// is ineligible. Maximises the number of pairs first, then minimises the
/// summed distance; ties resolve to the lexicographically smallest choice
/// vector (candidate index, "unmatched" last). Returns candidate index or -1.
std::vector<int> min_distance_assignment(const std::vector<std::vector<double>>& cost);

// ---- census and comparison ----------------------------------------------

struct CensusReport {
    std::map<ItemClass, int> expected;
    std::map<ItemClass, int> accounted;
    bool holds() const { return expected == accounted; }
};

CensusReport census_report(const BeliefState& belief);

/// Identity-free canonical description of board content, comparable between
/// a belief and the true board.
std::string content_signature(const BeliefState& belief);
std::string content_signature(const WorldState& state);

// ---- scene graph ----------------------------------------------------------

struct SceneNode {
    std::string id;    // obj:<id>, agent:<name>, pot:<x,y>, station:<x,y>
    std::string kind;  // object | agent | pot | station
    nlohmann::json attributes;
};

struct SceneEdge {
    std::string from;
    std::string to;
    std::string relation;  // usable | adjacent

    friend bool operator==(const SceneEdge&, const SceneEdge&) = default;
};

struct SceneGraph {
    std::vector<SceneNode> nodes;
    std::vector<SceneEdge> edges;  // sorted

    bool has_edge(const std::string& a, const std::string& b, const std::string& relation) const;
};

SceneGraph derive_scene_graph(const BeliefState& belief);

// ---- serialization --------------------------------------------------------

nlohmann::json to_json(const BeliefState& belief, bool with_provenance = true);
BeliefState belief_from_json(const nlohmann::json& j, LayoutPtr layout);
nlohmann::json to_json(const SceneGraph& graph);
std::string canonical_text(const BeliefState& belief);

/// Self-contained scene document for prompts: floorplan, belief content
/// (without the provenance log) and the derived scene graph.
nlohmann::json scene_document(const BeliefState& belief);
std::string scene_text(const BeliefState& belief);
BeliefState belief_from_scene_document(const nlohmann::json& doc);

}  // namespace tmm
