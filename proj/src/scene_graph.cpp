#include "tmm/belief.hpp"

#include <algorithm>

namespace tmm {

namespace {

std::string object_node(int id) { return "obj:" + std::to_string(id); }
std::string agent_node(AgentId a) { return "agent:" + to_string(a); }
std::string pot_node(Cell c) { return "pot:" + to_string(c); }
std::string station_node(Cell c) { return "station:" + to_string(c); }

void add_edge(std::vector<SceneEdge>& edges, std::string a, std::string b, const char* relation) {
    if (b < a) std::swap(a, b);
    edges.push_back({std::move(a), std::move(b), relation});
}

}  // namespace

bool SceneGraph::has_edge(const std::string& a, const std::string& b, const std::string& relation) const {
    const auto [lo, hi] = std::minmax(a, b);
    return std::any_of(edges.begin(), edges.end(), [&](const SceneEdge& e) {
        return e.from == lo && e.to == hi && e.relation == relation;
    });
}

SceneGraph derive_scene_graph(const BeliefState& belief) {
    SceneGraph g;
    const Layout& layout = *belief.layout;
    const auto stations = layout.cells_of(Tile::ServingStation);

    for (const auto& a : belief.agents)
        g.nodes.push_back({agent_node(a.id), "agent",
                           {{"x", a.cell.x}, {"y", a.cell.y}, {"facing", to_string(a.facing)}}});
    for (const auto& p : belief.pots) {
        nlohmann::json contents = nlohmann::json::array();
        for (auto c : belief.pot_contents(p.cell)) contents.push_back(to_string(c));
        g.nodes.push_back({pot_node(p.cell), "pot",
                           {{"x", p.cell.x},
                            {"y", p.cell.y},
                            {"phase", to_string(p.phase)},
                            {"cook_ticks_remaining", p.cook_ticks_remaining},
                            {"contents", contents}}});
    }
    for (Cell s : stations) g.nodes.push_back({station_node(s), "station", {{"x", s.x}, {"y", s.y}}});

    for (const auto& o : belief.objects) {
        if (!on_board(o.location)) continue;
        nlohmann::json attrs{{"class", to_string(o.cls)}, {"location", to_string(o.location)}};
        if (o.cls == ItemClass::Soup) {
            nlohmann::json contents = nlohmann::json::array();
            for (auto c : o.soup_contents) contents.push_back(to_string(c));
            attrs["contents"] = contents;
            attrs["plated"] = o.plated;
        }
        g.nodes.push_back({object_node(o.belief_id), "object", attrs});

        const bool in_pot = std::holds_alternative<InPot>(o.location);
        for (const auto& p : belief.pots) {
            const bool non_full = belief.pot_contents(p.cell).size() < static_cast<std::size_t>(kSoupSize) &&
                                  (p.phase == PotPhase::Idle || p.phase == PotPhase::Filling);
            if (is_ingredient(o.cls) && !in_pot && non_full)
                add_edge(g.edges, object_node(o.belief_id), pot_node(p.cell), "usable");
            if (o.cls == ItemClass::Dish && p.phase == PotPhase::Ready)
                add_edge(g.edges, object_node(o.belief_id), pot_node(p.cell), "usable");
        }
        if (o.cls == ItemClass::Soup && o.plated)
            for (Cell s : stations) add_edge(g.edges, object_node(o.belief_id), station_node(s), "usable");
    }

    for (const auto& a : belief.agents) {
        for (const auto& o : belief.objects)
            if (const auto* c = std::get_if<OnCounter>(&o.location); c && adjacent4(a.cell, c->cell))
                add_edge(g.edges, agent_node(a.id), object_node(o.belief_id), "adjacent");
        for (const auto& p : belief.pots)
            if (adjacent4(a.cell, p.cell)) add_edge(g.edges, agent_node(a.id), pot_node(p.cell), "adjacent");
        for (Cell s : stations)
            if (adjacent4(a.cell, s)) add_edge(g.edges, agent_node(a.id), station_node(s), "adjacent");
    }

    std::sort(g.nodes.begin(), g.nodes.end(), [](const SceneNode& x, const SceneNode& y) { return x.id < y.id; });
    std::sort(g.edges.begin(), g.edges.end(), [](const SceneEdge& x, const SceneEdge& y) {
        return std::tie(x.from, x.to, x.relation) < std::tie(y.from, y.to, y.relation);
    });
    return g;
}

nlohmann::json to_json(const SceneGraph& graph) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : graph.nodes) nodes.push_back({{"id", n.id}, {"kind", n.kind}, {"attributes", n.attributes}});
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& e : graph.edges) edges.push_back({e.from, e.relation, e.to});
    return {{"nodes", nodes}, {"edges", edges}};
}

}  // namespace tmm
