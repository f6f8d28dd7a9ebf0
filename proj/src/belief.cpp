#include "tmm/belief.hpp"

#include "tmm/errors.hpp"

#include <algorithm>

namespace tmm {

namespace {

nlohmann::json contents_json(const Contents& c) {
    nlohmann::json out = nlohmann::json::array();
    for (auto cls : c) out.push_back(to_string(cls));
    return out;
}

Contents contents_from_json(const nlohmann::json& j) {
    Contents out;
    for (const auto& c : j) out.push_back(parse_item_class(c.get<std::string>()).value());
    return out;
}

nlohmann::json location_json(const Location& loc) {
    return std::visit(
        [](const auto& l) -> nlohmann::json {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, OnCounter>) return {{"kind", "counter"}, {"x", l.cell.x}, {"y", l.cell.y}};
            else if constexpr (std::is_same_v<T, HeldBy>) return {{"kind", "held"}, {"agent", to_string(l.agent)}};
            else if constexpr (std::is_same_v<T, InPot>) return {{"kind", "pot"}, {"x", l.pot.x}, {"y", l.pot.y}};
            else {
                const char* reason = l.reason == OffBoardReason::Consumed    ? "consumed"
                                     : l.reason == OffBoardReason::Delivered ? "delivered"
                                                                             : "vanished";
                return {{"kind", "offboard"}, {"reason", reason}};
            }
        },
        loc);
}

Location location_from_json(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    if (kind == "counter") return OnCounter{{j.at("x").get<int>(), j.at("y").get<int>()}};
    if (kind == "held") return HeldBy{parse_agent(j.at("agent").get<std::string>()).value()};
    if (kind == "pot") return InPot{{j.at("x").get<int>(), j.at("y").get<int>()}};
    const auto reason = j.at("reason").get<std::string>();
    if (reason == "consumed") return OffBoard{OffBoardReason::Consumed};
    if (reason == "delivered") return OffBoard{OffBoardReason::Delivered};
    if (reason == "vanished") return OffBoard{OffBoardReason::Vanished};
    throw CorruptionError("belief: unknown off-board reason '" + reason + "'", -1);
}

std::optional<ProvenanceKind> parse_provenance_kind(const std::string& s) {
    for (auto k : {ProvenanceKind::Consumed, ProvenanceKind::Delivered, ProvenanceKind::Vanished,
                   ProvenanceKind::Revived, ProvenanceKind::InferredPickup, ProvenanceKind::InferredPlating,
                   ProvenanceKind::Conflict})
        if (to_string(k) == s) return k;
    return std::nullopt;
}

nlohmann::json item_signature(const SceneItem& item, const std::string& where) {
    return {where, to_string(item.cls), contents_json(item.soup_contents), item.plated};
}

}  // namespace

bool on_board(const Location& loc) { return !std::holds_alternative<OffBoard>(loc); }

std::string to_string(const Location& loc) {
    return std::visit(
        [](const auto& l) -> std::string {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, OnCounter>) return "counter:" + to_string(l.cell);
            else if constexpr (std::is_same_v<T, HeldBy>) return "held:" + to_string(l.agent);
            else if constexpr (std::is_same_v<T, InPot>) return "pot:" + to_string(l.pot);
            else {
                switch (l.reason) {
                    case OffBoardReason::Consumed: return "offboard:consumed";
                    case OffBoardReason::Delivered: return "offboard:delivered";
                    case OffBoardReason::Vanished: return "offboard:vanished";
                }
                return "offboard";
            }
        },
        loc);
}

std::string to_string(ProvenanceKind k) {
    switch (k) {
        case ProvenanceKind::Consumed: return "consumed";
        case ProvenanceKind::Delivered: return "delivered";
        case ProvenanceKind::Vanished: return "vanished";
        case ProvenanceKind::Revived: return "revived";
        case ProvenanceKind::InferredPickup: return "inferred_pickup";
        case ProvenanceKind::InferredPlating: return "inferred_plating";
        case ProvenanceKind::Conflict: return "conflict";
    }
    return "?";
}

const BeliefObject* BeliefState::find(int belief_id) const {
    auto it = std::lower_bound(objects.begin(), objects.end(), belief_id,
                               [](const BeliefObject& o, int id) { return o.belief_id < id; });
    return it != objects.end() && it->belief_id == belief_id ? &*it : nullptr;
}

BeliefObject* BeliefState::find(int belief_id) {
    return const_cast<BeliefObject*>(std::as_const(*this).find(belief_id));
}

const BeliefObject* BeliefState::held_by(AgentId a) const {
    for (const auto& o : objects)
        if (const auto* h = std::get_if<HeldBy>(&o.location); h && h->agent == a) return &o;
    return nullptr;
}

Contents BeliefState::pot_contents(Cell pot) const {
    Contents out;
    for (const auto& o : objects)
        if (const auto* p = std::get_if<InPot>(&o.location); p && p->pot == pot) out.push_back(o.cls);
    return canonical(out);
}

const PotBelief* BeliefState::pot(Cell c) const {
    for (const auto& p : pots)
        if (p.cell == c) return &p;
    return nullptr;
}

bool Matching::belief_matched(int id) const {
    return std::any_of(pairs.begin(), pairs.end(), [id](const auto& kv) { return kv.second == id; });
}

BeliefState init_belief(const WorldState& state) {
    if (state.tick != 0)
        throw LifecycleError("init_belief: expected tick 0, got " + std::to_string(state.tick));
    BeliefState b;
    b.layout = state.layout;
    b.tick = 0;
    for (const auto& a : state.agents) b.agents[index_of(a.id)] = {a.id, a.cell, a.facing};
    for (const auto& [cell, item] : state.loose_items) {
        BeliefObject o;
        o.belief_id = b.next_id++;
        o.cls = item.cls;
        o.soup_contents = canonical(item.soup_contents);
        o.plated = item.plated;
        o.location = OnCounter{cell};
        o.last_cell = cell;
        o.last_observed_tick = 0;
        b.objects.push_back(o);
    }
    for (const auto& p : state.pots) b.pots.push_back({p.cell, p.phase, p.cook_ticks_remaining, 0});
    b.census[ItemClass::Onion] = state.layout->initial_count(ItemClass::Onion);
    b.census[ItemClass::Tomato] = state.layout->initial_count(ItemClass::Tomato);
    b.census[ItemClass::Dish] = state.layout->initial_count(ItemClass::Dish);
    return b;
}

Cell believed_position(const BeliefState& belief, const BeliefObject& object) {
    return std::visit(
        [&](const auto& l) -> Cell {
            using T = std::decay_t<decltype(l)>;
            if constexpr (std::is_same_v<T, OnCounter>) return l.cell;
            else if constexpr (std::is_same_v<T, HeldBy>) return belief.agent(l.agent).cell;
            else if constexpr (std::is_same_v<T, InPot>) return l.pot;
            else return object.last_cell;
        },
        object.location);
}

Scene to_scene(const BeliefState& belief) {
    Scene scene;
    scene.layout = belief.layout;
    scene.tick = belief.tick;
    for (const auto& a : belief.agents) scene.agents[index_of(a.id)] = {a.id, a.cell, a.facing, std::nullopt};
    for (const auto& o : belief.objects) {
        if (const auto* c = std::get_if<OnCounter>(&o.location)) {
            scene.loose.emplace(c->cell, o.description());
        } else if (const auto* h = std::get_if<HeldBy>(&o.location)) {
            auto& held = scene.agents[index_of(h->agent)].held;
            if (!held) held = o.description();
        }
    }
    for (const auto& p : belief.pots)
        scene.pots.push_back({p.cell, belief.pot_contents(p.cell), p.phase, p.cook_ticks_remaining});
    return scene;
}

BeliefState predict_teammate_belief(const BeliefState& robot_belief, const BeliefState& prev_pred,
                                    AgentId user, const VisibilityRegion& user_region) {
    return update_belief(prev_pred, filter_observations(to_scene(robot_belief), user, user_region));
}

CensusReport census_report(const BeliefState& belief) {
    CensusReport r;
    r.expected = belief.census;
    for (auto c : {ItemClass::Onion, ItemClass::Tomato, ItemClass::Dish}) r.accounted[c] = 0;
    for (const auto& o : belief.objects) {
        const auto* off = std::get_if<OffBoard>(&o.location);
        if (o.cls == ItemClass::Soup) {
            for (auto c : o.soup_contents) ++r.accounted[c];
        } else if (is_ingredient(o.cls)) {
            // consumed ingredients live on inside their soup's contents
            if (!off || off->reason == OffBoardReason::Vanished) ++r.accounted[o.cls];
        } else {
            ++r.accounted[o.cls];
        }
    }
    return r;
}

std::string content_signature(const BeliefState& belief) {
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& a : belief.agents) agents.push_back({to_string(a.id), a.cell.x, a.cell.y, to_string(a.facing)});
    std::vector<std::string> items;
    std::vector<std::string> delivered;
    for (const auto& o : belief.objects) {
        if (on_board(o.location) && !std::holds_alternative<InPot>(o.location)) {
            items.push_back(item_signature(o.description(), to_string(o.location)).dump());
        } else if (const auto* off = std::get_if<OffBoard>(&o.location);
                   off && off->reason == OffBoardReason::Delivered) {
            delivered.push_back(contents_json(o.soup_contents).dump());
        }
    }
    std::sort(items.begin(), items.end());
    std::sort(delivered.begin(), delivered.end());
    nlohmann::json pots = nlohmann::json::array();
    for (const auto& p : belief.pots)
        pots.push_back({p.cell.x, p.cell.y, contents_json(belief.pot_contents(p.cell)), to_string(p.phase),
                        p.cook_ticks_remaining});
    return nlohmann::json{{"agents", agents}, {"items", items}, {"pots", pots}, {"delivered", delivered}}.dump();
}

std::string content_signature(const WorldState& state) {
    nlohmann::json agents = nlohmann::json::array();
    std::vector<std::string> items;
    for (const auto& a : state.agents) {
        agents.push_back({to_string(a.id), a.cell.x, a.cell.y, to_string(a.facing)});
        if (a.held) items.push_back(item_signature(describe(*a.held), "held:" + to_string(a.id)).dump());
    }
    for (const auto& [cell, item] : state.loose_items)
        items.push_back(item_signature(describe(item), "counter:" + to_string(cell)).dump());
    std::sort(items.begin(), items.end());
    std::vector<std::string> delivered;
    for (const auto& d : state.delivered_soups) delivered.push_back(contents_json(canonical(d.soup_contents)).dump());
    std::sort(delivered.begin(), delivered.end());
    nlohmann::json pots = nlohmann::json::array();
    for (const auto& p : state.pots)
        pots.push_back({p.cell.x, p.cell.y, contents_json(canonical(p.contents)), to_string(p.phase),
                        p.cook_ticks_remaining});
    return nlohmann::json{{"agents", agents}, {"items", items}, {"pots", pots}, {"delivered", delivered}}.dump();
}

nlohmann::json to_json(const BeliefState& b, bool with_provenance) {
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& a : b.agents)
        agents.push_back({{"id", to_string(a.id)}, {"x", a.cell.x}, {"y", a.cell.y}, {"facing", to_string(a.facing)}});
    nlohmann::json objects = nlohmann::json::array();
    for (const auto& o : b.objects) {
        nlohmann::json j{{"id", o.belief_id},
                         {"class", to_string(o.cls)},
                         {"location", location_json(o.location)},
                         {"last", {o.last_cell.x, o.last_cell.y}},
                         {"seen", o.last_observed_tick},
                         {"flagged", o.flagged}};
        if (o.cls == ItemClass::Soup) {
            j["contents"] = contents_json(o.soup_contents);
            j["plated"] = o.plated;
        }
        objects.push_back(j);
    }
    nlohmann::json pots = nlohmann::json::array();
    for (const auto& p : b.pots)
        pots.push_back({{"x", p.cell.x},
                        {"y", p.cell.y},
                        {"phase", to_string(p.phase)},
                        {"remaining", p.cook_ticks_remaining},
                        {"contents", contents_json(b.pot_contents(p.cell))},
                        {"seen", p.last_observed_tick}});
    nlohmann::json census = nlohmann::json::object();
    for (const auto& [cls, n] : b.census) census[to_string(cls)] = n;
    nlohmann::json j{{"layout", b.layout ? b.layout->name : std::string()},
                     {"tick", b.tick},
                     {"next_id", b.next_id},
                     {"conflicts", b.conflicts},
                     {"census", census},
                     {"agents", agents},
                     {"objects", objects},
                     {"pots", pots}};
    if (with_provenance) {
        nlohmann::json prov = nlohmann::json::array();
        for (const auto& e : b.provenance)
            prov.push_back({{"tick", e.tick}, {"kind", to_string(e.kind)}, {"ids", e.belief_ids}, {"note", e.note}});
        j["provenance"] = prov;
    }
    return j;
}

BeliefState belief_from_json(const nlohmann::json& j, LayoutPtr layout) {
    try {
        BeliefState b;
        b.layout = std::move(layout);
        b.tick = j.at("tick").get<int>();
        b.next_id = j.at("next_id").get<int>();
        b.conflicts = j.at("conflicts").get<int>();
        for (const auto& [k, v] : j.at("census").items()) b.census[parse_item_class(k).value()] = v.get<int>();
        for (const auto& a : j.at("agents")) {
            AgentBelief ab;
            ab.id = parse_agent(a.at("id").get<std::string>()).value();
            ab.cell = {a.at("x").get<int>(), a.at("y").get<int>()};
            ab.facing = parse_facing(a.at("facing").get<std::string>()).value();
            b.agents[index_of(ab.id)] = ab;
        }
        for (const auto& o : j.at("objects")) {
            BeliefObject bo;
            bo.belief_id = o.at("id").get<int>();
            bo.cls = parse_item_class(o.at("class").get<std::string>()).value();
            bo.location = location_from_json(o.at("location"));
            bo.last_cell = {o.at("last").at(0).get<int>(), o.at("last").at(1).get<int>()};
            bo.last_observed_tick = o.at("seen").get<int>();
            bo.flagged = o.at("flagged").get<bool>();
            if (bo.cls == ItemClass::Soup) {
                bo.soup_contents = contents_from_json(o.at("contents"));
                bo.plated = o.at("plated").get<bool>();
            }
            b.objects.push_back(bo);
        }
        std::sort(b.objects.begin(), b.objects.end(),
                  [](const BeliefObject& x, const BeliefObject& y) { return x.belief_id < y.belief_id; });
        for (const auto& p : j.at("pots")) {
            PotBelief pb;
            pb.cell = {p.at("x").get<int>(), p.at("y").get<int>()};
            pb.phase = parse_pot_phase(p.at("phase").get<std::string>()).value();
            pb.cook_ticks_remaining = p.at("remaining").get<int>();
            pb.last_observed_tick = p.at("seen").get<int>();
            b.pots.push_back(pb);
        }
        if (j.contains("provenance")) {
            for (const auto& e : j.at("provenance")) {
                ProvenanceEntry pe;
                pe.tick = e.at("tick").get<int>();
                pe.kind = parse_provenance_kind(e.at("kind").get<std::string>()).value();
                pe.belief_ids = e.at("ids").get<std::vector<int>>();
                pe.note = e.at("note").get<std::string>();
                b.provenance.push_back(pe);
            }
        }
        return b;
    } catch (const CorruptionError&) {
        throw;
    } catch (const std::exception& e) {
        throw CorruptionError(std::string("belief: malformed record: ") + e.what(), -1);
    }
}

std::string canonical_text(const BeliefState& belief) { return to_json(belief).dump(); }

nlohmann::json scene_document(const BeliefState& belief) {
    return {{"floorplan", layout_to_json(*belief.layout)},
            {"belief", to_json(belief, false)},
            {"scene_graph", to_json(derive_scene_graph(belief))}};
}

std::string scene_text(const BeliefState& belief) { return scene_document(belief).dump(); }

BeliefState belief_from_scene_document(const nlohmann::json& doc) {
    auto layout = std::make_shared<const Layout>(layout_from_json(doc.at("floorplan")));
    return belief_from_json(doc.at("belief"), layout);
}

}  // namespace tmm
