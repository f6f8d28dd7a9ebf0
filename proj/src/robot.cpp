#include "tmm/robot.hpp"

#include "tmm/errors.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <tuple>

namespace tmm {

std::string to_string(Subtask::Kind k) {
    switch (k) {
        case Subtask::Kind::FetchIngredient: return "fetch-ingredient";
        case Subtask::Kind::DepositToPot: return "deposit-to-pot";
        case Subtask::Kind::FetchDish: return "fetch-dish";
        case Subtask::Kind::PlateSoup: return "plate-soup";
        case Subtask::Kind::DeliverSoup: return "deliver-soup";
        case Subtask::Kind::StashItem: return "stash-item";
        case Subtask::Kind::Idle: return "idle";
    }
    return "?";
}

std::optional<PlanPath> plan_path(Cell from, Cell target, const Layout& layout,
                                  std::optional<Cell> teammate_cell) {
    auto is_goal = [&](Cell c) { return adjacent4(c, target); };
    auto h = [&](Cell c) { return std::max(0, manhattan(c, target) - 1); };
    auto passable = [&](Cell c) { return layout.is_floor(c) && (!teammate_cell || c != *teammate_cell); };

    if (is_goal(from)) return PlanPath{{from}};

    // (f, insertion order, cell); insertion order keeps N,E,S,W expansion ties stable
    using Entry = std::tuple<int, long, Cell>;
    auto later = [](const Entry& a, const Entry& b) {
        return std::tie(std::get<0>(a), std::get<1>(a)) > std::tie(std::get<0>(b), std::get<1>(b));
    };
    std::priority_queue<Entry, std::vector<Entry>, decltype(later)> open(later);
    std::map<Cell, int> g{{from, 0}};
    std::map<Cell, Cell> parent;
    std::set<Cell> closed;
    long seq = 0;
    open.emplace(h(from), seq++, from);

    while (!open.empty()) {
        const Cell c = std::get<2>(open.top());
        open.pop();
        if (!closed.insert(c).second) continue;
        if (is_goal(c)) {
            PlanPath path;
            for (Cell at = c;; at = parent.at(at)) {
                path.cells.push_back(at);
                if (at == from) break;
            }
            std::reverse(path.cells.begin(), path.cells.end());
            return path;
        }
        for (Facing f : kFacings) {
            const Cell n = neighbor(c, f);
            if (!passable(n) || closed.count(n)) continue;
            const int cost = g[c] + 1;
            if (auto it = g.find(n); it != g.end() && it->second <= cost) continue;
            g[n] = cost;
            parent[n] = c;
            open.emplace(cost + h(n), seq++, n);
        }
    }
    return std::nullopt;
}

std::map<Cell, int> reach_costs(Cell from, const Layout& layout, std::optional<Cell> blocked) {
    std::map<Cell, int> dist{{from, 0}};
    std::deque<Cell> queue{from};
    while (!queue.empty()) {
        const Cell c = queue.front();
        queue.pop_front();
        for (Facing f : kFacings) {
            const Cell n = neighbor(c, f);
            if (layout.is_floor(n) && n != blocked && !dist.count(n)) {
                dist[n] = dist[c] + 1;
                queue.push_back(n);
            }
        }
    }
    return dist;
}

namespace {

std::optional<int> cost_to(const std::map<Cell, int>& dist, Cell target) {
    std::optional<int> best;
    for (Facing f : kFacings) {
        auto it = dist.find(neighbor(target, f));
        if (it != dist.end() && (!best || it->second < *best)) best = it->second;
    }
    return best;
}

/// Closest reachable candidate cell; ties go to the earlier candidate.
template <typename T, typename CellOf>
const T* nearest(const std::vector<T>& candidates, const std::map<Cell, int>& dist, CellOf cell_of) {
    const T* best = nullptr;
    int best_cost = 0;
    for (const auto& c : candidates) {
        const auto cost = cost_to(dist, cell_of(c));
        if (cost && (!best || *cost < best_cost)) {
            best = &c;
            best_cost = *cost;
        }
    }
    return best;
}

}  // namespace

Subtask select_subtask(const BeliefState& belief, AgentId self, const RobotConfig& config) {
    using K = Subtask::Kind;
    const Layout& layout = *belief.layout;
    const auto dist = reach_costs(belief.agent(self).cell, layout, belief.agent(teammate_of(self)).cell);
    const BeliefObject* held = belief.held_by(self);

    std::vector<Cell> ready, non_full;
    bool cooking_or_ready = false, dish_soon = false;
    for (const auto& p : belief.pots) {
        const auto n = belief.pot_contents(p.cell).size();
        if (p.phase == PotPhase::Ready) ready.push_back(p.cell);
        if (p.phase == PotPhase::Cooking || p.phase == PotPhase::Ready) cooking_or_ready = true;
        if (p.phase == PotPhase::Ready ||
            (p.phase == PotPhase::Cooking && p.cook_ticks_remaining <= config.dish_lead_ticks))
            dish_soon = true;
        if ((p.phase == PotPhase::Idle || p.phase == PotPhase::Filling) && n < static_cast<std::size_t>(kSoupSize))
            non_full.push_back(p.cell);
    }
    auto same = [](Cell c) { return c; };

    if (held && held->cls == ItemClass::Soup && held->plated) {
        const auto stations = layout.cells_of(Tile::ServingStation);
        if (const Cell* s = nearest(stations, dist, same)) return {K::DeliverSoup, 0, *s};
    }
    if (held && held->cls == ItemClass::Dish) {
        if (const Cell* p = nearest(ready, dist, same)) return {K::PlateSoup, 0, *p};
    }
    if (!held && dish_soon) {
        bool dish_in_hand = false;
        for (AgentId a : kAgents)
            if (const auto* h = belief.held_by(a); h && h->cls == ItemClass::Dish) dish_in_hand = true;
        if (!dish_in_hand) {
            std::vector<const BeliefObject*> dishes;
            for (const auto& o : belief.objects)
                if (o.cls == ItemClass::Dish && std::holds_alternative<OnCounter>(o.location)) dishes.push_back(&o);
            if (auto d = nearest(dishes, dist, [](const BeliefObject* o) { return std::get<OnCounter>(o->location).cell; }))
                return {K::FetchDish, (*d)->belief_id, std::get<OnCounter>((*d)->location).cell};
        }
    }
    if (held && is_ingredient(held->cls)) {
        // topping up a started pot first keeps ingredients from being split across pots
        std::size_t most = 0;
        for (Cell c : non_full) most = std::max(most, belief.pot_contents(c).size());
        std::vector<Cell> fullest;
        for (Cell c : non_full)
            if (belief.pot_contents(c).size() == most) fullest.push_back(c);
        const Cell* p = nearest(fullest, dist, same);
        if (!p) p = nearest(non_full, dist, same);
        if (p) return {K::DepositToPot, 0, *p};
    }
    if (!held && !non_full.empty()) {
        std::vector<const BeliefObject*> ingredients;
        for (const auto& o : belief.objects)
            if (is_ingredient(o.cls) && std::holds_alternative<OnCounter>(o.location)) ingredients.push_back(&o);
        if (auto o = nearest(ingredients, dist, [](const BeliefObject* x) { return std::get<OnCounter>(x->location).cell; }))
            return {K::FetchIngredient, (*o)->belief_id, std::get<OnCounter>((*o)->location).cell};
    }
    const bool useless = held && ((is_ingredient(held->cls) && non_full.empty()) ||
                                  (held->cls == ItemClass::Dish && !cooking_or_ready));
    if (useless) {
        std::vector<Cell> free;
        for (Cell c : layout.cells_of(Tile::Counter)) {
            const bool taken = std::any_of(belief.objects.begin(), belief.objects.end(), [&](const BeliefObject& o) {
                const auto* oc = std::get_if<OnCounter>(&o.location);
                return oc && oc->cell == c;
            });
            if (!taken) free.push_back(c);
        }
        if (const Cell* c = nearest(free, dist, same)) return {K::StashItem, 0, *c};
    }
    return {};
}

RobotAgent::RobotAgent(AgentId self, RobotConfig config) : self_(self), config_(config) {}

Action RobotAgent::act(const BeliefState& belief) {
    const Subtask next = select_subtask(belief, self_, config_);
    if (next != subtask_) plan_.reset();
    subtask_ = next;
    if (subtask_.kind == Subtask::Kind::Idle) return Action::wait();

    const AgentBelief& me = belief.agent(self_);
    if (adjacent4(me.cell, subtask_.target)) {
        const Facing toward = *facing_toward(me.cell, subtask_.target);
        // a move into a non-floor cell only turns the agent
        return me.facing == toward ? Action::interact() : Action::move(toward);
    }

    const Cell mate = belief.agent(teammate_of(self_)).cell;
    const bool on_track = plan_ && plan_pos_ + 1 < plan_->cells.size() && plan_->cells[plan_pos_] == me.cell;
    if (!on_track || plan_->cells[plan_pos_ + 1] == mate) {
        plan_ = plan_path(me.cell, subtask_.target, *belief.layout, mate);
        plan_pos_ = 0;
        if (!plan_ || plan_->cells.size() < 2) {
            plan_.reset();
            return Action::wait();
        }
    }
    const Cell step_to = plan_->cells[plan_pos_ + 1];
    ++plan_pos_;
    return Action::move(*facing_toward(me.cell, step_to));
}

Action RandomPolicy::next(const BeliefState&, AgentId) {
    static constexpr std::array<Action, 6> kChoices{Action::move(Facing::N), Action::move(Facing::E),
                                                    Action::move(Facing::S), Action::move(Facing::W),
                                                    Action::interact(), Action::wait()};
    return kChoices[rng_() % kChoices.size()];
}

Action TracePolicy::next(const BeliefState& belief, AgentId) {
    const auto t = static_cast<std::size_t>(belief.tick);
    return t < actions_.size() ? actions_[t] : Action::wait();
}

std::unique_ptr<Policy> make_policy(const std::string& name, AgentId self, std::uint64_t seed,
                                    const RobotConfig& config) {
    if (name == "robot") return std::make_unique<RobotPolicy>(self, config);
    if (name == "noop") return std::make_unique<NoopPolicy>();
    if (name == "random") return std::make_unique<RandomPolicy>(seed ^ (0x9e3779b97f4a7c15ULL * (index_of(self) + 1)));
    throw ConfigError("unknown policy '" + name + "'");
}

}  // namespace tmm
