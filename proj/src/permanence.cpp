#include "tmm/belief.hpp"

#include "tmm/errors.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <unordered_map>

namespace tmm {

namespace {

constexpr double kUnmatchedPenalty = 1e6;
constexpr double kTieEpsilon = 1e-9;
constexpr std::size_t kExactAssignmentLimit = 20;

bool is_vanished(const Location& loc) {
    const auto* off = std::get_if<OffBoard>(&loc);
    return off && off->reason == OffBoardReason::Vanished;
}

/// Position of a believed object with held objects placed at the holder's
/// currently observed cell.
Cell position_in(const BeliefObject& o, const ObservationSet& obs) {
    if (const auto* h = std::get_if<HeldBy>(&o.location)) return obs.agents[index_of(h->agent)].cell;
    if (const auto* c = std::get_if<OnCounter>(&o.location)) return c->cell;
    if (const auto* p = std::get_if<InPot>(&o.location)) return p->pot;
    return o.last_cell;
}

bool should_be_visible(const BeliefObject& o, const ObservationSet& obs) {
    if (const auto* c = std::get_if<OnCounter>(&o.location)) return obs.sees(c->cell);
    if (const auto* h = std::get_if<HeldBy>(&o.location)) return obs.agents[index_of(h->agent)].hand_visible;
    if (const auto* p = std::get_if<InPot>(&o.location)) {
        for (const auto& pot : obs.pots)
            if (pot.cell == p->pot) return pot.contents_visible;
    }
    return false;
}

std::string description_key(const SceneItem& item) {
    std::string key = to_string(item.cls);
    for (auto c : item.soup_contents) key += "," + to_string(c);
    if (item.plated) key += "+plated";
    return key;
}

std::vector<int> greedy_assignment(const std::vector<std::vector<double>>& cost) {
    const std::size_t m = cost.empty() ? 0 : cost.front().size();
    std::vector<bool> used(m, false);
    std::vector<int> out;
    for (const auto& row : cost) {
        int best = -1;
        for (std::size_t j = 0; j < m; ++j)
            if (!used[j] && row[j] >= 0 && (best < 0 || row[j] < row[static_cast<std::size_t>(best)] - kTieEpsilon))
                best = static_cast<int>(j);
        if (best >= 0) used[static_cast<std::size_t>(best)] = true;
        out.push_back(best);
    }
    return out;
}

}  // namespace

std::vector<int> min_distance_assignment(const std::vector<std::vector<double>>& cost) {
    const std::size_t n = cost.size();
    if (n == 0) return {};
    const std::size_t m = cost.front().size();
    // FIXME: beyond the exact limit this degrades to greedy nearest-first.
    if (m > kExactAssignmentLimit) return greedy_assignment(cost);

    std::unordered_map<std::uint64_t, double> memo;
    std::function<double(std::size_t, std::uint32_t)> best = [&](std::size_t i, std::uint32_t mask) -> double {
        if (i == n) return 0.0;
        const std::uint64_t key = (static_cast<std::uint64_t>(i) << 32) | mask;
        if (auto it = memo.find(key); it != memo.end()) return it->second;
        double r = kUnmatchedPenalty + best(i + 1, mask);
        for (std::size_t j = 0; j < m; ++j) {
            if ((mask >> j) & 1U || cost[i][j] < 0) continue;
            r = std::min(r, cost[i][j] + best(i + 1, mask | (1U << j)));
        }
        memo.emplace(key, r);
        return r;
    };

    std::vector<int> out;
    std::uint32_t mask = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double target = best(i, mask);
        int choice = -1;
        for (std::size_t j = 0; j < m; ++j) {
            if ((mask >> j) & 1U || cost[i][j] < 0) continue;
            if (cost[i][j] + best(i + 1, mask | (1U << j)) <= target + kTieEpsilon) {
                choice = static_cast<int>(j);
                break;
            }
        }
        if (choice >= 0) mask |= 1U << static_cast<unsigned>(choice);
        out.push_back(choice);
    }
    return out;
}

std::vector<ObservedItem> observed_items(const ObservationSet& obs) {
    std::vector<ObservedItem> items;
    for (const auto& [cell, item] : obs.items) items.push_back({item, OnCounter{cell}, cell});
    for (const auto& a : obs.agents)
        if (a.hand_visible && a.held) items.push_back({*a.held, HeldBy{a.id}, a.cell});
    for (const auto& p : obs.pots)
        if (p.contents_visible)
            for (auto c : p.contents) items.push_back({SceneItem{c, {}, false}, InPot{p.cell}, p.cell});
    std::stable_sort(items.begin(), items.end(), [](const ObservedItem& a, const ObservedItem& b) {
        if (a.position != b.position) return a.position < b.position;
        if (a.item.cls != b.item.cls) return a.item.cls < b.item.cls;
        return a.where.index() < b.where.index();
    });
    return items;
}

Matching pass1_match_static(const BeliefState& prev, std::span<const ObservedItem> items) {
    Matching m;
    std::set<int> used;
    for (std::size_t i = 0; i < items.size(); ++i) {
        for (const auto& o : prev.objects) {
            if (used.count(o.belief_id) || !on_board(o.location)) continue;
            if (o.location == items[i].where && o.description() == items[i].item) {
                m.pairs.emplace(i, o.belief_id);
                used.insert(o.belief_id);
                break;
            }
        }
    }
    return m;
}

bool pass2_eligible(const BeliefObject& believed, const ObservedItem& observed) {
    if (!(believed.description() == observed.item)) return false;
    if (!on_board(believed.location) && !is_vanished(believed.location)) return false;
    // ingredients never leave a pot
    if (const auto* p = std::get_if<InPot>(&believed.location)) {
        const auto* q = std::get_if<InPot>(&observed.where);
        return q && q->pot == p->pot;
    }
    return true;
}

Matching pass2_match_nearest(const BeliefState& prev, const ObservationSet& obs,
                             std::span<const ObservedItem> items, Matching matching) {
    std::set<int> matched;
    for (const auto& [i, id] : matching.pairs) matched.insert(id);

    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < items.size(); ++i)
        if (!matching.observed_matched(i)) groups[description_key(items[i].item)].push_back(i);

    for (const auto& [key, rows] : groups) {
        std::vector<const BeliefObject*> candidates;
        for (const auto& o : prev.objects) {
            if (matched.count(o.belief_id)) continue;
            const bool any = std::any_of(rows.begin(), rows.end(),
                                         [&](std::size_t i) { return pass2_eligible(o, items[i]); });
            if (any) candidates.push_back(&o);
        }
        if (candidates.empty()) continue;

        std::vector<std::vector<double>> cost(rows.size(), std::vector<double>(candidates.size(), -1.0));
        for (std::size_t r = 0; r < rows.size(); ++r)
            for (std::size_t c = 0; c < candidates.size(); ++c)
                if (pass2_eligible(*candidates[c], items[rows[r]]))
                    cost[r][c] = distance(position_in(*candidates[c], obs), items[rows[r]].position);

        const auto assignment = min_distance_assignment(cost);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (assignment[r] < 0) continue;
            const int id = candidates[static_cast<std::size_t>(assignment[r])]->belief_id;
            matching.pairs.emplace(rows[r], id);
            matched.insert(id);
        }
    }

    // Hidden-hand default: something that should have been seen but was not
    // is assumed picked up by the closest agent whose hands are out of view.
    std::array<bool, 2> holding{false, false};
    for (const auto& o : prev.objects) {
        Location loc = o.location;
        for (const auto& [i, id] : matching.pairs)
            if (id == o.belief_id) loc = items[i].where;
        if (const auto* h = std::get_if<HeldBy>(&loc)) holding[index_of(h->agent)] = true;
    }
    for (const auto& o : prev.objects) {
        if (matched.count(o.belief_id) || !on_board(o.location) || !should_be_visible(o, obs)) continue;
        if (std::holds_alternative<InPot>(o.location) || o.cls == ItemClass::Soup) continue;
        const Cell from = position_in(o, obs);
        std::optional<AgentId> pick;
        for (AgentId a : kAgents) {
            const auto& seen = obs.agents[index_of(a)];
            if (seen.hand_visible || holding[index_of(a)]) continue;
            if (!pick || distance2(from, seen.cell) < distance2(from, obs.agents[index_of(*pick)].cell)) pick = a;
        }
        if (pick) {
            matching.reresolved.emplace(o.belief_id, HeldBy{*pick});
            holding[index_of(*pick)] = true;
        }
    }
    return matching;
}

BeliefState pass3_resolve_transforms(const BeliefState& prev, const ObservationSet& obs,
                                     std::span<const ObservedItem> items, const Matching& matching) {
    BeliefState next = prev;
    next.tick = std::max(prev.tick, obs.tick);
    const int elapsed = next.tick - prev.tick;
    for (const auto& a : obs.agents) next.agents[index_of(a.id)] = {a.id, a.cell, a.facing};

    auto place = [&](BeliefObject& o, const Location& loc) {
        if (on_board(loc)) {
            o.last_cell = std::holds_alternative<HeldBy>(loc)
                              ? next.agent(std::get<HeldBy>(loc).agent).cell
                              : std::holds_alternative<OnCounter>(loc) ? std::get<OnCounter>(loc).cell
                                                                       : std::get<InPot>(loc).pot;
        }
        o.location = loc;
    };
    auto log = [&](ProvenanceKind kind, std::vector<int> ids, std::string note) {
        next.provenance.push_back({next.tick, kind, std::move(ids), std::move(note)});
    };

    std::set<int> settled;  // observed, re-resolved or consumed during this update
    for (const auto& [i, id] : matching.pairs) {
        BeliefObject& o = *next.find(id);
        const bool revived = is_vanished(o.location);
        place(o, items[i].where);
        o.last_observed_tick = obs.tick;
        if (revived) {
            o.flagged = false;
            log(ProvenanceKind::Revived, {id}, "vanished " + to_string(o.cls) + " observed again");
        }
        settled.insert(id);
    }
    for (const auto& [id, loc] : matching.reresolved) {
        BeliefObject& o = *next.find(id);
        place(o, loc);
        log(ProvenanceKind::InferredPickup, {id}, to_string(o.cls) + " assumed " + to_string(loc));
        settled.insert(id);
    }

    // Picks a free believed object of `cls`, walking the preference tiers in order.
    using Tier = std::function<bool(const BeliefObject&)>;
    auto take = [&](ItemClass cls, Cell near, const std::vector<Tier>& tiers) -> BeliefObject* {
        for (const auto& tier : tiers) {
            BeliefObject* best = nullptr;
            for (auto& o : next.objects) {
                if (o.cls != cls || settled.count(o.belief_id) || !tier(o)) continue;
                if (!on_board(o.location) && !is_vanished(o.location)) continue;
                if (!best || distance2(believed_position(next, o), near) <
                                 distance2(believed_position(next, *best), near))
                    best = &o;
            }
            if (best) return best;
        }
        return nullptr;
    };
    auto consume = [&](BeliefObject& o) {
        o.location = OffBoard{OffBoardReason::Consumed};
        settled.insert(o.belief_id);
    };
    auto dish_tiers = [](std::optional<AgentId> holder) {
        return std::vector<Tier>{
            [holder](const BeliefObject& o) {
                const auto* h = std::get_if<HeldBy>(&o.location);
                return holder && h && h->agent == *holder;
            },
            [](const BeliefObject& o) { return std::holds_alternative<OnCounter>(o.location); },
            [](const BeliefObject& o) { return std::holds_alternative<HeldBy>(o.location); },
            [](const BeliefObject& o) { return is_vanished(o.location); },
        };
    };

    // Creates a soup from believed ingredients (and a dish); returns its id.
    auto make_soup = [&](const SceneItem& soup, const Location& where, Cell near, std::optional<Cell> pot,
                         std::optional<AgentId> holder, std::vector<int> preferred) -> int {
        std::vector<int> used;
        bool underflow = false;
        for (int id : preferred) {
            consume(*next.find(id));
            used.push_back(id);
        }
        Contents need = soup.soup_contents;
        for (int id : preferred) {
            auto it = std::find(need.begin(), need.end(), next.find(id)->cls);
            if (it != need.end()) need.erase(it);
        }
        const std::vector<Tier> tiers{
            [pot](const BeliefObject& o) {
                const auto* p = std::get_if<InPot>(&o.location);
                return pot && p && p->pot == *pot;
            },
            [](const BeliefObject& o) { return std::holds_alternative<OnCounter>(o.location); },
            [](const BeliefObject& o) { return std::holds_alternative<HeldBy>(o.location); },
            [](const BeliefObject& o) { return std::holds_alternative<InPot>(o.location); },
            [](const BeliefObject& o) { return is_vanished(o.location); },
        };
        for (auto cls : need) {
            if (BeliefObject* o = take(cls, near, tiers)) {
                consume(*o);
                used.push_back(o->belief_id);
            } else {
                underflow = true;
            }
        }
        bool dish_missing = false;
        if (BeliefObject* d = take(ItemClass::Dish, near, dish_tiers(holder))) {
            consume(*d);
            used.push_back(d->belief_id);
        } else {
            dish_missing = true;
        }

        BeliefObject s;
        s.belief_id = next.next_id++;
        s.cls = ItemClass::Soup;
        s.soup_contents = soup.soup_contents;
        s.plated = soup.plated;
        s.last_observed_tick = obs.tick;
        place(s, where);
        s.flagged = underflow || dish_missing;
        next.objects.push_back(s);
        settled.insert(s.belief_id);

        std::vector<int> ids = used;
        ids.push_back(s.belief_id);
        log(ProvenanceKind::Consumed, ids, "soup " + std::to_string(s.belief_id) + " made");
        if (underflow || dish_missing) {
            ++next.conflicts;
            log(ProvenanceKind::Conflict, {s.belief_id},
                underflow ? "soup needs ingredients the belief no longer has" : "soup needs a dish the belief no longer has");
        }
        return s.belief_id;
    };

    // Observed items nothing could explain.
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (matching.observed_matched(i)) continue;
        const ObservedItem& seen = items[i];
        if (seen.item.cls == ItemClass::Soup) {
            std::optional<Cell> pot;
            for (const auto& o : next.objects) {
                const auto* p = std::get_if<InPot>(&o.location);
                if (!p || settled.count(o.belief_id)) continue;
                if (!pot || distance2(p->pot, seen.position) < distance2(*pot, seen.position) ||
                    (distance2(p->pot, seen.position) == distance2(*pot, seen.position) && p->pot < *pot))
                    pot = p->pot;
            }
            std::optional<AgentId> holder;
            if (const auto* h = std::get_if<HeldBy>(&seen.where)) holder = h->agent;
            make_soup(seen.item, seen.where, seen.position, pot, holder, {});
        } else {
            BeliefObject o;
            o.belief_id = next.next_id++;
            o.cls = seen.item.cls;
            o.last_observed_tick = obs.tick;
            o.flagged = true;
            place(o, seen.where);
            next.objects.push_back(o);
            settled.insert(o.belief_id);
            ++next.conflicts;
            log(ProvenanceKind::Conflict, {o.belief_id}, "observed " + to_string(o.cls) + " exceeds the census");
        }
    }

    // Believed objects that should have been seen and were not.
    std::map<Cell, std::vector<int>> missing_in_pot;
    std::vector<int> missing;
    for (const auto& o : prev.objects) {
        if (settled.count(o.belief_id) || !on_board(o.location) || !should_be_visible(o, obs)) continue;
        if (const auto* p = std::get_if<InPot>(&o.location))
            missing_in_pot[p->pot].push_back(o.belief_id);
        else
            missing.push_back(o.belief_id);
    }

    auto vanish = [&](int id) {
        BeliefObject& o = *next.find(id);
        o.location = OffBoard{OffBoardReason::Vanished};
        o.flagged = true;
        settled.insert(id);
        log(ProvenanceKind::Vanished, {id}, to_string(o.cls) + " disappeared in view");
    };

    for (const auto& [pot_cell, ids] : missing_in_pot) {
        const auto seen_pot = std::find_if(obs.pots.begin(), obs.pots.end(),
                                           [&](const ObservedPot& p) { return p.cell == pot_cell; });
        const bool emptied = seen_pot != obs.pots.end() && seen_pot->contents.empty();
        std::optional<AgentId> holder;
        if (emptied && ids.size() == static_cast<std::size_t>(kSoupSize)) {
            for (AgentId a : kAgents) {
                const auto& seen = obs.agents[index_of(a)];
                if (seen.hand_visible) continue;
                const BeliefObject* held = next.held_by(a);
                if (held && !settled.count(held->belief_id) && held->cls != ItemClass::Dish) continue;
                if (!holder || distance2(pot_cell, seen.cell) < distance2(pot_cell, obs.agents[index_of(*holder)].cell))
                    holder = a;
            }
        }
        if (holder) {
            Contents contents;
            for (int id : ids) contents.push_back(next.find(id)->cls);
            const SceneItem soup{ItemClass::Soup, canonical(contents), true};
            const int soup_id = make_soup(soup, HeldBy{*holder}, pot_cell, pot_cell, holder, ids);
            log(ProvenanceKind::InferredPlating, {soup_id}, "pot " + to_string(pot_cell) + " emptied out of view");
        } else {
            for (int id : ids) vanish(id);
        }
    }

    for (int id : missing) {
        BeliefObject& o = *next.find(id);
        if (settled.count(id)) continue;
        if (o.cls == ItemClass::Soup && o.plated) {
            o.location = OffBoard{OffBoardReason::Delivered};
            settled.insert(id);
            log(ProvenanceKind::Delivered, {id}, "plated soup left the board");
        } else {
            vanish(id);
        }
    }

    for (auto& pb : next.pots) {
        const auto seen = std::find_if(obs.pots.begin(), obs.pots.end(),
                                       [&](const ObservedPot& p) { return p.cell == pb.cell; });
        if (seen != obs.pots.end() && seen->contents_visible) {
            pb.phase = seen->phase;
            pb.cook_ticks_remaining = seen->cook_ticks_remaining;
            pb.last_observed_tick = obs.tick;
        } else if (pb.phase == PotPhase::Cooking) {
            // cooking time is known, so an unseen pot keeps cooking in belief
            pb.cook_ticks_remaining = std::max(0, pb.cook_ticks_remaining - elapsed);
            if (pb.cook_ticks_remaining == 0) pb.phase = PotPhase::Ready;
        }
        const std::size_t n = next.pot_contents(pb.cell).size();
        if (n == 0) {
            pb.phase = PotPhase::Idle;
            pb.cook_ticks_remaining = 0;
        } else if (n < static_cast<std::size_t>(kSoupSize) &&
                   (pb.phase == PotPhase::Cooking || pb.phase == PotPhase::Ready || pb.phase == PotPhase::Idle)) {
            pb.phase = PotPhase::Filling;
            pb.cook_ticks_remaining = 0;
        }
    }
    return next;
}

BeliefState update_belief(const BeliefState& prev, const ObservationSet& obs) {
    if (obs.tick < prev.tick)
        throw LifecycleError("update_belief: observation tick " + std::to_string(obs.tick) +
                             " precedes belief tick " + std::to_string(prev.tick));
    const auto items = observed_items(obs);
    Matching m = pass1_match_static(prev, items);
    m = pass2_match_nearest(prev, obs, items, std::move(m));
    return pass3_resolve_transforms(prev, obs, items, m);
}

}  // namespace tmm
