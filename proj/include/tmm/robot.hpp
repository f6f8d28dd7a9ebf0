#pragma once

#include "tmm/belief.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace tmm {

struct Subtask {
    enum class Kind : std::uint8_t {
        FetchIngredient,
        DepositToPot,
        FetchDish,
        PlateSoup,
        DeliverSoup,
        StashItem,  // put down something that has no use right now
        Idle,
    };

    Kind kind = Kind::Idle;
    int target_id = 0;  // belief id for the fetch kinds
    Cell target;        // cell to face and interact with

    friend bool operator==(const Subtask&, const Subtask&) = default;
};

std::string to_string(Subtask::Kind k);

struct RobotConfig {
    int dish_lead_ticks = 30;  // fetch a dish once a pot is this close to done
};

struct PlanPath {
    std::vector<Cell> cells;  // starts at the current cell
    int cost() const { return cells.empty() ? 0 : static_cast<int>(cells.size()) - 1; }
};

/// A* over Floor cells to any Floor cell 4-adjacent to `target`, treating the
/// teammate's cell as blocked. Expansion ties resolve N, E, S, W.
std::optional<PlanPath> plan_path(Cell from, Cell target, const Layout& layout,
                                  std::optional<Cell> teammate_cell);

/// BFS distance from `from` to every reachable Floor cell, never entering `blocked`.
std::map<Cell, int> reach_costs(Cell from, const Layout& layout, std::optional<Cell> blocked = std::nullopt);

Subtask select_subtask(const BeliefState& belief, AgentId self, const RobotConfig& config = {});

/// Task-oriented state machine driven only by its own belief.
class RobotAgent {
public:
    explicit RobotAgent(AgentId self = AgentId::Robot, RobotConfig config = {});

    Action act(const BeliefState& belief);

    const Subtask& subtask() const { return subtask_; }
    const std::optional<PlanPath>& plan() const { return plan_; }

private:
    AgentId self_;
    RobotConfig config_;
    Subtask subtask_;
    std::optional<PlanPath> plan_;
    std::size_t plan_pos_ = 0;
};

/// Anything that can drive one agent. Sees only the belief it is handed.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Action next(const BeliefState& belief, AgentId self) = 0;
    virtual std::string name() const = 0;
};

class RobotPolicy final : public Policy {
public:
    explicit RobotPolicy(AgentId self, RobotConfig config = {}) : agent_(self, config) {}
    Action next(const BeliefState& belief, AgentId) override { return agent_.act(belief); }
    std::string name() const override { return "robot"; }
    const RobotAgent& agent() const { return agent_; }

private:
    RobotAgent agent_;
};

class NoopPolicy final : public Policy {
public:
    Action next(const BeliefState&, AgentId) override { return Action::wait(); }
    std::string name() const override { return "noop"; }
};

class RandomPolicy final : public Policy {
public:
    explicit RandomPolicy(std::uint64_t seed) : rng_(seed) {}
    Action next(const BeliefState&, AgentId) override;
    std::string name() const override { return "random"; }

private:
    std::mt19937_64 rng_;
};

/// Replays a fixed action list indexed by belief tick; waits past the end.
class TracePolicy final : public Policy {
public:
    explicit TracePolicy(std::vector<Action> actions) : actions_(std::move(actions)) {}
    Action next(const BeliefState& belief, AgentId) override;
    std::string name() const override { return "trace"; }

private:
    std::vector<Action> actions_;
};

/// `robot`, `noop`, `random`. Throws ConfigError otherwise.
std::unique_ptr<Policy> make_policy(const std::string& name, AgentId self, std::uint64_t seed,
                                    const RobotConfig& config = {});

}  // namespace tmm
