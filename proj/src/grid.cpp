#include "osp/grid.hpp"

#include <stdexcept>

namespace osp {

std::string_view action_name(Action a) {
    switch (a) {
        case Action::north: return "north";
        case Action::south: return "south";
        case Action::east: return "east";
        case Action::west: return "west";
    }
    return "?";
}

std::optional<Action> parse_action(std::string_view name) {
    for (Action a : kAllActions) {
        if (action_name(a) == name) return a;
    }
    return std::nullopt;
}

void GridSpec::validate() const {
    if (nx < 1 || ny < 1) throw std::invalid_argument("grid: nx and ny must be >= 1");
    if (nx * ny < 2) throw std::invalid_argument("grid: need at least two cells");
    if (!contains(agent_start)) throw std::invalid_argument("grid: agent start outside the grid");
}

std::vector<Action> ActionSet::to_vector() const {
    std::vector<Action> out;
    for (Action a : kAllActions) {
        if (contains(a)) out.push_back(a);
    }
    return out;
}

ActionSet valid_actions(Cell agent, const GridSpec& grid) {
    ActionSet set;
    for (Action a : kAllActions) {
        const Step s = step_of(a);
        if (grid.contains({agent.x + s.dx, agent.y + s.dy})) set.insert(a);
    }
    return set;
}

Cell transition(Cell agent, Action a, const GridSpec& grid) {
    const Step s = step_of(a);
    const Cell next{agent.x + s.dx, agent.y + s.dy};
    if (!grid.contains(agent) || !grid.contains(next)) {
        throw std::out_of_range("transition: move " + std::string(action_name(a)) +
                                " leaves the grid");
    }
    return next;
}

}  // namespace osp
