#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace osp {

/// Absolute grid cell. x runs along the wind axis, y across it.
struct Cell {
    int x = 0;
    int y = 0;
    friend bool operator==(const Cell&, const Cell&) = default;
};

/// north = +y, south = -y, east = +x (downwind), west = -x.
/// The enumerator order is the tie-break order used by every policy.
enum class Action : std::uint8_t { north = 0, south = 1, east = 2, west = 3 };

inline constexpr std::array<Action, 4> kAllActions{Action::north, Action::south, Action::east,
                                                   Action::west};

struct Step {
    int dx;
    int dy;
};

constexpr Step step_of(Action a) {
    switch (a) {
        case Action::north: return {0, 1};
        case Action::south: return {0, -1};
        case Action::east: return {1, 0};
        case Action::west: return {-1, 0};
    }
    return {0, 0};
}

constexpr Action reverse(Action a) {
    switch (a) {
        case Action::north: return Action::south;
        case Action::south: return Action::north;
        case Action::east: return Action::west;
        case Action::west: return Action::east;
    }
    return a;
}

std::string_view action_name(Action a);
std::optional<Action> parse_action(std::string_view name);

struct GridSpec {
    int nx = 1;
    int ny = 1;
    Cell agent_start{};

    bool contains(Cell c) const { return c.x >= 0 && c.x < nx && c.y >= 0 && c.y < ny; }
    /// Throws std::invalid_argument when the invariants do not hold.
    void validate() const;
    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

/// Small fixed-capacity set of actions, iterated in tie-break order.
class ActionSet {
public:
    void insert(Action a) { bits_ |= static_cast<std::uint8_t>(1u << static_cast<unsigned>(a)); }
    bool contains(Action a) const { return (bits_ >> static_cast<unsigned>(a)) & 1u; }
    bool empty() const { return bits_ == 0; }
    int size() const { return __builtin_popcount(bits_); }
    std::vector<Action> to_vector() const;
    friend bool operator==(const ActionSet&, const ActionSet&) = default;

private:
    std::uint8_t bits_ = 0;
};

/// Moves whose target cell stays inside the grid. Never empty for grids with
/// at least two cells; a 1x1 grid has no moves at all and is rejected upstream.
ActionSet valid_actions(Cell agent, const GridSpec& grid);

/// Adjacent cell in the action's direction. Throws std::out_of_range when the
/// move would leave the grid; callers are expected to mask with valid_actions.
Cell transition(Cell agent, Action a, const GridSpec& grid);

}  // namespace osp
