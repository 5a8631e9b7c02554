#pragma once

#include <functional>
#include <span>

#include "osp/belief.hpp"
#include "osp/observation.hpp"

namespace osp {

/// Manhattan distance between agent and source for the offset at `index`.
int manhattan(const OffsetLayout& layout, std::size_t index);

/// Potential-based shaping with phi(b) = -c * sum_s D(s) b(s), D the Manhattan
/// agent-source distance. phi vanishes on the terminal belief.
struct ShapedReward {
    double c = 0.0;
    double gamma = 1.0;

    double potential(const Belief& b) const;
    /// -1 + phi(b) - gamma * E[phi(b') | b, a], taken over the explicit successor set.
    double reward(const Belief& b, Action a, const ObservationModel& model) const;
    /// Same quantity through its closed form: phi is linear in b and the
    /// hit likelihoods sum to one per state, so E[phi(b')] = phi(shift(b, a)).
    double reward_closed_form(const Belief& b, Action a) const;
};

using BeliefValueFn = std::function<double(const Belief&)>;

struct ShapingCheckResult {
    bool passed = true;
    double max_value_error = 0.0;
    int action_mismatches = 0;
    int beliefs_checked = 0;
};

/// Checks on each root belief that the shaped Bellman backup of v + phi equals
/// the unshaped backup of v plus phi, and that both pick the same action
/// (an action counts as the same if its unshaped Q-value is within `tol` of
/// the unshaped maximum). `v` is only queried on non-terminal successors; the
/// terminal value is 0 for both problems.
ShapingCheckResult shaped_backup_identity_check(std::span<const Belief> roots, const BeliefValueFn& v,
                                                const ObservationModel& model, double gamma, double c,
                                                double tol = 1e-10);

}  // namespace osp
