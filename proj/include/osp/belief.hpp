#pragma once

#include <string>
#include <vector>

#include "osp/case_spec.hpp"
#include "osp/grid.hpp"
#include "osp/layout.hpp"
#include "osp/observation.hpp"

namespace osp {

/// Posterior over the source position relative to the agent.
///
/// probs[layout.index(dx, dy)] is the probability that the source sits at
/// agent + (dx, dy). Entries whose source cell would fall outside the grid are
/// kept (as zeros) so the flattened array always has layout.size() entries.
struct Belief {
    OffsetLayout layout;
    Cell agent;
    std::vector<double> probs;

    double at(int dx, int dy) const { return probs[layout.index(dx, dy)]; }
    double mass() const;
    /// Shannon entropy in nats, with 0 log 0 = 0.
    double entropy() const;
    bool is_terminal() const;
    GridSpec grid() const { return {layout.nx, layout.ny, agent}; }
    ActionSet valid_actions() const { return osp::valid_actions(agent, grid()); }

    /// Delta at offset (0,0).
    static Belief terminal(const OffsetLayout& layout, Cell agent);
    /// Uniform over every in-grid source cell, optionally excluding the agent's own cell.
    static Belief uniform(const GridSpec& grid, Cell agent, bool exclude_agent_cell);

    friend bool operator==(const Belief&, const Belief&) = default;
};

/// Throws std::logic_error unless entries are finite, non-negative, sum to 1
/// within `tol`, and vanish wherever the source would be outside the grid.
void check_belief(const Belief& b, double tol = 1e-10);

/// Bayes rule. Omega gives the terminal belief; a hit count multiplies by
/// Pr(h | s), zeroes the origin and renormalizes. Throws std::domain_error when
/// the observation has zero marginal likelihood.
Belief bayes_update(const Belief& b, Observation o, const ObservationModel& model);

/// Moves the agent one cell. Mass is translated opposite to the move so every
/// entry keeps describing the same absolute source cell. Throws
/// std::out_of_range for a move that leaves the grid.
Belief shift(const Belief& b, Action a);

struct Branch {
    Observation observation;
    double probability = 0.0;
    Belief belief;
};

/// Possible outcomes of taking `a` in `b`: the Omega branch (probability equal
/// to the shifted belief's origin mass) followed by one branch per hit count
/// with non-zero probability. Zero-probability branches are dropped.
using SuccessorSet = std::vector<Branch>;

SuccessorSet successors(const Belief& b, Action a, const ObservationModel& model);

struct PriorSet {
    std::vector<Belief> beliefs;
    std::vector<double> weights;
    std::vector<int> initial_hits;

    std::size_t size() const { return beliefs.size(); }
};

/// Probabilities of each non-zero initial hit value h0 = 1..h_max, given that a
/// hit occurred, for a uniformly distributed source over the square domain
/// |dx|, |dy| <= half_width around the agent (agent cell excluded).
std::vector<double> initial_hit_weights(const ObservationModelParams& params, int half_width);

/// One initial belief per h0 in [1, h_max]: the uniform prior over in-grid
/// sources (agent cell excluded) updated with h0, weighted by initial_hit_weights
/// on a domain of half-width prior_embedding_factor * max(nx, ny).
PriorSet initial_priors(const CaseSpec& spec, const ObservationModel& model);

/// Header line `belief nx ny agent_x agent_y` then one row per dx with the dy
/// entries, written with round-trip precision.
std::string serialize_belief(const Belief& b);
Belief parse_belief(const std::string& text);

}  // namespace osp
