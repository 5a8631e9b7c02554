#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "osp/alpha_policy.hpp"
#include "osp/evaluation.hpp"
#include "osp/policies.hpp"
#include "osp/problem.hpp"

namespace osp {

struct PerseusConfig {
    double gamma = 0.98;
    double shaping_c = 0.2;
    int bank_size = 2000;
    /// Stop after this many iterations without improving the evaluated score.
    int stop_patience = 5;
    int max_iterations = 200;
    int eval_episodes = 1000;
    /// Give up collecting once this many consecutive rollouts add no new belief.
    int collection_stall_limit = 200;
    std::uint64_t seed = 1;
    int threads = 1;

    void validate() const;
};

/// Non-terminal beliefs gathered along heuristic rollouts, each with the
/// Bellman error observed at its last backup (+inf before the first one).
struct BeliefBank {
    std::vector<Belief> beliefs;
    std::vector<double> bellman_error;

    std::size_t size() const { return beliefs.size(); }
};

/// Rolls out `heuristic` from the priors (episodes truncated at t_max) and keeps
/// distinct non-terminal beliefs, deduplicated on probabilities rounded to a
/// 1e-9 grid plus the agent position. Throws std::runtime_error if nothing was
/// collected.
BeliefBank collect_beliefs(const Problem& problem, const Policy& heuristic, int bank_size,
                           int stall_limit, std::uint64_t seed);

struct PerseusIterationStats {
    int iteration = 0;
    std::size_t vectors = 0;
    int backups = 0;
    /// Smallest value change over the bank; never negative for a correct run.
    double min_improvement = 0.0;
    BenchmarkReport evaluation;
    double score = 0.0;
};

/// One Perseus sweep over the bank against `current`: beliefs are visited in
/// decreasing cached Bellman error, skipping those already improved by vectors
/// added earlier in the sweep, until every bank belief has a value no lower
/// than under `current`. Updates the bank's cached errors.
AlphaPolicy perseus_iteration(const AlphaPolicy& current, BeliefBank& bank, const ObservationModel& model,
                              int* backups_done = nullptr);

struct PerseusResult {
    AlphaPolicy policy;
    std::vector<PerseusIterationStats> history;
    int best_iteration = 0;
    std::size_t bank_size = 0;
};

using PerseusProgress = std::function<void(const PerseusIterationStats&)>;

/// Collects a bank with `heuristic`, iterates Perseus sweeps, evaluates the
/// greedy policy after each sweep, and returns the best-evaluated vector set.
PerseusResult perseus_solve(const Problem& problem, const Policy& heuristic, const PerseusConfig& cfg,
                            const PerseusProgress& progress = {});

/// iteration,vectors,backups,mean_T,pr_failure,score
std::string perseus_history_csv(const std::vector<PerseusIterationStats>& history);

}  // namespace osp
