#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "osp/belief.hpp"
#include "osp/evaluation.hpp"
#include "osp/policies.hpp"
#include "osp/problem.hpp"
#include "osp/rng.hpp"
#include "osp/symmetry.hpp"
#include "osp/value_net.hpp"

namespace osp {

struct TrainerConfig {
    double lr = 0.001;
    double epsilon_init = 1.0;
    double epsilon_floor = 0.1;
    double epsilon_decay = 20000.0;
    int memory_size = 1000;
    int minibatch_size = 64;
    int new_transitions_per_it = 192;
    int gd_steps_per_it = 12;
    int update_target_network_it = 1;
    int hidden_units = 512;
    int max_iterations = 100000;
    /// Greedy-policy evaluation cadence (iterations) and budget; the best
    /// evaluated snapshot is returned.
    int eval_every = 500;
    int eval_episodes = 1000;
    /// Rows of the training curve are written every `log_every` iterations.
    int log_every = 50;
    std::uint64_t seed = 1;
    int threads = 1;

    void validate() const;
};

/// max(epsilon_init * exp(-it / epsilon_decay), epsilon_floor)
double epsilon_at(int iteration, const TrainerConfig& cfg);

struct ActionBranches {
    Action action;
    SuccessorSet branches;
};

/// A belief with the full successor set of every valid action, so targets
/// can be recomputed with any network without touching the model again.
struct ReplayItem {
    Belief belief;
    std::vector<ActionBranches> actions;
};

ReplayItem make_replay_item(const Belief& b, const ObservationModel& model);

/// Fixed-capacity FIFO: once full, each push evicts the oldest item.
class ReplayMemory {
public:
    explicit ReplayMemory(std::size_t capacity);

    void push(ReplayItem item);
    std::size_t size() const { return items_.size(); }
    std::size_t capacity() const { return capacity_; }
    const ReplayItem& operator[](std::size_t i) const { return items_[i]; }
    /// `count` distinct items when the memory holds at least that many,
    /// otherwise `count` draws with replacement.
    std::vector<const ReplayItem*> sample(std::size_t count, Rng& rng) const;

private:
    std::size_t capacity_;
    std::deque<ReplayItem> items_;
};

/// sum over branches of Pr(b'|b,a) * v(b'), the terminal belief contributing 0;
/// empty for invalid actions.
std::array<std::optional<double>, 4> expected_successor_values(const std::vector<ActionBranches>& actions,
                                                               const WeightBundle& w);

/// argmax over valid actions of the expected successor value, ties to the
/// earliest action in {north, south, east, west}.
Action greedy_action(const Belief& b, const WeightBundle& w, const ObservationModel& model);
Action greedy_action(const ReplayItem& item, const WeightBundle& w);

/// -1 + max_a sum_{b'} Pr(b'|b,a) v(b'; target) with terminal successors at 0.
double bellman_target(const ReplayItem& item, const WeightBundle& target);

/// Mean squared Bellman error of `w` on `items`, with targets from `target`.
double bellman_loss(const std::vector<ReplayItem>& items, const WeightBundle& w, const WeightBundle& target);

class NetworkPolicy final : public Policy {
public:
    NetworkPolicy(std::shared_ptr<const WeightBundle> weights, std::shared_ptr<const ObservationModel> model,
                  std::string name = "drl")
        : weights_(std::move(weights)), model_(std::move(model)), name_(std::move(name)) {}
    Action act(const Belief& b) const override { return greedy_action(b, *weights_, *model_); }
    std::string name() const override { return name_; }

private:
    std::shared_ptr<const WeightBundle> weights_;
    std::shared_ptr<const ObservationModel> model_;
    std::string name_;
};

struct TrainingCurveRow {
    int iteration = 0;
    double loss = 0.0;
    double epsilon = 0.0;
    std::optional<BenchmarkReport> evaluation;
};

struct TrainingResult {
    WeightBundle best;
    WeightBundle last;
    int best_iteration = 0;
    std::optional<BenchmarkReport> best_evaluation;
    std::vector<TrainingCurveRow> curve;
    std::size_t max_memory_size = 0;
};

/// Called at every logged row with the weights being trained at that point.
using TrainingProgress = std::function<void(const TrainingCurveRow&, const WeightBundle& current)>;

/// Model-based deep Q-learning on beliefs with full backups, replay memory,
/// a delayed target network, epsilon-greedy exploration and random symmetry
/// augmentation. Episodes used for experience are truncated at t_max.
/// Throws std::runtime_error if the loss becomes non-finite.
TrainingResult train(const Problem& problem, const NetworkSpec& spec, const TrainerConfig& cfg,
                     const TrainingProgress& progress = {});

/// iteration,loss,epsilon,mean_T,pr_failure
std::string training_curve_csv(const std::vector<TrainingCurveRow>& curve);

}  // namespace osp
