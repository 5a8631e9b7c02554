#include "osp/drl_trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "osp/text_io.hpp"

namespace osp {

void TrainerConfig::validate() const {
    if (!(lr > 0.0)) throw std::invalid_argument("trainer: lr must be positive");
    if (!(epsilon_init > 0.0) || !(epsilon_floor > 0.0) || epsilon_floor > epsilon_init || epsilon_init > 1.0) {
        throw std::invalid_argument("trainer: need 0 < epsilon_floor <= epsilon_init <= 1");
    }
    if (!(epsilon_decay > 0.0)) throw std::invalid_argument("trainer: epsilon_decay must be positive");
    if (memory_size < 1 || minibatch_size < 1 || new_transitions_per_it < 1 || gd_steps_per_it < 1 ||
        update_target_network_it < 1 || hidden_units < 1 || max_iterations < 1 || eval_episodes < 1 ||
        log_every < 1 || threads < 1) {
        throw std::invalid_argument("trainer: sizes, counts and cadences must be positive");
    }
    if (eval_every < 0) throw std::invalid_argument("trainer: eval_every must be >= 0");
}

double epsilon_at(int iteration, const TrainerConfig& cfg) {
    const double decayed = cfg.epsilon_init * std::exp(-static_cast<double>(iteration) / cfg.epsilon_decay);
    return std::max(decayed, cfg.epsilon_floor);
}

ReplayItem make_replay_item(const Belief& b, const ObservationModel& model) {
    ReplayItem item{b, {}};
    const ActionSet valid = b.valid_actions();
    for (Action a : kAllActions) {
        if (valid.contains(a)) item.actions.push_back({a, successors(b, a, model)});
    }
    return item;
}

ReplayMemory::ReplayMemory(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("replay memory: capacity must be positive");
}

void ReplayMemory::push(ReplayItem item) {
    if (items_.size() == capacity_) items_.pop_front();
    items_.push_back(std::move(item));
}

std::vector<const ReplayItem*> ReplayMemory::sample(std::size_t count, Rng& rng) const {
    if (items_.empty()) throw std::logic_error("replay memory: sampling from an empty memory");
    std::vector<const ReplayItem*> out;
    out.reserve(count);
    if (items_.size() >= count) {
        std::vector<std::size_t> idx(items_.size());
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        for (std::size_t k = 0; k < count; ++k) {
            const std::size_t j = k + uniform_index(rng, idx.size() - k);
            std::swap(idx[k], idx[j]);
            out.push_back(&items_[idx[k]]);
        }
    } else {
        for (std::size_t k = 0; k < count; ++k) out.push_back(&items_[uniform_index(rng, items_.size())]);
    }
    return out;
}

namespace {

Eigen::Map<const Eigen::VectorXd> as_belief_vector(const Belief& b) {
    return {b.probs.data(), static_cast<Eigen::Index>(b.probs.size())};
}

// Expected successor values for several items with a single batched forward pass.
std::vector<std::array<std::optional<double>, 4>> batch_successor_values(
    const std::vector<const std::vector<ActionBranches>*>& sets, const WeightBundle& w) {
    std::size_t columns = 0;
    for (const auto* set : sets) {
        for (const auto& ab : *set) {
            for (const auto& br : ab.branches) columns += br.observation.terminal ? 0 : 1;
        }
    }
    Eigen::MatrixXd inputs(w.spec.input_size, static_cast<Eigen::Index>(columns));
    Eigen::Index col = 0;
    for (const auto* set : sets) {
        for (const auto& ab : *set) {
            for (const auto& br : ab.branches) {
                if (br.observation.terminal) continue;
                if (static_cast<int>(br.belief.probs.size()) != w.spec.input_size) {
                    throw std::invalid_argument("network input size does not match the belief size");
                }
                inputs.col(col++) = as_belief_vector(br.belief);
            }
        }
    }
    const Eigen::VectorXd values = columns ? forward_batch(inputs, w) : Eigen::VectorXd();

    std::vector<std::array<std::optional<double>, 4>> out(sets.size());
    col = 0;
    for (std::size_t s = 0; s < sets.size(); ++s) {
        for (const auto& ab : *sets[s]) {
            double q = 0.0;
            for (const auto& br : ab.branches) {
                if (!br.observation.terminal) q += br.probability * values[col++];
            }
            out[s][static_cast<int>(ab.action)] = q;
        }
    }
    return out;
}

Action argmax_action(const std::array<std::optional<double>, 4>& q) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : q) {
        if (v) best = std::max(best, *v);
    }
    const double slack = kTieTolerance * (1.0 + std::abs(best));
    for (Action a : kAllActions) {
        const auto& v = q[static_cast<int>(a)];
        if (v && *v >= best - slack) return a;
    }
    throw std::logic_error("greedy_action: no valid action");
}

double max_value(const std::array<std::optional<double>, 4>& q) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& v : q) {
        if (v) best = std::max(best, *v);
    }
    return best;
}

}  // namespace

std::array<std::optional<double>, 4> expected_successor_values(const std::vector<ActionBranches>& actions,
                                                               const WeightBundle& w) {
    return batch_successor_values({&actions}, w).front();
}

Action greedy_action(const ReplayItem& item, const WeightBundle& w) {
    return argmax_action(expected_successor_values(item.actions, w));
}

Action greedy_action(const Belief& b, const WeightBundle& w, const ObservationModel& model) {
    return greedy_action(make_replay_item(b, model), w);
}

double bellman_target(const ReplayItem& item, const WeightBundle& target) {
    return -1.0 + max_value(expected_successor_values(item.actions, target));
}

double bellman_loss(const std::vector<ReplayItem>& items, const WeightBundle& w, const WeightBundle& target) {
    if (items.empty()) throw std::invalid_argument("bellman_loss: no items");
    std::vector<const std::vector<ActionBranches>*> sets;
    Eigen::MatrixXd inputs(w.spec.input_size, static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) {
        sets.push_back(&items[i].actions);
        inputs.col(static_cast<Eigen::Index>(i)) = as_belief_vector(items[i].belief);
    }
    const auto q = batch_successor_values(sets, target);
    const Eigen::VectorXd v = forward_batch(inputs, w);
    double loss = 0.0;
    for (std::size_t i = 0; i < items.size(); ++i) {
        const double err = -1.0 + max_value(q[i]) - v[static_cast<Eigen::Index>(i)];
        loss += err * err;
    }
    return loss / static_cast<double>(items.size());
}

TrainingResult train(const Problem& problem, const NetworkSpec& spec, const TrainerConfig& cfg,
                     const TrainingProgress& progress) {
    cfg.validate();
    spec.validate();
    const ObservationModel& model = *problem.model;
    if (static_cast<std::size_t>(spec.input_size) != model.layout().size()) {
        throw std::invalid_argument("train: network input size must equal the number of states");
    }
    const auto group = symmetry_group(problem.spec.grid, problem.spec.model.variant);

    Rng rng(derive_seed(cfg.seed, 0));
    WeightBundle w = WeightBundle::glorot_uniform(spec, rng);
    WeightBundle target = w;
    ReplayMemory memory(static_cast<std::size_t>(cfg.memory_size));

    TrainingResult result;
    result.best = w;
    double best_score = std::numeric_limits<double>::infinity();
    const std::uint64_t eval_seed = derive_seed(cfg.seed, 1);

    auto evaluate = [&](int it) {
        const NetworkPolicy policy(std::make_shared<const WeightBundle>(w), problem.model);
        BenchmarkReport rep = benchmark(problem, policy, cfg.eval_episodes, eval_seed, cfg.threads);
        const double score = rep.score(problem.spec.t_max);
        if (score < best_score) {
            best_score = score;
            result.best = w;
            result.best_iteration = it;
            result.best_evaluation = rep;
        }
        return rep;
    };

    Belief b = problem.priors.beliefs.front();
    int episode_steps = 0;
    double loss_sum = 0.0;
    int loss_count = 0;
    for (int it = 0; it < cfg.max_iterations;) {
        const double epsilon = epsilon_at(it, cfg);
        bool episode_complete = true;
        for (int m = 0; m < cfg.new_transitions_per_it; ++m) {
            if (episode_complete) {
                b = problem.priors.beliefs[static_cast<std::size_t>(sample_discrete(problem.priors.weights, rng))];
                episode_steps = 0;
                episode_complete = false;
            }
            b = apply_random_symmetry(b, group, rng);
            ReplayItem item = make_replay_item(b, model);

            Action a;
            if (uniform01(rng) < epsilon) {
                a = item.actions[uniform_index(rng, item.actions.size())].action;
            } else {
                a = greedy_action(item, w);
            }
            const ActionBranches* chosen = nullptr;
            for (const auto& ab : item.actions) {
                if (ab.action == a) chosen = &ab;
            }
            std::vector<double> probs;
            for (const auto& br : chosen->branches) probs.push_back(br.probability);
            const Branch& next = chosen->branches[static_cast<std::size_t>(sample_discrete(probs, rng))];
            const bool found = next.observation.terminal;
            Belief successor = next.belief;
            memory.push(std::move(item));
            result.max_memory_size = std::max(result.max_memory_size, memory.size());

            b = std::move(successor);
            ++episode_steps;
            episode_complete = found || episode_steps >= problem.spec.t_max;
        }

        for (int step = 0; step < cfg.gd_steps_per_it; ++step) {
            const auto batch = memory.sample(static_cast<std::size_t>(cfg.minibatch_size), rng);
            std::vector<const std::vector<ActionBranches>*> sets;
            Eigen::MatrixXd inputs(spec.input_size, static_cast<Eigen::Index>(batch.size()));
            for (std::size_t i = 0; i < batch.size(); ++i) {
                sets.push_back(&batch[i]->actions);
                inputs.col(static_cast<Eigen::Index>(i)) = as_belief_vector(batch[i]->belief);
            }
            const auto q = batch_successor_values(sets, target);
            const Eigen::VectorXd v = forward_batch(inputs, w);
            Eigen::VectorXd upstream(static_cast<Eigen::Index>(batch.size()));
            double loss = 0.0;
            const double scale = 1.0 / static_cast<double>(batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const double err = v[static_cast<Eigen::Index>(i)] - (-1.0 + max_value(q[i]));
                loss += err * err * scale;
                upstream[static_cast<Eigen::Index>(i)] = 2.0 * err * scale;
            }
            if (!std::isfinite(loss)) {
                throw std::runtime_error("train: loss became non-finite at iteration " + std::to_string(it) +
                                         " (lr=" + format_double(cfg.lr) + ")");
            }
            w = sgd_step(std::move(w), backward_batch(inputs, w, upstream), cfg.lr);
            loss_sum += loss;
            ++loss_count;
        }

        ++it;
        if (it % cfg.update_target_network_it == 0) target = w;

        const bool eval_now = cfg.eval_every > 0 && (it % cfg.eval_every == 0 || it == cfg.max_iterations);
        if (it % cfg.log_every == 0 || eval_now) {
            TrainingCurveRow row{it, loss_sum / std::max(loss_count, 1), epsilon, std::nullopt};
            if (eval_now) row.evaluation = evaluate(it);
            loss_sum = 0.0;
            loss_count = 0;
            result.curve.push_back(row);
            if (progress) progress(row, w);
        }
    }
    result.last = w;
    if (cfg.eval_every == 0) {
        result.best = w;
        result.best_iteration = cfg.max_iterations;
    }
    return result;
}

std::string training_curve_csv(const std::vector<TrainingCurveRow>& curve) {
    std::string s = "iteration,loss,epsilon,mean_T,pr_failure\n";
    for (const auto& r : curve) {
        s += std::to_string(r.iteration) + ',' + format_double(r.loss) + ',' + fixed(r.epsilon, 6) + ',';
        if (r.evaluation) {
            s += (r.evaluation->mean_T ? fixed(*r.evaluation->mean_T, 6) : std::string("NA")) + ',' +
                 fixed(r.evaluation->pr_failure, 6);
        } else {
            s += "NA,NA";
        }
        s += '\n';
    }
    return s;
}

}  // namespace osp
