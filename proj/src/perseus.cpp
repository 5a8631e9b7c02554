#include "osp/perseus.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "osp/text_io.hpp"

namespace osp {

void PerseusConfig::validate() const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("perseus: gamma must lie in (0,1)");
    if (shaping_c < 0.0) throw std::invalid_argument("perseus: shaping_c must be >= 0");
    if (bank_size < 1) throw std::invalid_argument("perseus: bank_size must be >= 1");
    if (stop_patience < 1) throw std::invalid_argument("perseus: stop_patience must be >= 1");
    if (max_iterations < 1) throw std::invalid_argument("perseus: max_iterations must be >= 1");
    if (eval_episodes < 1) throw std::invalid_argument("perseus: eval_episodes must be >= 1");
    if (collection_stall_limit < 1) throw std::invalid_argument("perseus: collection_stall_limit must be >= 1");
    if (threads < 1) throw std::invalid_argument("perseus: threads must be >= 1");
}

namespace {

std::uint64_t belief_key(const Belief& b) {
    std::uint64_t h =
        splitmix64(static_cast<std::uint64_t>(b.agent.x) * 1000003ULL + static_cast<std::uint64_t>(b.agent.y));
    for (double p : b.probs) {
        const auto q = static_cast<std::uint64_t>(std::llround(p * 1e9));
        h = splitmix64(h ^ q);
    }
    return h;
}

// Absolute slack when comparing values before and after a sweep (round-off only).
constexpr double kValueSlack = 1e-9;

struct BankValues {
    std::vector<double> value;
    std::vector<std::size_t> index;
};

BankValues bank_values(const AlphaPolicy& policy, const AlphaMatrix& bank_matrix, const BeliefBank& bank) {
    const Eigen::MatrixXd scores = policy.alphas * bank_matrix.transpose();
    BankValues out;
    out.value.resize(bank.size());
    out.index.resize(bank.size());
    for (std::size_t j = 0; j < bank.size(); ++j) {
        const Cell agent = bank.beliefs[j].agent;
        const ActionSet valid = valid_actions(agent, bank.beliefs[j].grid());
        double best = -std::numeric_limits<double>::infinity();
        std::size_t arg = 0;
        for (std::size_t k = 0; k < policy.size(); ++k) {
            if (!valid.contains(policy.actions[k])) continue;
            const double s = scores(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j));
            if (s > best) {
                best = s;
                arg = k;
            }
        }
        out.value[j] = best;
        out.index[j] = arg;
    }
    return out;
}

AlphaMatrix stack_bank(const BeliefBank& bank) {
    const auto n = static_cast<Eigen::Index>(bank.size());
    const auto s = static_cast<Eigen::Index>(bank.beliefs.front().probs.size());
    AlphaMatrix m(n, s);
    for (Eigen::Index j = 0; j < n; ++j) m.row(j) = as_vector(bank.beliefs[static_cast<std::size_t>(j)]).transpose();
    return m;
}

}  // namespace

BeliefBank collect_beliefs(const Problem& problem, const Policy& heuristic, int bank_size, int stall_limit,
                           std::uint64_t seed) {
    const ObservationModel& model = *problem.model;
    Rng rng(seed);
    BeliefBank bank;
    std::unordered_set<std::uint64_t> seen;
    int stall = 0;
    while (static_cast<int>(bank.size()) < bank_size && stall < stall_limit) {
        const int prior = sample_discrete(problem.priors.weights, rng);
        Belief b = problem.priors.beliefs[static_cast<std::size_t>(prior)];
        const auto src = static_cast<std::size_t>(sample_discrete(b.probs, rng));
        const Cell source{b.agent.x + b.layout.dx_of(src), b.agent.y + b.layout.dy_of(src)};
        bool added = false;
        for (int t = 0; t < problem.spec.t_max && static_cast<int>(bank.size()) < bank_size; ++t) {
            if (seen.insert(belief_key(b)).second) {
                bank.beliefs.push_back(b);
                added = true;
            }
            const Belief moved = shift(b, heuristic.act(b));
            if (moved.agent == source) break;
            const std::size_t idx = model.layout().index(source.x - moved.agent.x, source.y - moved.agent.y);
            b = bayes_update(moved, Observation::hit(model.sample_hits(idx, rng)), model);
        }
        stall = added ? 0 : stall + 1;
    }
    if (bank.beliefs.empty()) throw std::runtime_error("perseus: belief collection produced an empty bank");
    bank.bellman_error.assign(bank.size(), std::numeric_limits<double>::infinity());
    return bank;
}

AlphaPolicy perseus_iteration(const AlphaPolicy& current, BeliefBank& bank, const ObservationModel& model,
                              int* backups_done) {
    if (bank.size() == 0) throw std::invalid_argument("perseus: empty belief bank");
    const AlphaMatrix bank_matrix = stack_bank(bank);
    const BankValues old = bank_values(current, bank_matrix, bank);

    // The floor vectors keep every move available; only vectors added in this
    // sweep count towards a belief being improved, as if the new set started empty.
    AlphaPolicy next = initial_alpha_policy(current.layout, current.gamma, current.shaping_c, current.fingerprint);
    const std::size_t floor_size = next.size();
    std::vector<double> value_next(bank.size(), -std::numeric_limits<double>::infinity());
    std::vector<char> pending(bank.size(), 1);

    std::vector<std::size_t> order(bank.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    // Errors are compared on a kValueSlack grid so that rounding noise cannot
    // reorder beliefs; equal keys keep bank order.
    std::vector<double> key(bank.size());
    for (std::size_t j = 0; j < bank.size(); ++j) key[j] = std::round(bank.bellman_error[j] / kValueSlack);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });

    std::unordered_set<std::size_t> reused;
    int backups = 0;
    for (std::size_t i : order) {
        if (!pending[i]) continue;
        const BackupResult r = backup(bank.beliefs[i], current, model);
        ++backups;
        bank.bellman_error[i] = r.value - old.value[i];

        Eigen::VectorXd added;
        Action tag;
        if (r.value >= old.value[i] - kValueSlack) {
            added = r.alpha;
            tag = r.action;
            next.add(added, tag);
        } else {
            const std::size_t k = old.index[i];
            added = current.alphas.row(static_cast<Eigen::Index>(k)).transpose();
            tag = current.actions[k];
            if (k >= floor_size && reused.insert(k).second) next.add(added, tag);
        }

        const Eigen::VectorXd scores = bank_matrix * added;
        for (std::size_t j = 0; j < bank.size(); ++j) {
            if (!pending[j]) continue;
            if (!bank.beliefs[j].valid_actions().contains(tag)) continue;
            value_next[j] = std::max(value_next[j], scores[static_cast<Eigen::Index>(j)]);
            if (value_next[j] >= old.value[j] - kValueSlack) pending[j] = 0;
        }
        pending[i] = 0;
    }
    if (backups_done) *backups_done = backups;
    return next;
}

PerseusResult perseus_solve(const Problem& problem, const Policy& heuristic, const PerseusConfig& cfg,
                            const PerseusProgress& progress) {
    cfg.validate();
    const ObservationModel& model = *problem.model;
    BeliefBank bank = collect_beliefs(problem, heuristic, cfg.bank_size, cfg.collection_stall_limit,
                                      derive_seed(cfg.seed, 0));
    const AlphaMatrix bank_matrix = stack_bank(bank);

    PerseusResult result;
    result.bank_size = bank.size();
    AlphaPolicy current = initial_alpha_policy(model.layout(), cfg.gamma, cfg.shaping_c, problem.spec.fingerprint());
    result.policy = current;

    const std::uint64_t eval_seed = derive_seed(cfg.seed, 1);
    double best_score = std::numeric_limits<double>::infinity();
    int since_best = 0;
    for (int it = 1; it <= cfg.max_iterations; ++it) {
        const std::vector<double> before = bank_values(current, bank_matrix, bank).value;
        PerseusIterationStats stats;
        stats.iteration = it;
        current = perseus_iteration(current, bank, model, &stats.backups);
        const std::vector<double> after = bank_values(current, bank_matrix, bank).value;
        stats.min_improvement = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < bank.size(); ++j) {
            stats.min_improvement = std::min(stats.min_improvement, after[j] - before[j]);
        }
        if (stats.min_improvement < -kValueSlack) {
            throw std::logic_error("perseus: a sweep decreased a bank value");
        }
        stats.vectors = current.size();

        const AlphaVectorPolicy greedy(std::make_shared<const AlphaPolicy>(current));
        stats.evaluation = benchmark(problem, greedy, cfg.eval_episodes, eval_seed, cfg.threads);
        stats.score = stats.evaluation.score(problem.spec.t_max);
        result.history.push_back(stats);
        if (progress) progress(stats);

        if (stats.score < best_score) {
            best_score = stats.score;
            result.policy = current;
            result.best_iteration = it;
            since_best = 0;
        } else if (++since_best >= cfg.stop_patience) {
            break;
        }
    }
    return result;
}

std::string perseus_history_csv(const std::vector<PerseusIterationStats>& history) {
    std::string s = "iteration,vectors,backups,mean_T,pr_failure,score\n";
    for (const auto& h : history) {
        s += std::to_string(h.iteration) + ',' + std::to_string(h.vectors) + ',' + std::to_string(h.backups) + ',' +
             (h.evaluation.mean_T ? fixed(*h.evaluation.mean_T, 6) : std::string("NA")) + ',' +
             fixed(h.evaluation.pr_failure, 6) + ',' + fixed(h.score, 6) + '\n';
    }
    return s;
}

}  // namespace osp
