#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "osp/belief.hpp"
#include "osp/observation.hpp"
#include "osp/policies.hpp"

namespace osp {

using AlphaMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Piecewise-linear convex value function: value(b) = max_k alphas.row(k) . b,
/// where only vectors whose action tag is a legal move at b's agent position
/// take part. Vectors are stored one per row.
struct AlphaPolicy {
    OffsetLayout layout;
    double gamma = 0.98;
    double shaping_c = 0.0;
    std::uint64_t fingerprint = 0;
    AlphaMatrix alphas;
    std::vector<Action> actions;

    std::size_t size() const { return actions.size(); }
    std::size_t num_states() const { return layout.size(); }
    void add(const Eigen::VectorXd& alpha, Action a);
};

/// Per-state lower bound on the (shaped) value: -1/(1-gamma) - c * D(s), and 0 at
/// the terminal offset.
Eigen::VectorXd lower_bound_vector(const OffsetLayout& layout, double gamma, double shaping_c);

/// One lower-bound vector per action, so every agent position has at least one
/// admissible vector.
AlphaPolicy initial_alpha_policy(const OffsetLayout& layout, double gamma, double shaping_c,
                                 std::uint64_t fingerprint);

struct ValueAction {
    double value = 0.0;
    Action action = Action::north;
    std::size_t index = 0;
};

inline Eigen::Map<const Eigen::VectorXd> as_vector(const Belief& b) {
    return {b.probs.data(), static_cast<Eigen::Index>(b.probs.size())};
}

/// Best admissible vector at b. Ties go to the lowest row index.
ValueAction value_of(const Belief& b, const AlphaPolicy& policy);
/// Same, for admissibility judged at `agent` and an unnormalized weight vector.
ValueAction best_alpha(std::span<const double> weights, Cell agent, const AlphaPolicy& policy);

struct BackupResult {
    Eigen::VectorXd alpha;
    Action action = Action::north;
    /// alpha . b, equal to the backed-up value at b.
    double value = 0.0;
};

/// Point-based Bellman backup at a non-terminal belief:
///   max_a [ r(b,a) + gamma * sum_o Pr(o|b,a) value(b'_o) ]
/// with r = -1 plus the potential shaping term (closed form), terminal value 0.
/// The returned vector is assembled from the per-observation maximizing vectors
/// so that its inner product with b is exactly that maximum.
BackupResult backup(const Belief& b, const AlphaPolicy& gamma_set, const ObservationModel& model);

/// Greedy policy: the action tag of the best admissible vector.
class AlphaVectorPolicy final : public Policy {
public:
    AlphaVectorPolicy(std::shared_ptr<const AlphaPolicy> policy, std::string name = "perseus")
        : policy_(std::move(policy)), name_(std::move(name)) {}
    Action act(const Belief& b) const override { return value_of(b, *policy_).action; }
    std::string name() const override { return name_; }

private:
    std::shared_ptr<const AlphaPolicy> policy_;
    std::string name_;
};

/// Text artifact: header lines (fingerprint, gamma, shaping_c, nx, ny, states,
/// vectors) followed by one `alpha <action> <values...>` line per vector.
/// Values are written with round-trip precision.
std::string serialize_alpha_policy(const AlphaPolicy& policy, const std::string& manifest = "");
AlphaPolicy parse_alpha_policy(const std::string& text);

}  // namespace osp
