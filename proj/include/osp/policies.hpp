#pragma once

#include <memory>
#include <string>

#include "osp/belief.hpp"
#include "osp/observation.hpp"

namespace osp {

/// Deterministic map from non-terminal beliefs to actions that are valid at
/// the belief's agent position. Implementations must be safe to call
/// concurrently from several threads.
class Policy {
public:
    virtual ~Policy() = default;
    virtual Action act(const Belief& b) const = 0;
    virtual std::string name() const = 0;
};

/// Relative slack used when comparing action scores; scores within it count as
/// tied and the earliest action in {north, south, east, west} wins.
inline constexpr double kTieTolerance = 1e-12;

/// Expected Shannon entropy (nats) of the belief after taking `a`; the Omega
/// branch contributes zero.
double expected_entropy(const Belief& b, Action a, const ObservationModel& model);

/// One-step expected-entropy minimizer over valid actions. Entropy ties go to
/// the move with the larger chance of reaching the source, then to the fixed order.
Action infotaxis_act(const Belief& b, const ObservationModel& model);

/// One Manhattan step toward the most likely source cell.
Action greedy_map_act(const Belief& b);

class InfotaxisPolicy final : public Policy {
public:
    explicit InfotaxisPolicy(std::shared_ptr<const ObservationModel> model) : model_(std::move(model)) {}
    Action act(const Belief& b) const override { return infotaxis_act(b, *model_); }
    std::string name() const override { return "infotaxis"; }

private:
    std::shared_ptr<const ObservationModel> model_;
};

class GreedyMapPolicy final : public Policy {
public:
    Action act(const Belief& b) const override { return greedy_map_act(b); }
    std::string name() const override { return "greedy-map"; }
};

bool is_heuristic_name(const std::string& name);
/// "infotaxis" or "greedy-map"; throws std::invalid_argument otherwise.
std::unique_ptr<Policy> make_heuristic(const std::string& name, std::shared_ptr<const ObservationModel> model);

}  // namespace osp
