#include "osp/shaping.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

namespace osp {

int manhattan(const OffsetLayout& layout, std::size_t index) {
    return std::abs(layout.dx_of(index)) + std::abs(layout.dy_of(index));
}

double ShapedReward::potential(const Belief& b) const {
    double s = 0.0;
    for (std::size_t i = 0; i < b.probs.size(); ++i) {
        if (b.probs[i] != 0.0) s += manhattan(b.layout, i) * b.probs[i];
    }
    return -c * s;
}

double ShapedReward::reward(const Belief& b, Action a, const ObservationModel& model) const {
    double expected = 0.0;
    for (const auto& br : successors(b, a, model)) expected += br.probability * potential(br.belief);
    return -1.0 + potential(b) - gamma * expected;
}

double ShapedReward::reward_closed_form(const Belief& b, Action a) const {
    return -1.0 + potential(b) - gamma * potential(shift(b, a));
}

namespace {

struct Backup {
    double value;
    Action action;
    double q[4];
};

template <class Leaf>
Backup backup_with(const Belief& b, const ObservationModel& model, double gamma, const Leaf& leaf,
                   const ShapedReward* shaping) {
    Backup out{-std::numeric_limits<double>::infinity(), Action::north, {0, 0, 0, 0}};
    const ActionSet valid = b.valid_actions();
    for (Action a : kAllActions) {
        if (!valid.contains(a)) continue;
        double future = 0.0;
        for (const auto& br : successors(b, a, model)) {
            if (!br.observation.terminal) future += br.probability * leaf(br.belief);
        }
        const double r = shaping ? shaping->reward(b, a, model) : -1.0;
        const double q = r + gamma * future;
        out.q[static_cast<int>(a)] = q;
        if (q > out.value) {
            out.value = q;
            out.action = a;
        }
    }
    return out;
}

}  // namespace

ShapingCheckResult shaped_backup_identity_check(std::span<const Belief> roots, const BeliefValueFn& v,
                                                const ObservationModel& model, double gamma, double c,
                                                double tol) {
    const ShapedReward shaping{c, gamma};
    ShapingCheckResult res;
    for (const Belief& b : roots) {
        const Backup plain = backup_with(b, model, gamma, v, nullptr);
        const Backup shaped = backup_with(
            b, model, gamma, [&](const Belief& s) { return v(s) + shaping.potential(s); }, &shaping);

        const double err = std::abs(shaped.value - (plain.value + shaping.potential(b)));
        res.max_value_error = std::max(res.max_value_error, err);
        if (shaped.action != plain.action &&
            plain.value - plain.q[static_cast<int>(shaped.action)] > tol) {
            ++res.action_mismatches;
        }
        ++res.beliefs_checked;
    }
    res.passed = res.max_value_error <= tol && res.action_mismatches == 0;
    return res;
}

}  // namespace osp
