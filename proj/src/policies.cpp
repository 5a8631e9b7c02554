#include "osp/policies.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

namespace osp {

double expected_entropy(const Belief& b, Action a, const ObservationModel& model) {
    const Belief moved = shift(b, a);
    double total = 0.0;
    for (int h = 0; h <= model.h_max(); ++h) {
        const auto lik = model.likelihood(h);
        double p = 0.0;
        double wlogw = 0.0;
        for (std::size_t i = 0; i < moved.probs.size(); ++i) {
            const double w = moved.probs[i] * lik[i];
            if (w > 0.0) {
                p += w;
                wlogw += w * std::log(w);
            }
        }
        // p * H(posterior) with posterior = w / p
        if (p > 0.0) total += p * std::log(p) - wlogw;
    }
    return total;
}

Action infotaxis_act(const Belief& b, const ObservationModel& model) {
    const ActionSet valid = b.valid_actions();
    double best = std::numeric_limits<double>::infinity();
    double scores[4] = {0.0, 0.0, 0.0, 0.0};
    for (Action a : kAllActions) {
        if (!valid.contains(a)) continue;
        scores[static_cast<int>(a)] = expected_entropy(b, a, model);
        best = std::min(best, scores[static_cast<int>(a)]);
    }
    if (!std::isfinite(best)) throw std::logic_error("infotaxis: no valid action");
    // Among entropy ties, prefer the move most likely to land on the source;
    // this decides e.g. a delta belief, where every move keeps entropy zero.
    const double slack = kTieTolerance * (1.0 + std::abs(best));
    Action choice = Action::north;
    double find = -1.0;
    for (Action a : kAllActions) {
        if (!valid.contains(a) || scores[static_cast<int>(a)] > best + slack) continue;
        const Step d = step_of(a);
        const double p = b.at(d.dx, d.dy);
        if (p > find * (1.0 + kTieTolerance)) {
            find = p;
            choice = a;
        }
    }
    return choice;
}

Action greedy_map_act(const Belief& b) {
    const OffsetLayout& L = b.layout;
    const std::size_t origin = L.origin();
    double top = 0.0;
    for (std::size_t i = 0; i < b.probs.size(); ++i) {
        if (i != origin) top = std::max(top, b.probs[i]);
    }
    if (!(top > 0.0)) throw std::invalid_argument("greedy_map: belief has no mass away from the agent");
    const double cut = top * (1.0 - kTieTolerance);
    const ActionSet valid = b.valid_actions();
    for (Action a : kAllActions) {
        if (!valid.contains(a)) continue;
        const Step s = step_of(a);
        for (std::size_t i = 0; i < b.probs.size(); ++i) {
            if (i == origin || b.probs[i] < cut) continue;
            const int dx = L.dx_of(i), dy = L.dy_of(i);
            const int before = std::abs(dx) + std::abs(dy);
            const int after = std::abs(dx - s.dx) + std::abs(dy - s.dy);
            if (after < before) return a;
        }
    }
    throw std::logic_error("greedy_map: no action approaches the most likely cell");
}

bool is_heuristic_name(const std::string& name) { return name == "infotaxis" || name == "greedy-map"; }

std::unique_ptr<Policy> make_heuristic(const std::string& name, std::shared_ptr<const ObservationModel> model) {
    if (name == "infotaxis") return std::make_unique<InfotaxisPolicy>(std::move(model));
    if (name == "greedy-map") return std::make_unique<GreedyMapPolicy>();
    throw std::invalid_argument("unknown heuristic policy '" + name + "'");
}

}  // namespace osp
