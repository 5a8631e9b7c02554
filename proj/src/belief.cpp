#include "osp/belief.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "osp/text_io.hpp"

namespace osp {

double Belief::mass() const {
    double s = 0.0;
    for (double p : probs) s += p;
    return s;
}

double Belief::entropy() const {
    double h = 0.0;
    for (double p : probs) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

bool Belief::is_terminal() const { return probs[layout.origin()] == 1.0; }

Belief Belief::terminal(const OffsetLayout& layout, Cell agent) {
    Belief b{layout, agent, std::vector<double>(layout.size(), 0.0)};
    b.probs[layout.origin()] = 1.0;
    return b;
}

Belief Belief::uniform(const GridSpec& grid, Cell agent, bool exclude_agent_cell) {
    const OffsetLayout layout{grid.nx, grid.ny};
    Belief b{layout, agent, std::vector<double>(layout.size(), 0.0)};
    std::size_t count = 0;
    for (int x = 0; x < grid.nx; ++x) {
        for (int y = 0; y < grid.ny; ++y) {
            if (exclude_agent_cell && x == agent.x && y == agent.y) continue;
            b.probs[layout.index(x - agent.x, y - agent.y)] = 1.0;
            ++count;
        }
    }
    if (count == 0) throw std::invalid_argument("uniform belief: empty support");
    for (double& p : b.probs) p /= static_cast<double>(count);
    return b;
}

void check_belief(const Belief& b, double tol) {
    if (b.probs.size() != b.layout.size()) throw std::logic_error("belief: wrong array size");
    const GridSpec grid = b.grid();
    if (!grid.contains(b.agent)) throw std::logic_error("belief: agent outside the grid");
    double total = 0.0;
    for (std::size_t i = 0; i < b.probs.size(); ++i) {
        const double p = b.probs[i];
        if (!std::isfinite(p) || p < 0.0) throw std::logic_error("belief: negative or non-finite entry");
        if (p > 0.0) {
            const Cell source{b.agent.x + b.layout.dx_of(i), b.agent.y + b.layout.dy_of(i)};
            if (!grid.contains(source)) throw std::logic_error("belief: mass outside the search domain");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > tol) {
        throw std::logic_error("belief: mass " + format_double(total) + " is not normalized");
    }
}

Belief bayes_update(const Belief& b, Observation o, const ObservationModel& model) {
    if (!(b.layout == model.layout())) throw std::invalid_argument("bayes_update: layout mismatch");
    if (o.terminal) return Belief::terminal(b.layout, b.agent);
    if (o.hits < 0 || o.hits > model.h_max()) throw std::invalid_argument("bayes_update: hit count out of range");

    const auto lik = model.likelihood(o.hits);
    Belief out{b.layout, b.agent, std::vector<double>(b.probs.size(), 0.0)};
    double total = 0.0;
    for (std::size_t i = 0; i < b.probs.size(); ++i) {
        const double w = b.probs[i] * lik[i];
        out.probs[i] = w;
        total += w;
    }
    if (!(total > 0.0)) throw std::domain_error("bayes_update: observation has zero likelihood");
    const double inv = 1.0 / total;
    for (double& p : out.probs) p *= inv;
    return out;
}

Belief shift(const Belief& b, Action a) {
    const Cell next = transition(b.agent, a, b.grid());
    const Step s = step_of(a);
    const OffsetLayout& L = b.layout;
    Belief out{L, next, std::vector<double>(b.probs.size(), 0.0)};
    // new offset d' holds the old entry at d' + step
    for (int dx = -(L.nx - 1); dx <= L.nx - 1; ++dx) {
        const int ox = dx + s.dx;
        if (ox <= -L.nx || ox >= L.nx) continue;
        for (int dy = -(L.ny - 1); dy <= L.ny - 1; ++dy) {
            const int oy = dy + s.dy;
            if (oy <= -L.ny || oy >= L.ny) continue;
            out.probs[L.index(dx, dy)] = b.probs[L.index(ox, oy)];
        }
    }
    return out;
}

SuccessorSet successors(const Belief& b, Action a, const ObservationModel& model) {
    if (!(b.layout == model.layout())) throw std::invalid_argument("successors: layout mismatch");
    const Belief moved = shift(b, a);
    const std::size_t origin = moved.layout.origin();
    SuccessorSet out;

    const double p_found = moved.probs[origin];
    if (p_found > 0.0) out.push_back({Observation::omega(), p_found, Belief::terminal(moved.layout, moved.agent)});

    for (int h = 0; h <= model.h_max(); ++h) {
        const auto lik = model.likelihood(h);
        Belief post{moved.layout, moved.agent, std::vector<double>(moved.probs.size(), 0.0)};
        double total = 0.0;
        for (std::size_t i = 0; i < moved.probs.size(); ++i) {
            const double w = moved.probs[i] * lik[i];
            post.probs[i] = w;
            total += w;
        }
        if (!(total > 0.0)) continue;
        const double inv = 1.0 / total;
        for (double& p : post.probs) p *= inv;
        out.push_back({Observation::hit(h), total, std::move(post)});
    }
    return out;
}

std::vector<double> initial_hit_weights(const ObservationModelParams& params, int half_width) {
    if (half_width < 1) throw std::invalid_argument("initial_hit_weights: half_width must be >= 1");
    params.validate();
    std::vector<double> acc(static_cast<std::size_t>(params.h_max) + 1, 0.0);
    for (int dx = -half_width; dx <= half_width; ++dx) {
        for (int dy = -half_width; dy <= half_width; ++dy) {
            if (dx == 0 && dy == 0) continue;
            const auto dist = hit_distribution({dx, dy}, params);
            for (std::size_t h = 1; h < dist.size(); ++h) acc[h] += dist[h];
        }
    }
    std::vector<double> w(acc.begin() + 1, acc.end());
    double total = 0.0;
    for (double v : w) total += v;
    if (!(total > 0.0)) throw std::domain_error("initial_hit_weights: no detection is possible");
    for (double& v : w) v /= total;
    return w;
}

PriorSet initial_priors(const CaseSpec& spec, const ObservationModel& model) {
    spec.validate();
    const int half_width = spec.prior_embedding_factor * std::max(spec.grid.nx, spec.grid.ny);
    const auto weights = initial_hit_weights(spec.model, half_width);
    const Belief start = Belief::uniform(spec.grid, spec.grid.agent_start, true);

    PriorSet set;
    for (int h0 = 1; h0 <= spec.model.h_max; ++h0) {
        set.beliefs.push_back(bayes_update(start, Observation::hit(h0), model));
        set.weights.push_back(weights[static_cast<std::size_t>(h0 - 1)]);
        set.initial_hits.push_back(h0);
    }
    return set;
}

std::string serialize_belief(const Belief& b) {
    std::string s = "belief " + std::to_string(b.layout.nx) + ' ' + std::to_string(b.layout.ny) + ' ' +
                    std::to_string(b.agent.x) + ' ' + std::to_string(b.agent.y) + '\n';
    const int h = b.layout.height();
    for (std::size_t i = 0; i < b.probs.size(); ++i) {
        s += format_double(b.probs[i]);
        s += (static_cast<int>(i % h) == h - 1) ? '\n' : ' ';
    }
    return s;
}

Belief parse_belief(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("belief: empty input");
    const auto head = split_ws(line);
    if (head.size() != 5 || head[0] != "belief") throw std::invalid_argument("belief: bad header");
    Belief b;
    b.layout = {static_cast<int>(parse_int(head[1])), static_cast<int>(parse_int(head[2]))};
    b.agent = {static_cast<int>(parse_int(head[3])), static_cast<int>(parse_int(head[4]))};
    if (b.layout.nx < 1 || b.layout.ny < 1) throw std::invalid_argument("belief: bad dimensions");
    b.probs.reserve(b.layout.size());
    while (std::getline(in, line)) {
        for (const auto& tok : split_ws(line)) b.probs.push_back(parse_double(tok));
    }
    if (b.probs.size() != b.layout.size()) throw std::invalid_argument("belief: wrong number of entries");
    return b;
}

}  // namespace osp
