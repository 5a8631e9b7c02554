#include <doctest.h>

#include <cmath>
#include <memory>

#include "bayes_check.hpp"
#include "osp/policies.hpp"
#include "osp/shaping.hpp"
#include "osp/symmetry.hpp"

using namespace osp;

namespace {

ObservationModelParams small_iso() {
    ObservationModelParams p;
    p.lambda_over_dx = 1.0;
    p.r_dt = 1.0;
    p.h_max = 2;
    return p;
}

Belief random_belief(const GridSpec& g, Cell agent, Rng& rng, double sharpen = 1.0) {
    Belief b = Belief::uniform(g, agent, true);
    double s = 0.0;
    for (double& p : b.probs) {
        if (p > 0.0) p = std::pow(uniform01(rng), sharpen) + 1e-6;
        s += p;
    }
    for (double& p : b.probs) p /= s;
    return b;
}

Belief point_mass(const OffsetLayout& layout, Cell agent, std::initializer_list<std::pair<Step, double>> cells) {
    Belief b{layout, agent, std::vector<double>(layout.size(), 0.0)};
    for (const auto& [d, p] : cells) b.probs[layout.index(d.dx, d.dy)] = p;
    return b;
}

double cells_entropy(const oracle::Cells& c) {
    double h = 0.0;
    for (const auto& [k, p] : c) {
        if (p > 0.0) h -= p * std::log(p);
    }
    return h;
}

// Expected posterior entropy by enumeration over absolute source cells.
double oracle_expected_entropy(const Belief& b, Action a, const ObservationModelParams& params) {
    const auto prior = oracle::to_cells(b);
    const Step d = step_of(a);
    auto lik = [&](int h, int ax, int ay, int sx, int sy) {
        return oracle::hits_pmf(oracle::oracle_mu(params, ax - sx, ay - sy), params.h_max)[h];
    };
    double total = 0.0;
    for (int h = 0; h <= params.h_max; ++h) {
        const auto out = oracle::observe(prior, b.agent.x + d.dx, b.agent.y + d.dy, h, lik);
        if (out.probability > 0.0) total += out.probability * cells_entropy(out.posterior);
    }
    return total;
}

}  // namespace

TEST_CASE("expected entropy matches enumeration") {
    const ObservationModelParams params = small_iso();
    Rng rng(2);
    double worst = 0.0;
    for (int nx = 2; nx <= 5; ++nx) {
        for (int ny = 1; ny <= 5; ++ny) {
            const GridSpec g{nx, ny, {0, 0}};
            const ObservationModel model(g, params);
            for (int trial = 0; trial < 10; ++trial) {
                const Cell agent{static_cast<int>(uniform_index(rng, nx)), static_cast<int>(uniform_index(rng, ny))};
                const Belief b = random_belief(g, agent, rng, 3.0);
                for (Action a : b.valid_actions().to_vector()) {
                    worst = std::max(worst, std::fabs(expected_entropy(b, a, model) -
                                                      oracle_expected_entropy(b, a, params)));
                }
            }
        }
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("infotaxis examples") {
    const GridSpec g{5, 5, {2, 2}};
    const ObservationModel model(g, small_iso());
    const OffsetLayout& L = model.layout();

    SUBCASE("source certainly one cell east") {
        const Belief b = point_mass(L, {2, 2}, {{{1, 0}, 1.0}});
        CHECK(expected_entropy(b, Action::east, model) == 0.0);
        CHECK(infotaxis_act(b, model) == Action::east);
    }
    SUBCASE("four-fold symmetric belief breaks ties in fixed order") {
        const Belief b = point_mass(L, {2, 2}, {{{1, 0}, 0.25}, {{-1, 0}, 0.25}, {{0, 1}, 0.25}, {{0, -1}, 0.25}});
        for (int rep = 0; rep < 3; ++rep) CHECK(infotaxis_act(b, model) == Action::north);
    }
    SUBCASE("hand-built belief on 3x3 matches exhaustive argmin") {
        const GridSpec g3{3, 3, {1, 1}};
        const ObservationModel m3(g3, small_iso());
        Belief b = point_mass(m3.layout(), {0, 1}, {{{1, 1}, 0.1}, {{2, -1}, 0.5}, {{0, -1}, 0.15}, {{1, 0}, 0.25}});
        double best = INFINITY;
        Action arg = Action::north;
        for (Action a : b.valid_actions().to_vector()) {
            const double e = oracle_expected_entropy(b, a, small_iso());
            if (e < best - 1e-12) {
                best = e;
                arg = a;
            }
        }
        CHECK(infotaxis_act(b, m3) == arg);
    }
}

TEST_CASE("infotaxis is equivariant under the square symmetries") {
    const GridSpec g{5, 5, {2, 2}};
    const ObservationModel model(g, small_iso());
    const auto group = symmetry_group(g, ModelVariant::isotropic_2d);
    Rng rng(6);
    for (int trial = 0; trial < 25; ++trial) {
        const Cell agent{static_cast<int>(uniform_index(rng, 5)), static_cast<int>(uniform_index(rng, 5))};
        const Belief b = random_belief(g, agent, rng, 2.0);
        double best = INFINITY;
        for (Action a : b.valid_actions().to_vector()) best = std::min(best, expected_entropy(b, a, model));
        for (const Symmetry& s : group) {
            const Action chosen = infotaxis_act(apply_symmetry(b, s), model);
            // the chosen action maps back into the argmin set of the original belief
            Action back = Action::north;
            for (Action a : kAllActions) {
                if (apply_symmetry(a, s) == chosen) back = a;
            }
            CHECK(expected_entropy(b, back, model) <= best + 1e-12 * std::max(1.0, best));
        }
    }
}

TEST_CASE("greedy map examples") {
    const OffsetLayout L{7, 7};
    CHECK(greedy_map_act(point_mass(L, {3, 3}, {{{0, 3}, 0.6}, {{2, 0}, 0.4}})) == Action::north);
    CHECK(greedy_map_act(point_mass(L, {3, 3}, {{{1, 0}, 0.7}, {{-2, 1}, 0.3}})) == Action::east);
    CHECK(greedy_map_act(point_mass(L, {3, 3}, {{{2, 0}, 0.5}, {{-2, 0}, 0.5}})) == Action::east);
    CHECK(greedy_map_act(point_mass(L, {3, 3}, {{{-2, -1}, 1.0}})) == Action::south);
}

TEST_CASE("heuristics only return legal moves") {
    const GridSpec g{6, 4, {0, 0}};
    auto model = std::make_shared<const ObservationModel>(g, small_iso());
    const auto info = make_heuristic("infotaxis", model);
    const auto greedy = make_heuristic("greedy-map", model);
    CHECK(info->name() == "infotaxis");
    CHECK(greedy->name() == "greedy-map");
    CHECK_THROWS_AS(make_heuristic("sai", model), std::invalid_argument);
    Rng rng(12);
    for (int x = 0; x < 6; ++x) {
        for (int y = 0; y < 4; ++y) {
            for (int trial = 0; trial < 5; ++trial) {
                const Belief b = random_belief(g, {x, y}, rng, 4.0);
                CHECK(b.valid_actions().contains(info->act(b)));
                CHECK(b.valid_actions().contains(greedy->act(b)));
            }
        }
    }
}

TEST_CASE("shaping potential and reward") {
    const GridSpec g{5, 5, {2, 2}};
    const ObservationModel model(g, small_iso());
    Rng rng(9);
    const ShapedReward r{0.7, 0.95};
    for (int trial = 0; trial < 50; ++trial) {
        const Cell agent{static_cast<int>(uniform_index(rng, 5)), static_cast<int>(uniform_index(rng, 5))};
        const Belief b = random_belief(g, agent, rng);
        double phi = 0.0;
        for (int x = 0; x < 5; ++x) {
            for (int y = 0; y < 5; ++y) {
                phi -= 0.7 * (std::abs(x - agent.x) + std::abs(y - agent.y)) * b.at(x - agent.x, y - agent.y);
            }
        }
        CHECK(r.potential(b) == doctest::Approx(phi).epsilon(1e-13));
        for (Action a : b.valid_actions().to_vector()) {
            CHECK(std::fabs(r.reward(b, a, model) - r.reward_closed_form(b, a)) < 1e-12);
        }
    }
    CHECK(r.potential(Belief::terminal(model.layout(), {1, 1})) == 0.0);
    CHECK(manhattan(model.layout(), model.layout().index(-3, 2)) == 5);
}

TEST_CASE("shaped backups equal unshaped backups plus the potential") {
    const GridSpec g{3, 3, {1, 1}};
    const ObservationModel model(g, small_iso());
    Rng rng(10);
    std::vector<Belief> roots;
    for (int i = 0; i < 200; ++i) {
        const Cell agent{static_cast<int>(uniform_index(rng, 3)), static_cast<int>(uniform_index(rng, 3))};
        roots.push_back(random_belief(g, agent, rng, 2.0));
    }
    std::vector<double> w(model.layout().size());
    for (double& x : w) x = -10.0 * uniform01(rng);
    const BeliefValueFn v = [&](const Belief& b) {
        double s = 0.0, q = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            s += w[i] * b.probs[i];
            q += b.probs[i] * b.probs[i];
        }
        return s + 3.0 * q + 0.1 * b.agent.x;
    };

    SUBCASE("c = 0 is the plain backup") {
        const auto r = shaped_backup_identity_check(roots, v, model, 0.98, 0.0);
        CHECK(r.passed);
        CHECK(r.max_value_error == 0.0);
        CHECK(r.beliefs_checked == 200);
    }
    SUBCASE("Manhattan potential, c = 1") {
        const auto r = shaped_backup_identity_check(roots, v, model, 0.98, 1.0);
        CHECK(r.passed);
        CHECK(r.max_value_error <= 1e-10);
        CHECK(r.action_mismatches == 0);
    }
    SUBCASE("undiscounted") {
        CHECK(shaped_backup_identity_check(roots, v, model, 1.0, 0.3).passed);
    }
}
