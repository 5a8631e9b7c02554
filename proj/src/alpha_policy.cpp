#include "osp/alpha_policy.hpp"

#include <limits>
#include <sstream>
#include <stdexcept>

#include "osp/shaping.hpp"
#include "osp/text_io.hpp"

namespace osp {

void AlphaPolicy::add(const Eigen::VectorXd& alpha, Action a) {
    if (static_cast<std::size_t>(alpha.size()) != num_states()) {
        throw std::invalid_argument("alpha policy: vector length does not match the state count");
    }
    const Eigen::Index rows = alphas.rows();
    alphas.conservativeResize(rows + 1, static_cast<Eigen::Index>(num_states()));
    alphas.row(rows) = alpha.transpose();
    actions.push_back(a);
}

Eigen::VectorXd lower_bound_vector(const OffsetLayout& layout, double gamma, double shaping_c) {
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("alpha policy: gamma must lie in (0,1)");
    if (shaping_c < 0.0) throw std::invalid_argument("alpha policy: shaping constant must be >= 0");
    Eigen::VectorXd v(static_cast<Eigen::Index>(layout.size()));
    const double floor = -1.0 / (1.0 - gamma);
    for (std::size_t i = 0; i < layout.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = floor - shaping_c * manhattan(layout, i);
    }
    v[static_cast<Eigen::Index>(layout.origin())] = 0.0;
    return v;
}

AlphaPolicy initial_alpha_policy(const OffsetLayout& layout, double gamma, double shaping_c,
                                 std::uint64_t fingerprint) {
    AlphaPolicy p;
    p.layout = layout;
    p.gamma = gamma;
    p.shaping_c = shaping_c;
    p.fingerprint = fingerprint;
    p.alphas.resize(0, static_cast<Eigen::Index>(layout.size()));
    const Eigen::VectorXd lb = lower_bound_vector(layout, gamma, shaping_c);
    for (Action a : kAllActions) p.add(lb, a);
    return p;
}

namespace {

// Scores within this relative distance of the best count as tied; ties go to the
// earliest vector and, in backups, to the earliest move in N, S, E, W order, so
// the choice does not hinge on rounding.
constexpr double kRelativeTie = 1e-12;

bool beats(double s, double best) { return s > best + kRelativeTie * std::abs(best); }

ValueAction masked_argmax(const Eigen::Ref<const Eigen::VectorXd>& scores, Cell agent, const AlphaPolicy& policy) {
    const ActionSet valid = valid_actions(agent, GridSpec{policy.layout.nx, policy.layout.ny, agent});
    ValueAction best{-std::numeric_limits<double>::infinity(), Action::north, 0};
    bool found = false;
    for (std::size_t k = 0; k < policy.size(); ++k) {
        if (!valid.contains(policy.actions[k])) continue;
        const double s = scores[static_cast<Eigen::Index>(k)];
        if (!found || beats(s, best.value)) {
            best = {s, policy.actions[k], k};
            found = true;
        }
    }
    if (!found) throw std::logic_error("alpha policy: no admissible vector at this position");
    return best;
}

}  // namespace

ValueAction best_alpha(std::span<const double> weights, Cell agent, const AlphaPolicy& policy) {
    if (weights.size() != policy.num_states()) throw std::invalid_argument("alpha policy: belief size mismatch");
    const Eigen::Map<const Eigen::VectorXd> w(weights.data(), static_cast<Eigen::Index>(weights.size()));
    const Eigen::VectorXd scores = policy.alphas * w;
    return masked_argmax(scores, agent, policy);
}

ValueAction value_of(const Belief& b, const AlphaPolicy& policy) {
    if (!(b.layout == policy.layout)) throw std::invalid_argument("alpha policy: layout mismatch");
    return best_alpha(b.probs, b.agent, policy);
}

BackupResult backup(const Belief& b, const AlphaPolicy& set, const ObservationModel& model) {
    if (!(b.layout == set.layout) || !(model.layout() == set.layout)) {
        throw std::invalid_argument("backup: layout mismatch");
    }
    if (b.is_terminal()) throw std::invalid_argument("backup: terminal belief");

    const OffsetLayout& L = set.layout;
    const auto n = static_cast<Eigen::Index>(L.size());
    const int nh = model.num_hit_values();
    const double gamma = set.gamma;
    const double c = set.shaping_c;
    const Eigen::VectorXd lb = lower_bound_vector(L, gamma, c);
    const auto bvec = as_vector(b);

    BackupResult best;
    best.value = -std::numeric_limits<double>::infinity();
    const ActionSet valid = b.valid_actions();

    Eigen::MatrixXd weights(n, nh);
    std::vector<std::size_t> chosen(static_cast<std::size_t>(nh));
    for (Action a : kAllActions) {
        if (!valid.contains(a)) continue;
        const Step e = step_of(a);
        const Belief moved = shift(b, a);
        for (int h = 0; h < nh; ++h) {
            const auto lik = model.likelihood(h);
            for (Eigen::Index i = 0; i < n; ++i) {
                const auto u = static_cast<std::size_t>(i);
                weights(i, h) = moved.probs[u] * lik[u];
            }
        }
        const Eigen::MatrixXd scores = set.alphas * weights;
        for (int h = 0; h < nh; ++h) {
            chosen[static_cast<std::size_t>(h)] = masked_argmax(scores.col(h), moved.agent, set).index;
        }

        Eigen::VectorXd g(n);
        for (std::size_t i = 0; i < L.size(); ++i) {
            const int dx = L.dx_of(i) - e.dx;
            const int dy = L.dy_of(i) - e.dy;
            const auto gi = static_cast<Eigen::Index>(i);
            if (!L.contains(dx, dy)) {
                g[gi] = lb[gi];
                continue;
            }
            const std::size_t j = L.index(dx, dy);
            double v = -1.0 - c * manhattan(L, i) + gamma * c * manhattan(L, j);
            if (j != L.origin()) {
                double future = 0.0;
                for (int h = 0; h < nh; ++h) {
                    const auto row = static_cast<Eigen::Index>(chosen[static_cast<std::size_t>(h)]);
                    future += model.likelihood(h)[j] * set.alphas(row, static_cast<Eigen::Index>(j));
                }
                v += gamma * future;
            }
            g[gi] = v;
        }
        const double value = g.dot(bvec);
        if (best.value == -std::numeric_limits<double>::infinity() || beats(value, best.value)) {
            best.value = value;
            best.action = a;
            best.alpha = std::move(g);
        }
    }
    return best;
}

std::string serialize_alpha_policy(const AlphaPolicy& p, const std::string& manifest) {
    std::string s = "# osp alpha-policy v1\n";
    s += "fingerprint " + hex64(p.fingerprint) + '\n';
    s += "gamma " + format_double(p.gamma) + '\n';
    s += "shaping_c " + format_double(p.shaping_c) + '\n';
    s += "nx " + std::to_string(p.layout.nx) + '\n';
    s += "ny " + std::to_string(p.layout.ny) + '\n';
    s += "states " + std::to_string(p.num_states()) + '\n';
    s += "vectors " + std::to_string(p.size()) + '\n';
    if (!manifest.empty()) s += "manifest " + manifest + '\n';
    for (std::size_t k = 0; k < p.size(); ++k) {
        s += "alpha ";
        s += action_name(p.actions[k]);
        for (Eigen::Index i = 0; i < p.alphas.cols(); ++i) {
            s += ' ';
            s += format_double(p.alphas(static_cast<Eigen::Index>(k), i));
        }
        s += '\n';
    }
    return s;
}

AlphaPolicy parse_alpha_policy(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    AlphaPolicy p;
    long long states = -1, vectors = -1;
    int lineno = 0;
    auto fail = [&lineno](const std::string& msg) {
        throw std::invalid_argument("alpha policy line " + std::to_string(lineno) + ": " + msg);
    };
    std::vector<std::pair<Action, std::vector<double>>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        auto tok = split_ws(line);
        if (tok.empty() || tok[0][0] == '#') continue;
        const std::string& key = tok[0];
        if (key == "alpha") {
            if (tok.size() < 2) fail("missing action");
            const auto a = parse_action(tok[1]);
            if (!a) fail("unknown action '" + tok[1] + "'");
            std::vector<double> vals;
            vals.reserve(tok.size() - 2);
            for (std::size_t i = 2; i < tok.size(); ++i) vals.push_back(parse_double(tok[i]));
            if (static_cast<long long>(vals.size()) != states) fail("vector length does not match 'states'");
            rows.emplace_back(*a, std::move(vals));
            continue;
        }
        if (tok.size() != 2) fail("expected 'key value'");
        if (key == "fingerprint") p.fingerprint = parse_hex64(tok[1]);
        else if (key == "gamma") p.gamma = parse_double(tok[1]);
        else if (key == "shaping_c") p.shaping_c = parse_double(tok[1]);
        else if (key == "nx") p.layout.nx = static_cast<int>(parse_int(tok[1]));
        else if (key == "ny") p.layout.ny = static_cast<int>(parse_int(tok[1]));
        else if (key == "states") states = parse_int(tok[1]);
        else if (key == "vectors") vectors = parse_int(tok[1]);
        else if (key == "manifest") continue;
        else fail("unknown key '" + key + "'");
    }
    if (states != static_cast<long long>(p.layout.size())) {
        throw std::invalid_argument("alpha policy: state count inconsistent with grid");
    }
    if (vectors != static_cast<long long>(rows.size()) || rows.empty()) {
        throw std::invalid_argument("alpha policy: vector count mismatch");
    }
    p.alphas.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(states));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        for (Eigen::Index i = 0; i < p.alphas.cols(); ++i) {
            p.alphas(static_cast<Eigen::Index>(k), i) = rows[k].second[static_cast<std::size_t>(i)];
        }
        p.actions.push_back(rows[k].first);
    }
    return p;
}

}  // namespace osp
