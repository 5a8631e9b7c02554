#include "osp/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "osp/text_io.hpp"

namespace osp {

Problem Problem::make(const CaseSpec& spec) {
    spec.validate();
    Problem p;
    p.spec = spec;
    p.model = std::make_shared<const ObservationModel>(spec.grid, spec.model);
    p.priors = initial_priors(spec, *p.model);
    return p;
}

Problem Problem::with_priors(const CaseSpec& spec, PriorSet priors) {
    spec.validate();
    if (priors.size() == 0 || priors.weights.size() != priors.beliefs.size()) {
        throw std::invalid_argument("problem: prior set is empty or inconsistent");
    }
    Problem p;
    p.spec = spec;
    p.model = std::make_shared<const ObservationModel>(spec.grid, spec.model);
    for (const auto& b : priors.beliefs) check_belief(b);
    p.priors = std::move(priors);
    if (p.priors.initial_hits.size() != p.priors.beliefs.size()) {
        p.priors.initial_hits.assign(p.priors.beliefs.size(), 0);
    }
    return p;
}

EpisodeRecord run_episode(const Problem& problem, const Policy& policy, Rng& rng) {
    const ObservationModel& model = *problem.model;
    EpisodeRecord rec;
    rec.case_name = problem.spec.name;
    rec.fingerprint = problem.spec.fingerprint();
    rec.policy = policy.name();
    rec.nx = problem.spec.grid.nx;
    rec.ny = problem.spec.grid.ny;
    rec.prior_index = sample_discrete(problem.priors.weights, rng);

    Belief b = problem.priors.beliefs[static_cast<std::size_t>(rec.prior_index)];
    const std::size_t src_index = static_cast<std::size_t>(sample_discrete(b.probs, rng));
    rec.start = b.agent;
    rec.source = {b.agent.x + b.layout.dx_of(src_index), b.agent.y + b.layout.dy_of(src_index)};

    const GridSpec grid = b.grid();
    for (int t = 1; t <= problem.spec.t_max; ++t) {
        const Action a = policy.act(b);
        if (!b.valid_actions().contains(a)) {
            throw std::logic_error("policy '" + policy.name() + "' chose an invalid move");
        }
        const Cell agent = transition(b.agent, a, grid);
        const Belief moved = shift(b, a);
        Observation o;
        if (agent == rec.source) {
            o = Observation::omega();
        } else {
            const std::size_t idx = model.layout().index(rec.source.x - agent.x, rec.source.y - agent.y);
            o = Observation::hit(model.sample_hits(idx, rng));
            rec.cumulative_hits += o.hits;
        }
        rec.steps.push_back({agent, a, o});
        rec.T = t;
        if (o.terminal) return rec;
        b = bayes_update(moved, o, model);
    }
    rec.failed = true;
    return rec;
}

EpisodeRecord run_episode(const Problem& problem, const Policy& policy, std::uint64_t seed) {
    Rng rng(seed);
    EpisodeRecord rec = run_episode(problem, policy, rng);
    rec.seed = seed;
    return rec;
}

std::vector<EpisodeRecord> run_episodes(const Problem& problem, const Policy& policy, int episodes,
                                        std::uint64_t master_seed, int threads) {
    if (episodes < 1) throw std::invalid_argument("benchmark: need at least one episode");
    std::vector<EpisodeRecord> records(static_cast<std::size_t>(episodes));
    threads = std::clamp(threads, 1, episodes);

    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
        for (int i = next++; i < episodes; i = next++) {
            try {
                records[static_cast<std::size_t>(i)] =
                    run_episode(problem, policy, derive_seed(master_seed, static_cast<std::uint64_t>(i)));
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) error = std::current_exception();
                next = episodes;
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (int k = 0; k < threads; ++k) pool.emplace_back(worker);
    }
    if (error) std::rethrow_exception(error);
    return records;
}

BenchmarkReport summarize(const std::vector<EpisodeRecord>& records) {
    if (records.empty()) throw std::invalid_argument("summarize: no episodes");
    BenchmarkReport r;
    r.case_name = records.front().case_name;
    r.policy = records.front().policy;
    r.episodes = static_cast<int>(records.size());

    std::vector<int> times;
    double hits = 0.0;
    for (const auto& rec : records) {
        hits += rec.cumulative_hits;
        if (!rec.failed) times.push_back(rec.T);
    }
    r.successes = static_cast<int>(times.size());
    r.pr_failure = 1.0 - static_cast<double>(r.successes) / r.episodes;
    r.mean_cum_hits = hits / r.episodes;
    if (!times.empty()) {
        double sum = 0.0;
        for (int t : times) sum += t;
        const double mean = sum / times.size();
        double ss = 0.0;
        for (int t : times) ss += (t - mean) * (t - mean);
        const double n = static_cast<double>(times.size());
        r.mean_T = mean;
        r.se_mean_T = times.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
        std::sort(times.begin(), times.end());
        const auto rank = static_cast<std::size_t>(std::ceil(0.99 * n));
        r.p99_T = times[std::max<std::size_t>(rank, 1) - 1];
    }
    return r;
}

BenchmarkReport benchmark(const Problem& problem, const Policy& policy, int episodes,
                          std::uint64_t master_seed, int threads) {
    return summarize(run_episodes(problem, policy, episodes, master_seed, threads));
}

double BenchmarkReport::score(int t_max) const {
    const double success_time = mean_T ? *mean_T * successes : 0.0;
    return (success_time + static_cast<double>(episodes - successes) * t_max) / episodes;
}

std::string report_csv(const std::vector<BenchmarkReport>& rows) {
    std::string s = kReportHeader;
    s += '\n';
    auto opt = [](const std::optional<double>& v) { return v ? fixed(*v, 6) : std::string("NA"); };
    for (const auto& r : rows) {
        s += r.case_name + ',' + r.policy + ',' + std::to_string(r.episodes) + ',' + opt(r.mean_T) + ',' +
             opt(r.se_mean_T) + ',' + (r.p99_T ? std::to_string(*r.p99_T) : std::string("NA")) + ',' +
             fixed(r.pr_failure, 6) + ',' + fixed(r.mean_cum_hits, 6) + '\n';
    }
    return s;
}

std::vector<BenchmarkReport> parse_report_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || trim(line) != kReportHeader) {
        throw std::invalid_argument("report: missing or unexpected header");
    }
    std::vector<BenchmarkReport> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) f.push_back(std::string(trim(cell)));
        if (f.size() != 8) {
            throw std::invalid_argument("report: line " + std::to_string(lineno) + " has wrong column count");
        }
        auto opt = [](const std::string& v) { return v == "NA" ? std::optional<double>{} : parse_double(v); };
        BenchmarkReport r;
        r.case_name = f[0];
        r.policy = f[1];
        r.episodes = static_cast<int>(parse_int(f[2]));
        r.mean_T = opt(f[3]);
        r.se_mean_T = opt(f[4]);
        if (f[5] != "NA") r.p99_T = static_cast<int>(parse_int(f[5]));
        r.pr_failure = parse_double(f[6]);
        r.mean_cum_hits = parse_double(f[7]);
        r.successes = static_cast<int>(std::lround(r.episodes * (1.0 - r.pr_failure)));
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string export_trajectory(const EpisodeRecord& rec, const std::string& manifest) {
    std::string s = "# osp trajectory v1\n";
    s += "case " + rec.case_name + '\n';
    s += "fingerprint " + hex64(rec.fingerprint) + '\n';
    s += "policy " + rec.policy + '\n';
    s += "seed " + std::to_string(rec.seed) + '\n';
    s += "prior " + std::to_string(rec.prior_index) + '\n';
    s += "grid " + std::to_string(rec.nx) + ' ' + std::to_string(rec.ny) + '\n';
    s += "start " + std::to_string(rec.start.x) + ' ' + std::to_string(rec.start.y) + '\n';
    s += "source " + std::to_string(rec.source.x) + ' ' + std::to_string(rec.source.y) + '\n';
    s += "T " + std::to_string(rec.T) + '\n';
    s += "failed " + std::to_string(rec.failed ? 1 : 0) + '\n';
    s += "cumulative_hits " + std::to_string(rec.cumulative_hits) + '\n';
    if (!manifest.empty()) s += "manifest " + manifest + '\n';
    s += "t x y action h\n";
    for (std::size_t i = 0; i < rec.steps.size(); ++i) {
        const auto& st = rec.steps[i];
        s += std::to_string(i + 1) + ' ' + std::to_string(st.agent.x) + ' ' + std::to_string(st.agent.y) + ' ' +
             std::string(action_name(st.action)) + ' ' +
             (st.observation.terminal ? std::string("omega") : std::to_string(st.observation.hits)) + '\n';
    }
    return s;
}

EpisodeRecord parse_trajectory(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    EpisodeRecord rec;
    bool in_table = false;
    int lineno = 0;
    auto fail = [&lineno](const std::string& msg) {
        throw std::invalid_argument("trajectory line " + std::to_string(lineno) + ": " + msg);
    };
    while (std::getline(in, line)) {
        ++lineno;
        const auto tok = split_ws(line);
        if (tok.empty() || tok[0][0] == '#') continue;
        if (!in_table) {
            const std::string& key = tok[0];
            if (key == "t") {
                in_table = true;
                continue;
            }
            if (tok.size() < 2) fail("missing value");
            const auto field = [&](std::size_t k) { return static_cast<int>(parse_int(tok[k])); };
            if (key == "case") rec.case_name = tok[1];
            else if (key == "fingerprint") rec.fingerprint = parse_hex64(tok[1]);
            else if (key == "policy") rec.policy = tok[1];
            else if (key == "seed") rec.seed = std::stoull(tok[1]);
            else if (key == "prior") rec.prior_index = field(1);
            else if (key == "grid" && tok.size() == 3) { rec.nx = field(1); rec.ny = field(2); }
            else if (key == "start" && tok.size() == 3) rec.start = {field(1), field(2)};
            else if (key == "source" && tok.size() == 3) rec.source = {field(1), field(2)};
            else if (key == "T") rec.T = field(1);
            else if (key == "failed") rec.failed = parse_int(tok[1]) != 0;
            else if (key == "cumulative_hits") rec.cumulative_hits = field(1);
            else if (key == "manifest") continue;
            else fail("unknown key '" + key + "'");
            continue;
        }
        if (tok.size() != 5) fail("expected 5 columns");
        if (parse_int(tok[0]) != static_cast<long long>(rec.steps.size()) + 1) fail("steps out of order");
        const auto action = parse_action(tok[3]);
        if (!action) fail("unknown action '" + tok[3] + "'");
        StepRecord st{{static_cast<int>(parse_int(tok[1])), static_cast<int>(parse_int(tok[2]))}, *action, {}};
        st.observation =
            tok[4] == "omega" ? Observation::omega() : Observation::hit(static_cast<int>(parse_int(tok[4])));
        rec.steps.push_back(st);
    }
    if (!in_table) throw std::invalid_argument("trajectory: missing step table");
    if (static_cast<int>(rec.steps.size()) != rec.T) {
        throw std::invalid_argument("trajectory: step count does not match T");
    }
    return rec;
}

}  // namespace osp
