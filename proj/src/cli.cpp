#include "osp/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "osp/alpha_policy.hpp"
#include "osp/case_spec.hpp"
#include "osp/config.hpp"
#include "osp/drl_trainer.hpp"
#include "osp/evaluation.hpp"
#include "osp/perseus.hpp"
#include "osp/plots.hpp"
#include "osp/policies.hpp"
#include "osp/problem.hpp"
#include "osp/text_io.hpp"
#include "osp/value_net.hpp"

#ifndef OSP_VERSION
#define OSP_VERSION "0.0.0"
#endif

namespace osp {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

class CliError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Options shared by every subcommand that resolves a case.
struct CommonOptions {
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    std::string config;
    int threads = 1;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
    cmd->add_option("--seed", o.seed, "Master seed")->capture_default_str();
    cmd->add_option("--out-dir", o.out_dir, "Directory for artifacts")->capture_default_str();
    cmd->add_option("--config", o.config, "key = value overlay file")->check(CLI::ExistingFile);
    cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
}

CaseSpec resolve_case(const std::string& name, const ConfigOverlay& overlay) {
    if (!is_preset(name)) throw CliError("unknown case '" + name + "' (see list-cases)");
    CaseSpec spec = preset(name);
    overlay.apply(spec);
    return spec;
}

ConfigOverlay overlay_of(const CommonOptions& o) {
    return o.config.empty() ? ConfigOverlay{} : load_config(o.config);
}

// Wraps one command's artifacts in a JSON manifest written next to them.
class Manifest {
public:
    Manifest(const std::vector<std::string>& args, const CommonOptions& o) : out_dir_(o.out_dir) {
        std::string cmd = "osp";
        for (const auto& a : args) cmd += ' ' + a;
        doc_["command"] = cmd;
        doc_["version"] = OSP_VERSION;
        doc_["started"] = utc_now();
        doc_["seeds"] = {{"master", o.seed}};
        doc_["threads"] = o.threads;
        doc_["config_file"] = o.config;
        doc_["artifacts"] = json::array();
    }

    void set_case(const CaseSpec& spec) {
        doc_["case"] = spec.name;
        doc_["fingerprint"] = hex64(spec.fingerprint());
        doc_["resolved_config"]["case"] = spec.canonical_text();
    }
    json& doc() { return doc_; }

    std::string name_for(const std::string& stem) const { return stem + ".manifest.json"; }

    std::string write_artifact(const std::string& file, const std::string& text) {
        fs::create_directories(out_dir_);
        const std::string path = (fs::path(out_dir_) / file).string();
        write_file(path, text);
        doc_["artifacts"].push_back(path);
        return path;
    }
    void record(const std::string& path) { doc_["artifacts"].push_back(path); }

    std::string finish(const std::string& stem) {
        doc_["finished"] = utc_now();
        fs::create_directories(out_dir_);
        const std::string path = (fs::path(out_dir_) / name_for(stem)).string();
        write_file(path, doc_.dump(2) + '\n');
        return path;
    }

private:
    std::string out_dir_;
    json doc_;
};

std::string trainer_text(const TrainerConfig& c) {
    std::ostringstream s;
    s << "trainer.lr = " << format_double(c.lr) << '\n'
      << "trainer.epsilon_init = " << format_double(c.epsilon_init) << '\n'
      << "trainer.epsilon_floor = " << format_double(c.epsilon_floor) << '\n'
      << "trainer.epsilon_decay = " << format_double(c.epsilon_decay) << '\n'
      << "trainer.memory_size = " << c.memory_size << '\n'
      << "trainer.minibatch_size = " << c.minibatch_size << '\n'
      << "trainer.new_transitions_per_it = " << c.new_transitions_per_it << '\n'
      << "trainer.gd_steps_per_it = " << c.gd_steps_per_it << '\n'
      << "trainer.update_target_network_it = " << c.update_target_network_it << '\n'
      << "trainer.hidden_units = " << c.hidden_units << '\n'
      << "trainer.max_iterations = " << c.max_iterations << '\n'
      << "trainer.eval_every = " << c.eval_every << '\n'
      << "trainer.eval_episodes = " << c.eval_episodes << '\n'
      << "trainer.log_every = " << c.log_every << '\n';
    return s.str();
}

std::string perseus_text(const PerseusConfig& c) {
    std::ostringstream s;
    s << "perseus.gamma = " << format_double(c.gamma) << '\n'
      << "perseus.shaping_c = " << format_double(c.shaping_c) << '\n'
      << "perseus.bank_size = " << c.bank_size << '\n'
      << "perseus.stop_patience = " << c.stop_patience << '\n'
      << "perseus.max_iterations = " << c.max_iterations << '\n'
      << "perseus.eval_episodes = " << c.eval_episodes << '\n'
      << "perseus.collection_stall_limit = " << c.collection_stall_limit << '\n';
    return s.str();
}

std::string first_line(const std::string& text) { return std::string(trim(text.substr(0, text.find('\n')))); }

// A policy named on the command line: a heuristic or a solved artifact file.
struct LoadedPolicy {
    std::shared_ptr<const Policy> policy;
    std::string label;
};

LoadedPolicy load_policy(const std::string& ref, const Problem& problem) {
    if (is_heuristic_name(ref)) return {make_heuristic(ref, problem.model), ref};
    if (!fs::is_regular_file(ref)) throw CliError("unknown policy '" + ref + "': not a heuristic name or a file");
    const std::string text = read_file(ref);
    const std::string head = first_line(text);
    const std::uint64_t want = problem.spec.fingerprint();
    auto guard = [&](std::uint64_t got) {
        if (got != want) {
            throw CliError("policy artifact " + ref + " was solved for case fingerprint " + hex64(got) + ", not " +
                           problem.spec.name + " (" + hex64(want) + ")");
        }
    };
    if (head == "# osp alpha-policy v1") {
        auto alphas = std::make_shared<AlphaPolicy>(parse_alpha_policy(text));
        guard(alphas->fingerprint);
        return {std::make_shared<AlphaVectorPolicy>(alphas, "perseus"), "perseus"};
    }
    if (head == "# osp value-net v1") {
        LoadedWeights lw = parse_weights(text);
        guard(lw.fingerprint);
        if (static_cast<std::size_t>(lw.weights.spec.input_size) != problem.model->layout().size()) {
            throw CliError("network input size does not match the case belief size");
        }
        auto w = std::make_shared<WeightBundle>(std::move(lw.weights));
        return {std::make_shared<NetworkPolicy>(w, problem.model, "drl"), "drl"};
    }
    throw CliError("unrecognized policy artifact " + ref);
}

int cmd_list_cases(std::ostream& out) {
    out << "name,nx,ny,model,h_max,t_max\n";
    for (const auto& c : canonical_cases()) {
        out << c.name << ',' << c.grid.nx << ',' << c.grid.ny << ',' << variant_name(c.model.variant) << ','
            << c.model.h_max << ',' << c.t_max << '\n';
    }
    return 0;
}

struct EvaluateArgs {
    std::string case_name;
    std::string policy;
    int episodes = 10000;
    int trajectories = 1;
};

int cmd_evaluate(const EvaluateArgs& a, const CommonOptions& o, const std::vector<std::string>& args,
                 std::ostream& out) {
    const CaseSpec spec = resolve_case(a.case_name, overlay_of(o));
    const Problem problem = Problem::make(spec);
    const LoadedPolicy lp = load_policy(a.policy, problem);

    Manifest m(args, o);
    m.set_case(spec);
    m.doc()["policy"] = a.policy;
    m.doc()["episodes"] = a.episodes;
    const std::string stem = spec.name + "_" + lp.label;

    const auto records = run_episodes(problem, *lp.policy, a.episodes, o.seed, o.threads);
    const std::string csv = report_csv({summarize(records)});
    m.write_artifact(stem + "_report.csv", csv);
    for (int i = 0; i < a.trajectories && i < static_cast<int>(records.size()); ++i) {
        m.write_artifact(stem + "_episode" + std::to_string(i) + ".traj",
                         export_trajectory(records[i], m.name_for(stem)));
    }
    m.finish(stem);
    out << csv;
    return 0;
}

struct PerseusArgs {
    std::string case_name;
    std::optional<double> gamma;
    std::optional<double> shaping_c;
    std::optional<int> episodes;
    std::string heuristic = "infotaxis";
};

int cmd_solve_perseus(const PerseusArgs& a, const CommonOptions& o, const std::vector<std::string>& args,
                      std::ostream& out) {
    const ConfigOverlay overlay = overlay_of(o);
    const CaseSpec spec = resolve_case(a.case_name, overlay);
    PerseusConfig cfg;
    overlay.apply(cfg);
    if (a.gamma) cfg.gamma = *a.gamma;
    if (a.shaping_c) cfg.shaping_c = *a.shaping_c;
    if (a.episodes) cfg.eval_episodes = *a.episodes;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.validate();

    const Problem problem = Problem::make(spec);
    if (!is_heuristic_name(a.heuristic)) throw CliError("unknown heuristic '" + a.heuristic + "'");
    const auto heuristic = make_heuristic(a.heuristic, problem.model);

    Manifest m(args, o);
    m.set_case(spec);
    m.doc()["resolved_config"]["perseus"] = perseus_text(cfg);
    m.doc()["bank_heuristic"] = a.heuristic;
    const std::string stem = spec.name + "_perseus";

    const PerseusResult r = perseus_solve(problem, *heuristic, cfg, [&](const PerseusIterationStats& s) {
        out << "iteration " << s.iteration << " vectors " << s.vectors << " backups " << s.backups << " score "
            << fixed(s.score, 4) << '\n';
    });
    m.doc()["best_iteration"] = r.best_iteration;
    m.doc()["bank_size"] = r.bank_size;
    m.write_artifact(stem + ".alpha", serialize_alpha_policy(r.policy, m.name_for(stem)));
    m.write_artifact(stem + "_history.csv", perseus_history_csv(r.history));
    m.finish(stem);
    return 0;
}

struct DrlArgs {
    std::string case_name;
    std::optional<int> episodes;
    std::optional<int> iterations;
};

int cmd_solve_drl(const DrlArgs& a, const CommonOptions& o, const std::vector<std::string>& args,
                  std::ostream& out) {
    const ConfigOverlay overlay = overlay_of(o);
    const CaseSpec spec = resolve_case(a.case_name, overlay);
    TrainerConfig cfg;
    overlay.apply(cfg);
    if (a.episodes) cfg.eval_episodes = *a.episodes;
    if (a.iterations) cfg.max_iterations = *a.iterations;
    cfg.seed = o.seed;
    cfg.threads = o.threads;
    cfg.validate();

    const Problem problem = Problem::make(spec);
    const NetworkSpec net = NetworkSpec::three_layer(problem.model->layout().size(), cfg.hidden_units);

    Manifest m(args, o);
    m.set_case(spec);
    m.doc()["resolved_config"]["trainer"] = trainer_text(cfg);
    const std::string stem = spec.name + "_drl";

    const TrainingResult r = train(problem, net, cfg, [&](const TrainingCurveRow& row, const WeightBundle&) {
        out << "iteration " << row.iteration << " loss " << fixed(row.loss, 6) << " epsilon " << fixed(row.epsilon, 4);
        if (row.evaluation && row.evaluation->mean_T) out << " mean_T " << fixed(*row.evaluation->mean_T, 3);
        out << '\n';
    });
    m.doc()["best_iteration"] = r.best_iteration;
    m.write_artifact(stem + ".weights", serialize_weights(r.best, spec.fingerprint(), m.name_for(stem)));
    m.write_artifact(stem + "_curve.csv", training_curve_csv(r.curve));
    m.finish(stem);
    return 0;
}

struct ReplayArgs {
    std::string trajectory;
    std::string policy;
};

// Checks that the recorded path is a legal search, then re-simulates it from
// the recorded seed and requires an identical record.
int cmd_replay(const ReplayArgs& a, const CommonOptions& o, std::ostream& out) {
    const EpisodeRecord rec = parse_trajectory(read_file(a.trajectory));
    Cell at = rec.start;
    for (std::size_t t = 0; t < rec.steps.size(); ++t) {
        const Step d = step_of(rec.steps[t].action);
        const Cell next{at.x + d.dx, at.y + d.dy};
        if (!(next == rec.steps[t].agent)) {
            throw CliError("trajectory step " + std::to_string(t + 1) + " does not follow its action");
        }
        at = next;
    }
    const bool found = at == rec.source;
    if (found == rec.failed) throw CliError("trajectory end state contradicts its failure flag");

    const CaseSpec spec = resolve_case(rec.case_name, overlay_of(o));
    if (spec.fingerprint() != rec.fingerprint) {
        throw CliError("trajectory fingerprint " + hex64(rec.fingerprint) + " does not match case " + spec.name);
    }
    const Problem problem = Problem::make(spec);
    const LoadedPolicy lp = load_policy(a.policy.empty() ? rec.policy : a.policy, problem);
    const EpisodeRecord again = run_episode(problem, *lp.policy, rec.seed);
    if (!(again == rec)) throw CliError("re-simulation from seed " + std::to_string(rec.seed) + " diverges");

    out << "replay ok: case " << rec.case_name << " policy " << rec.policy << " T " << rec.T
        << (rec.failed ? " failed" : " found") << '\n';
    return 0;
}

struct PlotArgs {
    std::string input;
};

int cmd_plot(const PlotArgs& a, const CommonOptions& o, std::ostream& out) {
    const std::string text = read_file(a.input);
    const std::string stem = fs::path(a.input).stem().string();
    PlotFiles files;
    if (first_line(text) == kReportHeader) {
        files = emit_report_plot(parse_report_csv(text), o.out_dir, stem);
    } else {
        files = emit_trajectory_plot(parse_trajectory(text), o.out_dir, stem);
    }
    out << files.image << '\n' << files.data << '\n';
    return 0;
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Olfactory search POMDP solvers and benchmarks", "osp"};
    app.require_subcommand(1);

    CommonOptions common;

    app.add_subcommand("list-cases", "List the canonical cases");

    EvaluateArgs ev;
    auto* evaluate = app.add_subcommand("evaluate", "Benchmark a policy on a case");
    evaluate->add_option("case", ev.case_name)->required();
    evaluate->add_option("policy", ev.policy, "infotaxis, greedy-map, or a policy artifact")->required();
    evaluate->add_option("--episodes", ev.episodes)->check(CLI::PositiveNumber)->capture_default_str();
    evaluate->add_option("--trajectories", ev.trajectories, "Episodes exported as trajectories")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    add_common(evaluate, common);

    PerseusArgs pa;
    auto* perseus = app.add_subcommand("solve-perseus", "Point-based value iteration with shaping");
    perseus->add_option("case", pa.case_name)->required();
    perseus->add_option("--gamma", pa.gamma)->check(CLI::Range(0.0, 1.0));
    perseus->add_option("--shaping-c", pa.shaping_c)->check(CLI::NonNegativeNumber);
    perseus->add_option("--episodes", pa.episodes, "Evaluation episodes per iteration")->check(CLI::PositiveNumber);
    perseus->add_option("--heuristic", pa.heuristic, "Policy used to collect beliefs")->capture_default_str();
    add_common(perseus, common);

    DrlArgs da;
    auto* drl = app.add_subcommand("solve-drl", "Train a value network");
    drl->add_option("case", da.case_name)->required();
    drl->add_option("--episodes", da.episodes, "Evaluation episodes per checkpoint")->check(CLI::PositiveNumber);
    drl->add_option("--iterations", da.iterations)->check(CLI::PositiveNumber);
    add_common(drl, common);

    ReplayArgs ra;
    auto* replay = app.add_subcommand("replay", "Check and re-simulate a trajectory");
    replay->add_option("trajectory", ra.trajectory)->required()->check(CLI::ExistingFile);
    replay->add_option("--policy", ra.policy, "Artifact for non-heuristic trajectories");
    add_common(replay, common);

    PlotArgs pl;
    auto* plot = app.add_subcommand("plot", "Plot a report CSV or a trajectory");
    plot->add_option("input", pl.input)->required()->check(CLI::ExistingFile);
    add_common(plot, common);

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "osp: " << e.what() << '\n';
        return e.get_exit_code() == 0 ? 2 : e.get_exit_code();
    }

    const std::string name = app.get_subcommands().front()->get_name();
    if (name == "list-cases") return cmd_list_cases(out);
    if (name == "evaluate") return cmd_evaluate(ev, common, args, out);
    if (name == "solve-perseus") return cmd_solve_perseus(pa, common, args, out);
    if (name == "solve-drl") return cmd_solve_drl(da, common, args, out);
    if (name == "replay") return cmd_replay(ra, common, out);
    return cmd_plot(pl, common, out);
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    try {
        return dispatch(args, out, err);
    } catch (const std::exception& e) {
        err << "osp: " << e.what() << '\n';
        return 1;
    }
}

int cli_main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace osp
