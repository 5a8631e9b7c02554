#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "osp/alpha_policy.hpp"
#include "osp/cli.hpp"
#include "osp/config.hpp"
#include "osp/plots.hpp"
#include "osp/problem.hpp"

using namespace osp;
namespace fs = std::filesystem;

namespace {

struct Run {
    int status;
    std::string out;
    std::string err;
};

Run osp_run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int status = cli_main(args, out, err);
    return {status, out.str(), err.str()};
}

// Fresh scratch directory per call.
fs::path scratch(const std::string& tag) {
    static int counter = 0;
    const fs::path p = fs::temp_directory_path() /
                       ("osp_test_" + std::to_string(::getpid()) + "_" + tag + "_" + std::to_string(counter++));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void spill(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream in(text);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("config overlays") {
    SUBCASE("empty overlay leaves a preset unchanged") {
        CaseSpec c = preset("isotropic-small");
        const auto before = c.canonical_text();
        parse_config("# nothing here\n\n   \n").apply(c);
        CHECK(c.canonical_text() == before);
        CHECK(c.fingerprint() == preset("isotropic-small").fingerprint());
    }
    SUBCASE("overrides reach the fingerprint") {
        CaseSpec c = preset("isotropic-small");
        parse_config("case.t_max = 50  # shorter\n").apply(c);
        CHECK(c.t_max == 50);
        CHECK(c.fingerprint() != preset("isotropic-small").fingerprint());
    }
    SUBCASE("range violations are rejected") {
        CaseSpec c = preset("windy-detections");
        CHECK_THROWS_AS(parse_config("case.r_bar = -2.5\n").apply(c), ConfigError);
        CHECK_THROWS_AS(parse_config("case.h_max = 0\n").apply(c), ConfigError);
        TrainerConfig t;
        CHECK_THROWS_AS(parse_config("trainer.epsilon_floor = 2\n").apply(t), ConfigError);
    }
    SUBCASE("unknown keys fail with their line number") {
        try {
            parse_config("case.t_max = 50\n\ntrainer.learning_rate = 0.1\n");
            FAIL("accepted an unknown key");
        } catch (const ConfigError& e) {
            CHECK(e.line() == 3);
            CHECK(std::string(e.what()).find("learning_rate") != std::string::npos);
        }
        CHECK_THROWS_AS(parse_config("case.t_max 50\n"), ConfigError);
        CHECK_THROWS_AS(parse_config("case.t_max = 5\ncase.t_max = 6\n"), ConfigError);
    }
    SUBCASE("sections only touch their own target") {
        const ConfigOverlay o = parse_config("trainer.lr = 0.5\nperseus.gamma = 0.9\ncase.t_max = 77\n");
        TrainerConfig t;
        PerseusConfig p;
        CaseSpec c = preset("isotropic-small");
        o.apply(t);
        o.apply(p);
        o.apply(c);
        CHECK(t.lr == 0.5);
        CHECK(p.gamma == 0.9);
        CHECK(c.t_max == 77);
    }
}

TEST_CASE("presets") {
    const auto& cases = canonical_cases();
    REQUIRE(cases.size() == 4);
    const CaseSpec& s = cases[0];
    CHECK(s.name == "isotropic-small");
    CHECK(s.grid.nx == 19);
    CHECK(s.model.h_max == 2);
    CHECK(s.t_max == 642);
    CHECK(s.model.lambda_over_dx == 1.0);
    CHECK(s.model.r_dt == 1.0);
    const CaseSpec& l = cases[1];
    CHECK(l.grid.nx == 53);
    CHECK(l.model.h_max == 3);
    CHECK(l.t_max == 2188);
    CHECK(l.model.lambda_over_dx == 3.0);
    CHECK(l.model.r_dt == 2.0);
    for (int k : {2, 3}) {
        const CaseSpec& w = cases[static_cast<std::size_t>(k)];
        CHECK(w.grid.nx == 81);
        CHECK(w.grid.ny == 41);
        CHECK(w.grid.agent_start == Cell{66, 21});
        CHECK(w.model.h_max == 1);
        CHECK(w.t_max == 10000);
        CHECK(w.model.v_bar == 2.0);
        CHECK(w.model.tau_bar == 150.0);
    }
    CHECK(cases[2].model.r_bar == 2.5);
    CHECK(cases[3].model.r_bar == 0.25);
    CHECK_THROWS_AS(preset("isotropic-medium"), std::invalid_argument);
}

TEST_CASE("command line") {
    SUBCASE("list-cases") {
        const Run r = osp_run({"list-cases"});
        CHECK(r.status == 0);
        const auto rows = lines_of(r.out);
        REQUIRE(rows.size() == 5);
        CHECK(rows[1].rfind("isotropic-small,19,19,", 0) == 0);
        CHECK(rows[2].rfind("isotropic-large,53,53,", 0) == 0);
        CHECK(rows[3].rfind("windy-detections,81,41,", 0) == 0);
        CHECK(rows[4].rfind("windy-scarce,81,41,", 0) == 0);
    }
    SUBCASE("evaluate is byte-for-byte repeatable and its trajectory replays") {
        const fs::path a = scratch("eval"), b = scratch("eval");
        const Run r1 = osp_run({"evaluate", "isotropic-small", "infotaxis", "--episodes", "100", "--seed", "7",
                                "--out-dir", a.string()});
        const Run r2 = osp_run({"evaluate", "isotropic-small", "infotaxis", "--episodes", "100", "--seed", "7",
                                "--out-dir", b.string()});
        REQUIRE(r1.status == 0);
        REQUIRE(r2.status == 0);
        CHECK(r1.out == r2.out);
        const std::string report = "isotropic-small_infotaxis_report.csv";
        CHECK(slurp(a / report) == slurp(b / report));
        CHECK(slurp(a / report) == r1.out);
        CHECK(fs::exists(a / "isotropic-small_infotaxis.manifest.json"));
        const fs::path traj = a / "isotropic-small_infotaxis_episode0.traj";
        CHECK(slurp(traj).find("manifest isotropic-small_infotaxis.manifest.json") != std::string::npos);

        const Run replay = osp_run({"replay", traj.string()});
        CHECK(replay.status == 0);
        CHECK(replay.out.rfind("replay ok", 0) == 0);

        std::string edited = slurp(traj);
        edited.replace(edited.find("\nseed "), 6, "\nseed 1");
        spill(a / "edited.traj", edited);
        CHECK(osp_run({"replay", (a / "edited.traj").string()}).status != 0);

        const Run plot = osp_run({"plot", (a / report).string(), "--out-dir", a.string()});
        CHECK(plot.status == 0);
        CHECK(fs::exists(a / "isotropic-small_infotaxis_report_bars.svg"));
        fs::remove_all(a);
        fs::remove_all(b);
    }
    SUBCASE("a policy solved for another case is refused") {
        const fs::path d = scratch("guard");
        const Problem p = Problem::make(preset("isotropic-small"));
        CaseSpec other = preset("isotropic-small");
        other.t_max = 50;
        const AlphaPolicy policy = initial_alpha_policy(p.model->layout(), 0.98, 0.0, other.fingerprint());
        spill(d / "other.alpha", serialize_alpha_policy(policy));
        const Run r = osp_run({"evaluate", "isotropic-small", (d / "other.alpha").string(), "--episodes", "5",
                               "--out-dir", d.string()});
        CHECK(r.status != 0);
        CHECK(r.err.find("fingerprint") != std::string::npos);
        CHECK(!fs::exists(d / "isotropic-small_other_report.csv"));

        // the same artifact is accepted for the case it was solved for
        spill(d / "cfg.txt", "case.t_max = 50\n");
        const Run ok = osp_run({"evaluate", "isotropic-small", (d / "other.alpha").string(), "--episodes", "3",
                                "--config", (d / "cfg.txt").string(), "--out-dir", d.string()});
        CHECK(ok.status == 0);
        fs::remove_all(d);
    }
    SUBCASE("bad input exits nonzero with a diagnostic") {
        const fs::path d = scratch("bad");
        Run r = osp_run({"evaluate", "isotropic-medium", "infotaxis", "--out-dir", d.string()});
        CHECK(r.status != 0);
        CHECK(r.err.find("isotropic-medium") != std::string::npos);
        r = osp_run({"evaluate", "isotropic-small", "sai", "--out-dir", d.string()});
        CHECK(r.status != 0);
        spill(d / "cfg.txt", "case.t_max = 50\ncase.colour = red\n");
        r = osp_run({"evaluate", "isotropic-small", "infotaxis", "--config", (d / "cfg.txt").string()});
        CHECK(r.status != 0);
        CHECK(r.err.find("line 2") != std::string::npos);
        CHECK(osp_run({"frobnicate"}).status != 0);
        CHECK(osp_run({}).status != 0);
        fs::remove_all(d);
    }
}

TEST_CASE("plot files") {
    const fs::path d = scratch("plots");

    SUBCASE("an empty report writes nothing") {
        CHECK_THROWS_AS(emit_report_plot({}, d.string(), "empty"), std::invalid_argument);
        CHECK(fs::is_empty(d));
        spill(d / "empty.csv", std::string(kReportHeader) + "\n");
        const fs::path out = d / "out";
        fs::create_directories(out);
        CHECK(osp_run({"plot", (d / "empty.csv").string(), "--out-dir", out.string()}).status != 0);
        CHECK(fs::is_empty(out));
    }
    SUBCASE("a one-step trajectory is a single segment") {
        EpisodeRecord r;
        r.case_name = "tiny";
        r.policy = "greedy-map";
        r.nx = 5;
        r.ny = 5;
        r.start = {2, 2};
        r.source = {2, 3};
        r.steps = {{{2, 3}, Action::north, Observation::omega()}};
        r.T = 1;
        const PlotFiles f = emit_trajectory_plot(r, d.string(), "one");
        const auto rows = lines_of(slurp(f.data));
        REQUIRE(rows.size() == 3);
        CHECK(rows[0] == "t,x,y,hits");
        CHECK(rows[1] == "0,2,2,0");
        CHECK(rows[2] == "1,2,3,omega");
        CHECK(slurp(f.image).find("<svg") != std::string::npos);
    }
    SUBCASE("bars keep the report order") {
        std::vector<BenchmarkReport> rows(3);
        const char* names[] = {"zeta", "alpha", "mid"};
        for (int i = 0; i < 3; ++i) {
            rows[static_cast<std::size_t>(i)].case_name = "c";
            rows[static_cast<std::size_t>(i)].policy = names[i];
            rows[static_cast<std::size_t>(i)].episodes = 10;
            rows[static_cast<std::size_t>(i)].successes = 10;
            rows[static_cast<std::size_t>(i)].mean_T = 10.0 * (3 - i);
        }
        rows[1].pr_failure = 0.5;
        const auto data = lines_of(slurp(emit_report_plot(rows, d.string(), "bars").data));
        REQUIRE(data.size() == 4);
        CHECK(data[1].rfind("0,c,zeta,", 0) == 0);
        CHECK(data[2].rfind("1,c,alpha,", 0) == 0);
        CHECK(data[3].rfind("2,c,mid,", 0) == 0);
    }
    fs::remove_all(d);
}
