#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "osp/policies.hpp"
#include "osp/problem.hpp"
#include "osp/rng.hpp"

namespace osp {

struct StepRecord {
    Cell agent;  // position after the move
    Action action = Action::north;
    Observation observation;
    friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct EpisodeRecord {
    std::string case_name;
    std::uint64_t fingerprint = 0;
    std::string policy;
    std::uint64_t seed = 0;
    int prior_index = 0;
    int nx = 0;
    int ny = 0;
    Cell start;
    Cell source;
    std::vector<StepRecord> steps;
    int T = 0;
    bool failed = false;
    /// Hits received during the search; the initial detection is not counted.
    int cumulative_hits = 0;

    double cumulative_reward() const { return -static_cast<double>(T); }
    friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

/// One search: draw a prior by weight, draw the source from it, then
/// act / move / observe / update until the source is found or t_max steps
/// elapse. Throws std::logic_error if the policy returns an invalid move.
EpisodeRecord run_episode(const Problem& problem, const Policy& policy, Rng& rng);
/// Runs with a fresh engine seeded by `seed`, recorded in the result.
EpisodeRecord run_episode(const Problem& problem, const Policy& policy, std::uint64_t seed);

struct BenchmarkReport {
    std::string case_name;
    std::string policy;
    int episodes = 0;
    int successes = 0;
    /// Conditioned on success; empty when every episode failed.
    std::optional<double> mean_T;
    std::optional<double> se_mean_T;
    /// Smallest T such that at least 99% of successful episodes finished within it.
    std::optional<int> p99_T;
    double pr_failure = 0.0;
    double mean_cum_hits = 0.0;

    /// P99 is only meaningful relative to the successful episodes; flag runs
    /// where more than 1% of searches failed.
    bool p99_flagged() const { return pr_failure > 0.01; }
    /// Expected search time when failures count as t_max; used to rank snapshots.
    double score(int t_max) const;
};

/// Episode i uses seed derive_seed(master_seed, i). Results do not depend on
/// `threads`. Throws std::invalid_argument for episodes < 1.
std::vector<EpisodeRecord> run_episodes(const Problem& problem, const Policy& policy, int episodes,
                                        std::uint64_t master_seed, int threads = 1);

/// Aggregates in record order. Throws std::invalid_argument for an empty list.
BenchmarkReport summarize(const std::vector<EpisodeRecord>& records);

BenchmarkReport benchmark(const Problem& problem, const Policy& policy, int episodes,
                          std::uint64_t master_seed, int threads = 1);

inline constexpr const char* kReportHeader =
    "case,policy,episodes,mean_T,se_mean_T,p99_T,pr_failure,mean_cum_hits";

/// CSV with kReportHeader; undefined values are written as NA.
std::string report_csv(const std::vector<BenchmarkReport>& rows);
std::vector<BenchmarkReport> parse_report_csv(const std::string& text);

/// Line-oriented trajectory text: `key value` header lines, then a
/// `t x y action h` table with `omega` marking the terminal observation.
std::string export_trajectory(const EpisodeRecord& record, const std::string& manifest = "");
EpisodeRecord parse_trajectory(const std::string& text);

}  // namespace osp
