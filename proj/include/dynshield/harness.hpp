#pragma once

#include "dynshield/rl.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace dynshield {

struct ExperimentConfig {
    std::string env = "watertank";
    std::vector<Mode> modes{Mode::Plain, Mode::Shielded};
    std::size_t total_steps = 0; // 0 picks the env default
    std::size_t eval_interval = 5000;
    std::size_t eval_episodes = 30;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    QConfig q;
    RebuildPolicy policy;
    bool shielded_eval = false;
    bool masked_target = true;
    std::filesystem::path out_dir = "runs";
    std::optional<std::filesystem::path> truth;
    std::optional<std::filesystem::path> spec;
    std::optional<std::filesystem::path> model;
    int jobs = 1;

    /// Throws ValidationError: unknown env, duplicate seeds, missing files, bad numbers.
    void validate() const;
    [[nodiscard]] std::size_t steps() const;
    [[nodiscard]] TrainConfig train_config() const;
};

/// 100k for gridworld, 50k otherwise.
std::size_t default_steps(const std::string& env);

/// Sets one key (the long CLI flag name without dashes). Throws ValidationError
/// on an unknown key or a malformed value.
void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// Flat key=value lines; `#` starts a comment. Throws ParseError.
ExperimentConfig parse_config(std::string_view text, ExperimentConfig base = {});
ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base = {});

/// "3", "1-10" or "1,4,7" (pieces may be mixed: "1-3,8").
std::vector<std::uint64_t> parse_seeds(const std::string& s);
/// "plain", "shielded" or "both".
std::vector<Mode> parse_modes(const std::string& s);

std::string run_file_name(const std::string& env, Mode mode, std::uint64_t seed);

struct RunSummary {
    std::string env;
    Mode mode = Mode::Plain;
    std::uint64_t seed = 0;
    std::size_t episodes = 0;
    std::size_t undesired_episodes = 0;
    std::optional<double> best_mean_reward;
    std::optional<double> best_safe_rate;
    std::size_t rebuilds = 0;
    std::size_t containment_violations = 0; // only known for live runs
};

/// Summary of one metrics CSV; env, mode and seed come from the file name.
/// The best controller is the first eval with the highest mean reward.
RunSummary summarize_run(const std::filesystem::path& csv);
RunSummary summarize_rows(const std::vector<MetricsRow>& rows);

/// Trains every (mode, seed) pair with up to cfg.jobs OpenMP threads and
/// writes <env>_<mode>_seed<k>.csv into cfg.out_dir. Results come back in
/// (mode, seed) order regardless of scheduling.
std::vector<RunSummary> run_matrix(const ExperimentConfig& cfg,
                                   const std::function<void(const RunSummary&)>& on_done = {});

struct ReportRow {
    std::string env;
    Mode mode = Mode::Plain;
    std::size_t runs = 0;
    double mean_undesired = 0.0;
    double mean_best_reward = 0.0;
    double mean_safe_rate = 0.0;
};

/// Groups by (env, mode), sorted by env then plain before shielded. Runs
/// without any eval row count toward the undesired mean only.
std::vector<ReportRow> aggregate(const std::vector<RunSummary>& runs);
void write_report_table(std::ostream& os, const std::vector<ReportRow>& rows);
void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows);

} // namespace dynshield
