#pragma once

#include "dynshield/dynamic.hpp"
#include "dynshield/envs/environment.hpp"
#include "dynshield/shield.hpp"

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <vector>

namespace dynshield {

class QTable {
public:
    QTable() = default;
    QTable(std::size_t states, std::size_t actions, double init = 0.0);

    [[nodiscard]] double at(std::size_t s, ContAction a) const { return values_.at(s * actions_ + a); }
    double& at(std::size_t s, ContAction a) { return values_.at(s * actions_ + a); }
    [[nodiscard]] std::size_t num_states() const { return states_; }
    [[nodiscard]] std::size_t num_actions() const { return actions_; }
    /// Max over `allowed`; `allowed` must be non-empty.
    [[nodiscard]] double max_over(std::size_t s, ActionSet allowed) const;
    /// Argmax over `allowed`, ties to the smallest action index.
    [[nodiscard]] ContAction argmax(std::size_t s, ActionSet allowed) const;

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    std::size_t states_ = 0;
    std::size_t actions_ = 0;
    std::vector<double> values_;
};

struct QConfig {
    double alpha = 0.1;
    double gamma = 0.99;
    double epsilon_start = 1.0;
    double epsilon_end = 0.05;
    double decay_fraction = 0.5; // share of the step budget over which epsilon decays

    /// Throws ValidationError outside alpha in (0,1], gamma in [0,1), epsilons in [0,1].
    void validate() const;
    [[nodiscard]] double epsilon(std::size_t step, std::size_t total_steps) const;
};

/// Q(s,a) += alpha * (r + gamma * max_{a' in allowed_next} Q(s',a') - Q(s,a)),
/// with no bootstrap term when `terminal`.
void q_update(QTable& q, std::size_t s, ContAction a, double r, std::size_t s_next, ActionSet allowed_next,
              bool terminal, double alpha, double gamma);

/// Epsilon-greedy restricted to `allowed` (non-empty).
ContAction select_action(const QTable& q, std::size_t s, ActionSet allowed, double epsilon, Rng& rng);

struct EvalResult {
    double mean_reward = 0.0;
    double safe_rate = 0.0;
};

/// Greedy rollouts on fresh episodes. With `shield`, actions are restricted
/// to its allowed sets (a fresh cursor per episode).
EvalResult evaluate(const QTable& q, Environment& env, std::size_t episodes, Rng& rng,
                    const std::shared_ptr<const ShieldTables>& shield = nullptr);

enum class Mode { Plain, Shielded };
const char* mode_name(Mode m);
Mode parse_mode(const std::string& s);

struct TrainConfig {
    std::size_t total_steps = 50000;
    std::size_t eval_interval = 5000;
    std::size_t eval_episodes = 30;
    QConfig q;
    RebuildPolicy policy;
    bool shielded_eval = false;
    bool masked_target = true; // backup over the next state's allowed set

    void validate() const;
};

struct MetricsRow {
    std::uint64_t seed = 0;
    std::size_t episode = 0;
    std::size_t steps_cum = 0;
    double reward = 0.0;
    bool undesired = false;
    std::size_t undesired_cum = 0;
    std::size_t shield_states = 0;
    std::size_t rebuild_count = 0;
    double rebuild_time_ms = 0.0;
    std::optional<double> eval_mean_reward;
    std::optional<double> eval_safe_rate;
};

struct Metrics {
    std::vector<MetricsRow> rows;
    std::size_t undesired_episodes = 0;
    std::size_t episodes = 0;
    std::size_t rebuilds = 0;
    std::size_t fallback_queries = 0;
    std::size_t containment_violations = 0; // executed actions outside the allowed set
    std::optional<EvalResult> best;         // by eval mean reward
    QTable best_q;
    std::shared_ptr<const ShieldSnapshot> final_snapshot;
    std::vector<Episode> traces; // shielded mode only
};

Metrics train(Environment& env, Mode mode, const TrainConfig& config, std::uint64_t seed);

/// Fixed header order: seed, episode, steps_cum, reward, undesired_flag,
/// undesired_cum, shield_states, rebuild_count, rebuild_time_ms,
/// eval_mean_reward, eval_safe_rate.
void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_metrics_csv(std::istream& is);

/// Independent stream `stream` derived from `seed`.
Rng derive_rng(std::uint64_t seed, std::uint64_t stream);

} // namespace dynshield
