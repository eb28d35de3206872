#pragma once

#include "dynshield/fsrs.hpp"
#include "dynshield/learner.hpp"
#include "dynshield/safety_automaton.hpp"
#include "dynshield/shield.hpp"
#include "dynshield/trace.hpp"

#include <memory>
#include <mutex>
#include <optional>
#include <vector>

namespace dynshield {

/// Completed episodes plus the one being recorded. The sample set is
/// extended as each episode closes, so it is prefix-closed by construction.
class TraceStore {
public:
    TraceStore(Alphabet cont, Alphabet env, Alphabet out, std::size_t max_ep_len, std::size_t min_depth_cap = 5);

    /// Throws UsageError if an episode is already open.
    void begin_episode();
    /// Throws UsageError without an open episode or past max_ep_len.
    void record_step(ContAction c, EnvAction e, OutputSymbol out);
    /// Closes the open episode; empty episodes are dropped.
    void end_episode();

    [[nodiscard]] bool episode_open() const { return open_; }
    [[nodiscard]] const std::vector<Episode>& episodes() const { return episodes_; }
    [[nodiscard]] const Episode& current() const { return current_; }
    [[nodiscard]] const SampleSet& samples() const { return samples_; }
    [[nodiscard]] const RunLog& run_log() const { return log_; }
    [[nodiscard]] std::size_t total_steps() const { return total_steps_; }
    [[nodiscard]] std::size_t steps_since_build() const { return total_steps_ - built_at_; }
    void mark_built() { built_at_ = total_steps_; }

    [[nodiscard]] const Alphabet& cont() const { return cont_; }
    [[nodiscard]] const Alphabet& env() const { return env_; }
    [[nodiscard]] const Alphabet& out() const { return out_; }

private:
    Alphabet cont_;
    Alphabet env_;
    Alphabet out_;
    std::vector<Episode> episodes_;
    Episode current_;
    bool open_ = false;
    SampleSet samples_;
    RunLog log_;
    std::size_t total_steps_ = 0;
    std::size_t built_at_ = 0;
};

struct RebuildPolicy {
    std::size_t min_new_steps = 1000;
    bool rebuild_on_undesired = true;
    std::size_t min_depth_cap = 5;

    /// Throws ValidationError when min_new_steps is zero.
    void validate() const;
};

struct ShieldSnapshot {
    std::shared_ptr<const ShieldTables> tables;
    Fsrs model;
    std::size_t sample_size = 0;
    std::size_t model_states = 0;
    std::size_t min_depth = 0;
    double build_ms = 0.0;
};

/// Learns a model from the whole store and synthesizes its shield.
ShieldSnapshot rebuild(const TraceStore& store, const SafetyAutomaton& spec);

/// The all-sink shield used before the first rebuild.
ShieldSnapshot initial_snapshot(const Alphabet& cont, const Alphabet& env, const SafetyAutomaton& spec);

/// Rebuilds when enough steps arrived since the last build, or when the last
/// completed episode violates the spec and the policy reacts to that.
/// Call between episodes only.
std::optional<ShieldSnapshot> maybe_rebuild(TraceStore& store, const RebuildPolicy& policy,
                                            const SafetyAutomaton& spec);

/// Runtime side of dynamic shielding for one training loop. Snapshots are
/// published under a lock; the cursor always runs on the snapshot that was
/// current when the episode started.
class DynamicShield {
public:
    DynamicShield(Alphabet cont, Alphabet env, SafetyAutomaton spec, RebuildPolicy policy, std::size_t max_ep_len);

    void on_episode_start();
    [[nodiscard]] PreemptiveShield::Query current_allowed() const { return cursor_.query(); }
    void advance(ContAction c, EnvAction e, OutputSymbol out);
    /// Closes the episode and rebuilds if the policy says so; true on rebuild.
    bool on_episode_end();

    [[nodiscard]] std::shared_ptr<const ShieldSnapshot> snapshot() const;
    [[nodiscard]] const PreemptiveShield& cursor() const { return cursor_; }
    [[nodiscard]] const TraceStore& store() const { return store_; }
    [[nodiscard]] std::size_t rebuild_count() const { return rebuilds_; }
    [[nodiscard]] double rebuild_ms_total() const { return rebuild_ms_; }

private:
    void publish(ShieldSnapshot s);

    SafetyAutomaton spec_;
    RebuildPolicy policy_;
    TraceStore store_;
    mutable std::mutex mutex_;
    std::shared_ptr<const ShieldSnapshot> snapshot_;
    PreemptiveShield cursor_;
    std::size_t rebuilds_ = 0;
    double rebuild_ms_ = 0.0;
};

} // namespace dynshield
