#pragma once

#include "dynshield/alphabet.hpp"
#include "dynshield/fsrs.hpp"
#include "dynshield/safety_automaton.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>

namespace dynshield {

using Rng = std::mt19937_64;

struct EnvStep {
    EnvAction env_action = 0;
    OutputSymbol output = 0;
    double reward = 0.0;
    bool done = false;
    bool truncated = false; // done only because the step cap was reached
    bool undesired = false;
    std::size_t rl_state = 0;
};

/// A benchmark with observable environment actions. The deterministic core
/// is apply(); step() resolves the randomness into an env action first, so
/// with a fixed stream an episode is a function of the cont actions.
class Environment {
public:
    /// Encoded simulator state; covers everything apply() depends on.
    using Key = std::uint64_t;

    struct Outcome {
        Key next;
        OutputSymbol output;
        double reward;
        bool done;
        bool undesired;
    };

    virtual ~Environment() = default;

    [[nodiscard]] virtual std::string name() const = 0;
    [[nodiscard]] const Alphabet& cont() const { return cont_; }
    [[nodiscard]] const Alphabet& env() const { return env_; }
    [[nodiscard]] const Alphabet& out() const { return out_; }
    [[nodiscard]] virtual std::size_t max_ep_len() const = 0;
    [[nodiscard]] virtual std::size_t rl_state_count() const = 0;
    [[nodiscard]] virtual SafetyAutomaton spec() const = 0;
    [[nodiscard]] virtual std::unique_ptr<Environment> clone() const = 0;

    /// Starts an episode; returns the agent's observation.
    virtual std::size_t reset(Rng& rng) = 0;
    /// Throws AlphabetError on an unknown action, UsageError after `done`.
    EnvStep step(ContAction a, Rng& rng);
    /// The step with a given env action; nullopt when it is not possible here.
    std::optional<EnvStep> step_with(ContAction a, EnvAction e);

    [[nodiscard]] virtual Key start_key() const = 0;
    /// nullopt when `e` is not possible in `k` under `a`.
    [[nodiscard]] virtual std::optional<Outcome> apply(Key k, ContAction a, EnvAction e) const = 0;
    [[nodiscard]] virtual std::string key_name(Key k) const = 0;

    [[nodiscard]] Key key() const { return key_; }
    [[nodiscard]] bool done() const { return done_; }
    [[nodiscard]] std::size_t steps() const { return steps_; }
    [[nodiscard]] virtual std::size_t rl_state() const = 0;

protected:
    Environment(Alphabet cont, Alphabet env, Alphabet out)
        : cont_(std::move(cont)), env_(std::move(env)), out_(std::move(out))
    {
    }

    /// Draws the env action for `a` in the current state.
    virtual EnvAction sample_env(ContAction a, Rng& rng) = 0;
    /// Hook for hidden per-episode state (e.g. damage) after a step.
    virtual void after_step(ContAction, EnvAction, const Outcome&) {}
    void begin(Key k)
    {
        key_ = k;
        done_ = false;
        steps_ = 0;
    }

    Alphabet cont_;
    Alphabet env_;
    Alphabet out_;
    Key key_ = 0;
    bool done_ = true;
    std::size_t steps_ = 0;
};

/// Breadth-first enumeration of apply() from start_key(). Every terminating
/// move leads to a single `done` state without transitions.
Fsrs ground_truth(const Environment& env);

/// "watertank", "gridworld", "cliffwalk" or "taxi"; throws ValidationError otherwise.
std::unique_ptr<Environment> make_environment(const std::string& name);

} // namespace dynshield
