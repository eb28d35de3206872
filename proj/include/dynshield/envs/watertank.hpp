#pragma once

#include "dynshield/envs/environment.hpp"
#include "dynshield/mdp.hpp"

namespace dynshield {

/// 100-liter tank with a valve that must stay put for three steps after each
/// change. Env actions are (inflow n, outflow m); outputs are
/// (action, level status, valve flag), where the status describes the level
/// reached by the step.
class WaterTank final : public Environment {
public:
    static constexpr int kCapacity = 100;
    static constexpr int kStartLevel = 50;
    static constexpr int kMinHold = 3;
    static constexpr std::size_t kMaxEpLen = 200;

    enum Cont : ContAction { Open = 0, Close = 1 };
    enum Status : unsigned { Low = 0, Safe = 1, High = 2 };

    WaterTank();

    [[nodiscard]] std::string name() const override { return "watertank"; }
    [[nodiscard]] std::size_t max_ep_len() const override { return kMaxEpLen; }
    [[nodiscard]] std::size_t rl_state_count() const override { return (kCapacity + 1) * 2 * kMinHold; }
    [[nodiscard]] SafetyAutomaton spec() const override;
    [[nodiscard]] std::unique_ptr<Environment> clone() const override { return std::make_unique<WaterTank>(*this); }

    std::size_t reset(Rng& rng) override;
    [[nodiscard]] Key start_key() const override { return encode(kStartLevel, false, kMinHold); }
    [[nodiscard]] std::optional<Outcome> apply(Key k, ContAction a, EnvAction e) const override;
    [[nodiscard]] std::string key_name(Key k) const override;
    [[nodiscard]] std::size_t rl_state() const override { return static_cast<std::size_t>(key_); }

    /// since = steps since the last valve change, capped at kMinHold.
    static Key encode(int level, bool open, int since);
    static int level_of(Key k) { return static_cast<int>(k / (2 * kMinHold)); }
    static bool open_of(Key k) { return (k / kMinHold) % 2 == 1; }
    static int since_of(Key k) { return static_cast<int>(k % kMinHold) + 1; }

    static EnvAction env_action(int inflow, int outflow) { return static_cast<EnvAction>(inflow * 2 + outflow); }
    static OutputSymbol output(ContAction a, Status s, bool violation)
    {
        return static_cast<OutputSymbol>(a * 6 + s * 2 + (violation ? 1 : 0));
    }

protected:
    EnvAction sample_env(ContAction a, Rng& rng) override;
};

SafetyAutomaton watertank_spec();

/// The bare level machine: states l0..l100, outputs low/safe/high of the
/// level reached, open needs inflow 1 or 2 and close needs inflow 0.
Fsrs watertank_level_model();
/// Uniform inflow/outflow: 0.25 per pair when open, 0.5 per outflow when closed.
EnvStrategy watertank_level_strategy();

} // namespace dynshield
