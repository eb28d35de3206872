#pragma once

#include "dynshield/envs/environment.hpp"

namespace dynshield {

/// 3 x 13 grid; start bottom-left, goal bottom-right, cliff in between.
/// Deterministic: the env alphabet has a single symbol.
class CliffWalk final : public Environment {
public:
    static constexpr int kRows = 3;
    static constexpr int kCols = 13;
    static constexpr std::size_t kMaxEpLen = 100;

    enum Out : OutputSymbol { Safe = 0, Cliff = 1, Goal = 2 };

    CliffWalk();

    [[nodiscard]] std::string name() const override { return "cliffwalk"; }
    [[nodiscard]] std::size_t max_ep_len() const override { return kMaxEpLen; }
    [[nodiscard]] std::size_t rl_state_count() const override { return kRows * kCols; }
    [[nodiscard]] SafetyAutomaton spec() const override;
    [[nodiscard]] std::unique_ptr<Environment> clone() const override { return std::make_unique<CliffWalk>(*this); }

    std::size_t reset(Rng& rng) override;
    [[nodiscard]] Key start_key() const override { return (kRows - 1) * kCols; }
    [[nodiscard]] std::optional<Outcome> apply(Key k, ContAction a, EnvAction e) const override;
    [[nodiscard]] std::string key_name(Key k) const override;
    [[nodiscard]] std::size_t rl_state() const override { return static_cast<std::size_t>(key_); }

    static bool is_cliff(int r, int c) { return r == kRows - 1 && c > 0 && c < kCols - 1; }

protected:
    EnvAction sample_env(ContAction, Rng&) override { return 0; }
};

SafetyAutomaton cliffwalk_spec();

} // namespace dynshield
