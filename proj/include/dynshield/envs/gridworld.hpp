#pragma once

#include "dynshield/envs/environment.hpp"

#include <array>

namespace dynshield {

/// Ego robot and a randomly moving second robot in a walled 7x7 arena.
/// The second robot's move is the env action.
class GridWorld final : public Environment {
public:
    static constexpr int kSize = 7;
    static constexpr std::size_t kMaxEpLen = 100;
    // clang-format off
    static constexpr std::array<const char*, kSize> kMap = {
        "xxxxxxx",
        "x    Ex",
        "x xxx x",
        "x xG  x",
        "x xxx x",
        "xS    x",
        "xxxxxxx",
    };
    // clang-format on

    enum Out : OutputSymbol { Ok = 0, Wall = 1, Crash = 2, WallCrash = 3, Goal = 4 };

    GridWorld();

    [[nodiscard]] std::string name() const override { return "gridworld"; }
    [[nodiscard]] std::size_t max_ep_len() const override { return kMaxEpLen; }
    /// Ego and other robot each on one of the 5x5 inner cells.
    [[nodiscard]] std::size_t rl_state_count() const override { return 625; }
    [[nodiscard]] SafetyAutomaton spec() const override;
    [[nodiscard]] std::unique_ptr<Environment> clone() const override { return std::make_unique<GridWorld>(*this); }

    std::size_t reset(Rng& rng) override;
    [[nodiscard]] Key start_key() const override;
    [[nodiscard]] std::optional<Outcome> apply(Key k, ContAction a, EnvAction e) const override;
    [[nodiscard]] std::string key_name(Key k) const override;
    [[nodiscard]] std::size_t rl_state() const override;

    static bool is_wall(int r, int c) { return kMap[r][c] == 'x'; }
    /// Cells are r * kSize + c.
    static Key encode(int ego, int other) { return static_cast<Key>(ego * kSize * kSize + other); }

protected:
    EnvAction sample_env(ContAction a, Rng& rng) override;
};

SafetyAutomaton gridworld_spec();

} // namespace dynshield
