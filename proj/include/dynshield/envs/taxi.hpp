#pragma once

#include "dynshield/envs/environment.hpp"

namespace dynshield {

/// 5x5 taxi map with barriers. The taxi can break when it hits a barrier;
/// each hit raises the chance. The first env action of an episode is the
/// (source, destination) pair, later ones are `ok` or `break`.
class Taxi final : public Environment {
public:
    static constexpr int kSize = 5;
    static constexpr std::size_t kMaxEpLen = 200;
    static constexpr int kInTaxi = 4;
    static constexpr Key kStart = 500;
    static constexpr EnvAction kOk = 12;
    static constexpr EnvAction kBreak = 13;

    enum Cont : ContAction { North = 0, South = 1, East = 2, West = 3, Pickup = 4, Dropoff = 5 };
    enum Event : unsigned { Move = 0, Wall = 1, Broken = 2, PickedUp = 3, DroppedOff = 4, WrongPick = 5, WrongDrop = 6 };
    enum Here : unsigned { Nothing = 0, AtPassenger = 1, AtDestination = 2 };

    /// R, G, Y, B as row * 5 + col.
    static constexpr int kLocations[4] = {0, 4, 20, 23};
    static constexpr int kStartCell = 12;

    Taxi();

    [[nodiscard]] std::string name() const override { return "taxi"; }
    [[nodiscard]] std::size_t max_ep_len() const override { return kMaxEpLen; }
    [[nodiscard]] std::size_t rl_state_count() const override { return 500; }
    [[nodiscard]] SafetyAutomaton spec() const override;
    [[nodiscard]] std::unique_ptr<Environment> clone() const override { return std::make_unique<Taxi>(*this); }

    std::size_t reset(Rng& rng) override;
    /// Starts an episode with a fixed passenger pair (index into the first 12 env symbols).
    std::size_t reset_with(EnvAction pair);
    [[nodiscard]] Key start_key() const override { return kStart; }
    [[nodiscard]] std::optional<Outcome> apply(Key k, ContAction a, EnvAction e) const override;
    [[nodiscard]] std::string key_name(Key k) const override;
    [[nodiscard]] std::size_t rl_state() const override;
    [[nodiscard]] int damage() const { return damage_; }

    /// Gym state encoding ((row * 5 + col) * 5 + passenger) * 4 + destination.
    static Key encode(int cell, int passenger, int destination)
    {
        return static_cast<Key>((cell * 5 + passenger) * 4 + destination);
    }
    static EnvAction pair_action(int source, int destination);
    static OutputSymbol output(Event ev, int cell, bool in_taxi, Here here)
    {
        return static_cast<OutputSymbol>(((ev * 25 + cell) * 2 + (in_taxi ? 1 : 0)) * 3 + here);
    }
    static bool blocked(int cell, ContAction dir);

protected:
    EnvAction sample_env(ContAction a, Rng& rng) override;
    void after_step(ContAction a, EnvAction e, const Outcome& o) override;

private:
    EnvAction pending_pair_ = 0;
    int damage_ = 0;
};

SafetyAutomaton taxi_spec();

} // namespace dynshield
