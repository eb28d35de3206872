#include "dynshield/envs/taxi.hpp"

#include "dynshield/errors.hpp"

#include <algorithm>

namespace dynshield {

namespace {

constexpr const char* kLocationNames[4] = {"R", "G", "Y", "B"};
constexpr const char* kEventNames[7] = {"move", "wall", "broken", "pickup", "dropoff", "wrongpick", "wrongdrop"};
constexpr const char* kHereNames[3] = {"n", "p", "d"};
constexpr double kBreakPerHit = 0.1;

std::pair<int, int> pair_of(EnvAction e)
{
    int src = static_cast<int>(e) / 3;
    int k = static_cast<int>(e) % 3;
    return {src, k < src ? k : k + 1};
}

Alphabet env_alphabet()
{
    std::vector<std::string> v;
    for (EnvAction e = 0; e < 12; ++e) {
        auto [s, d] = pair_of(e);
        v.push_back(std::string("p") + kLocationNames[s] + kLocationNames[d]);
    }
    v.emplace_back("ok");
    v.emplace_back("break");
    return Alphabet(std::move(v));
}

Alphabet out_alphabet()
{
    std::vector<std::string> v;
    for (const char* ev : kEventNames)
        for (int cell = 0; cell < 25; ++cell)
            for (int in = 0; in < 2; ++in)
                for (const char* h : kHereNames)
                    v.push_back(std::string(ev) + "_" + std::to_string(cell / 5) + std::to_string(cell % 5) + "_" +
                                (in ? "in" : "out") + "_" + h);
    return Alphabet(std::move(v));
}

bool wall_east(int r, int c)
{
    return (r <= 1 && c == 1) || (r >= 3 && (c == 0 || c == 2));
}

} // namespace

Taxi::Taxi()
    : Environment(Alphabet({"N", "S", "E", "W", "pickup", "dropoff"}), env_alphabet(), out_alphabet())
{
}

EnvAction Taxi::pair_action(int source, int destination)
{
    if (source == destination || source < 0 || source > 3 || destination < 0 || destination > 3)
        throw AlphabetError("invalid passenger pair");
    return static_cast<EnvAction>(source * 3 + (destination < source ? destination : destination - 1));
}

bool Taxi::blocked(int cell, ContAction dir)
{
    const int r = cell / kSize;
    const int c = cell % kSize;
    switch (dir) {
    case North: return r == 0;
    case South: return r == kSize - 1;
    case East: return c == kSize - 1 || wall_east(r, c);
    case West: return c == 0 || wall_east(r, c - 1);
    default: return false;
    }
}

SafetyAutomaton Taxi::spec() const
{
    return taxi_spec();
}

std::size_t Taxi::reset(Rng& rng)
{
    return reset_with(static_cast<EnvAction>(std::uniform_int_distribution<int>(0, 11)(rng)));
}

std::size_t Taxi::reset_with(EnvAction pair)
{
    if (pair >= 12)
        throw AlphabetError("invalid passenger pair");
    pending_pair_ = pair;
    damage_ = 0;
    begin(kStart);
    return rl_state();
}

std::optional<Environment::Outcome> Taxi::apply(Key k, ContAction a, EnvAction e) const
{
    int cell, passenger, destination;
    const bool first = k == kStart;
    if (first) {
        if (e >= 12)
            return std::nullopt;
        auto [s, d] = pair_of(e);
        cell = kStartCell;
        passenger = s;
        destination = d;
    } else {
        if (e < kOk)
            return std::nullopt;
        destination = static_cast<int>(k % 4);
        passenger = static_cast<int>(k / 4 % 5);
        cell = static_cast<int>(k / 20);
    }

    Event ev = Move;
    double reward = -1.0;
    bool done = false;
    const bool may_break = !first && a <= West && blocked(cell, a);
    if (!first && e == kBreak && !may_break)
        return std::nullopt;

    if (a <= West) {
        if (blocked(cell, a)) {
            ev = e == kBreak ? Broken : Wall;
            done = ev == Broken;
        } else {
            static constexpr int kStep[4] = {-kSize, kSize, 1, -1};
            cell += kStep[a];
        }
    } else if (a == Pickup) {
        if (passenger != kInTaxi && cell == kLocations[passenger]) {
            passenger = kInTaxi;
            ev = PickedUp;
        } else {
            ev = WrongPick;
            reward = -10.0;
        }
    } else {
        if (passenger == kInTaxi && cell == kLocations[destination]) {
            passenger = destination;
            ev = DroppedOff;
            reward = 20.0;
            done = true;
        } else {
            ev = WrongDrop;
            reward = -10.0;
        }
    }

    Here here = Nothing;
    if (passenger != kInTaxi && ev != DroppedOff && cell == kLocations[passenger])
        here = AtPassenger;
    else if (cell == kLocations[destination])
        here = AtDestination;
    const bool undesired = ev == Wall || ev == Broken || ev == WrongPick || ev == WrongDrop;
    return Outcome{encode(cell, passenger, destination), output(ev, cell, passenger == kInTaxi, here), reward, done,
                   undesired};
}

std::string Taxi::key_name(Key k) const
{
    if (k == kStart)
        return "start";
    const int destination = static_cast<int>(k % 4);
    const int passenger = static_cast<int>(k / 4 % 5);
    const int cell = static_cast<int>(k / 20);
    return "t" + std::to_string(cell / 5) + std::to_string(cell % 5) + "_" +
           (passenger == kInTaxi ? "in" : kLocationNames[passenger]) + "_" + kLocationNames[destination];
}

std::size_t Taxi::rl_state() const
{
    if (key_ == kStart) {
        auto [s, d] = pair_of(pending_pair_);
        return static_cast<std::size_t>(encode(kStartCell, s, d));
    }
    return static_cast<std::size_t>(key_);
}

EnvAction Taxi::sample_env(ContAction a, Rng& rng)
{
    if (key_ == kStart)
        return pending_pair_;
    const int cell = static_cast<int>(key_ / 20);
    if (a <= West && blocked(cell, a)) {
        double p = std::min(kBreakPerHit * (damage_ + 1), 1.0);
        if (std::bernoulli_distribution(p)(rng))
            return kBreak;
    }
    return kOk;
}

void Taxi::after_step(ContAction, EnvAction, const Outcome& o)
{
    const unsigned ev = o.output / 150;
    if (ev == Wall || ev == Broken)
        ++damage_;
}

SafetyAutomaton taxi_spec()
{
    return never_spec(out_alphabet(), [](const std::string& o) {
        return o.starts_with("wall_") || o.starts_with("broken_") || o.starts_with("wrongpick_") ||
               o.starts_with("wrongdrop_");
    });
}

} // namespace dynshield
