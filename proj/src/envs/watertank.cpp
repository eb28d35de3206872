#include "dynshield/envs/watertank.hpp"

#include "dynshield/errors.hpp"

#include <algorithm>

namespace dynshield {

namespace {

Alphabet env_alphabet()
{
    return Alphabet({"n0m0", "n0m1", "n1m0", "n1m1", "n2m0", "n2m1"});
}

Alphabet out_alphabet()
{
    std::vector<std::string> v;
    for (const char* a : {"open", "close"})
        for (const char* s : {"low", "safe", "high"})
            for (const char* f : {"ok", "viol"})
                v.push_back(std::string(a) + "_" + s + "_" + f);
    return Alphabet(std::move(v));
}

WaterTank::Status status_of(int level)
{
    if (level <= 0)
        return WaterTank::Low;
    if (level >= WaterTank::kCapacity)
        return WaterTank::High;
    return WaterTank::Safe;
}

bool legal(ContAction a, int inflow)
{
    return a == WaterTank::Open ? inflow >= 1 : inflow == 0;
}

} // namespace

WaterTank::WaterTank() : Environment(Alphabet({"open", "close"}), env_alphabet(), out_alphabet()) {}

Environment::Key WaterTank::encode(int level, bool open, int since)
{
    return static_cast<Key>(level * 2 * kMinHold + (open ? kMinHold : 0) + (since - 1));
}

SafetyAutomaton WaterTank::spec() const
{
    return watertank_spec();
}

std::size_t WaterTank::reset(Rng&)
{
    begin(start_key());
    return rl_state();
}

std::optional<Environment::Outcome> WaterTank::apply(Key k, ContAction a, EnvAction e) const
{
    const int inflow = static_cast<int>(e / 2);
    const int outflow = static_cast<int>(e % 2);
    if (!legal(a, inflow))
        return std::nullopt;
    const int level = std::clamp(level_of(k) + inflow - outflow, 0, kCapacity);
    const bool want_open = a == Open;
    bool violation = false;
    int since = std::min(since_of(k) + 1, kMinHold);
    if (want_open != open_of(k)) {
        violation = since_of(k) < kMinHold;
        since = 1;
    }
    const Status s = status_of(level);
    const bool undesired = s != Safe || violation;
    return Outcome{encode(level, want_open, since), output(a, s, violation), undesired ? -100.0 : 1.0, undesired,
                   undesired};
}

std::string WaterTank::key_name(Key k) const
{
    return "l" + std::to_string(level_of(k)) + (open_of(k) ? "o" : "c") + std::to_string(since_of(k));
}

EnvAction WaterTank::sample_env(ContAction a, Rng& rng)
{
    std::uniform_int_distribution<int> coin(0, 1);
    int inflow = a == Open ? 1 + coin(rng) : 0;
    int outflow = coin(rng);
    return env_action(inflow, outflow);
}

SafetyAutomaton watertank_spec()
{
    return never_spec(out_alphabet(), [](const std::string& o) {
        return o.find("_low_") != std::string::npos || o.find("_high_") != std::string::npos ||
               o.ends_with("_viol");
    });
}

Fsrs watertank_level_model()
{
    std::vector<std::string> names;
    for (int l = 0; l <= WaterTank::kCapacity; ++l)
        names.push_back("l" + std::to_string(l));
    Fsrs m(Alphabet({"open", "close"}), env_alphabet(), Alphabet({"low", "safe", "high"}), names, WaterTank::kStartLevel);
    for (int l = 0; l <= WaterTank::kCapacity; ++l) {
        for (ContAction a : {WaterTank::Open, WaterTank::Close}) {
            for (int n = 0; n <= 2; ++n) {
                if (!legal(a, n))
                    continue;
                for (int o = 0; o <= 1; ++o) {
                    int next = std::clamp(l + n - o, 0, WaterTank::kCapacity);
                    m.set_transition(static_cast<StateId>(l), a, WaterTank::env_action(n, o),
                                     static_cast<StateId>(next), status_of(next));
                }
            }
        }
    }
    return m;
}

EnvStrategy watertank_level_strategy()
{
    EnvStrategy tau(WaterTank::kCapacity + 1, 2);
    for (StateId l = 0; l <= WaterTank::kCapacity; ++l) {
        tau.set(l, WaterTank::Open,
                {{WaterTank::env_action(1, 0), 0.25},
                 {WaterTank::env_action(1, 1), 0.25},
                 {WaterTank::env_action(2, 0), 0.25},
                 {WaterTank::env_action(2, 1), 0.25}});
        tau.set(l, WaterTank::Close, {{WaterTank::env_action(0, 0), 0.5}, {WaterTank::env_action(0, 1), 0.5}});
    }
    return tau;
}

} // namespace dynshield
