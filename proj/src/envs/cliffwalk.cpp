#include "dynshield/envs/cliffwalk.hpp"

namespace dynshield {

namespace {

constexpr int kDr[] = {-1, 1, 0, 0};
constexpr int kDc[] = {0, 0, 1, -1};

Alphabet out_alphabet()
{
    return Alphabet({"safe", "cliff", "goal"});
}

} // namespace

CliffWalk::CliffWalk() : Environment(Alphabet({"N", "S", "E", "W"}), Alphabet({"tick"}), out_alphabet()) {}

SafetyAutomaton CliffWalk::spec() const
{
    return cliffwalk_spec();
}

std::size_t CliffWalk::reset(Rng&)
{
    begin(start_key());
    return rl_state();
}

std::optional<Environment::Outcome> CliffWalk::apply(Key k, ContAction a, EnvAction e) const
{
    if (e != 0)
        return std::nullopt;
    int r = static_cast<int>(k) / kCols;
    int c = static_cast<int>(k) % kCols;
    int nr = r + kDr[a];
    int nc = c + kDc[a];
    if (nr < 0 || nr >= kRows || nc < 0 || nc >= kCols) {
        nr = r;
        nc = c;
    }
    const Key next = static_cast<Key>(nr * kCols + nc);
    if (is_cliff(nr, nc))
        return Outcome{next, Cliff, -100.0, true, true};
    if (nr == kRows - 1 && nc == kCols - 1)
        return Outcome{next, Goal, 0.0, true, false};
    return Outcome{next, Safe, -1.0, false, false};
}

std::string CliffWalk::key_name(Key k) const
{
    return "c" + std::to_string(k / kCols) + "_" + std::to_string(k % kCols);
}

SafetyAutomaton cliffwalk_spec()
{
    return never_spec(out_alphabet(), [](const std::string& o) { return o == "cliff"; });
}

} // namespace dynshield
