#include "dynshield/safety_automaton.hpp"

#include "dynshield/errors.hpp"

#include <set>

namespace dynshield {

SafetyAutomaton::SafetyAutomaton(Alphabet sigma, std::vector<std::string> state_names, StateId initial,
                                 std::vector<bool> safe, std::vector<StateId> next)
    : sigma_(std::move(sigma)), names_(std::move(state_names)), initial_(initial), safe_(std::move(safe)),
      next_(std::move(next))
{
    const std::size_t n = names_.size();
    if (n == 0)
        throw ValidationError("safety automaton needs at least one state");
    std::set<std::string_view> seen;
    for (const auto& name : names_) {
        if (!is_valid_name(name) || !seen.insert(name).second)
            throw ValidationError("invalid or duplicate state '" + name + "'");
    }
    if (safe_.size() != n)
        throw ValidationError("safe-set size does not match state count");
    if (initial_ >= n)
        throw ValidationError("initial state out of range");
    if (next_.size() != n * sigma_.size())
        throw ValidationError("transition map not total");
    for (StateId q = 0; q < n; ++q) {
        for (OutputSymbol a = 0; a < sigma_.size(); ++a) {
            StateId t = next_[q * sigma_.size() + a];
            if (t == kNoState)
                throw ValidationError("transition map not total: state '" + names_[q] + "', symbol '" +
                                      sigma_.name(a) + "'");
            if (t >= n)
                throw ValidationError("transition target out of range");
            if (!safe_[q] && safe_[t])
                throw ValidationError("unsafe region not absorbing: '" + names_[q] + "' --" + sigma_.name(a) +
                                      "--> '" + names_[t] + "'");
        }
    }
    if (!safe_[initial_])
        throw ValidationError("initial state is unsafe");
}

StateId SafetyAutomaton::next(StateId q, OutputSymbol a) const
{
    if (q >= num_states())
        throw AlphabetError("unknown spec state " + std::to_string(q));
    if (!sigma_.contains(a))
        throw AlphabetError("unknown output symbol " + std::to_string(a));
    return next_[q * sigma_.size() + a];
}

StateId SafetyAutomaton::run(std::span<const OutputSymbol> word) const
{
    StateId q = initial_;
    for (OutputSymbol a : word)
        q = next(q, a);
    return q;
}

SafetyAutomaton never_spec(Alphabet sigma, const std::function<bool(const std::string&)>& is_bad)
{
    const std::size_t k = sigma.size();
    std::vector<StateId> next(2 * k);
    for (OutputSymbol a = 0; a < k; ++a) {
        next[a] = is_bad(sigma.name(a)) ? 1 : 0;
        next[k + a] = 1;
    }
    return SafetyAutomaton(std::move(sigma), {"ok", "bad"}, 0, {true, false}, std::move(next));
}

} // namespace dynshield
