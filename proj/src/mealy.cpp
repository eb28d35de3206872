#include "dynshield/mealy.hpp"

#include "dynshield/errors.hpp"

#include <deque>
#include <string>
#include <unordered_map>

namespace dynshield {

MealyMachine::MealyMachine(std::size_t num_states, std::size_t num_inputs, std::size_t num_outputs, StateId initial)
    : num_inputs_(num_inputs), num_outputs_(num_outputs), initial_(initial), cells_(num_states * num_inputs)
{
    if (num_inputs == 0 || num_outputs == 0)
        throw AlphabetError("machine alphabets must not be empty");
    if (initial >= num_states)
        throw ValidationError("initial state out of range");
}

std::size_t MealyMachine::num_transitions() const
{
    std::size_t n = 0;
    for (const auto& c : cells_)
        n += c.target != kNoState;
    return n;
}

StateId MealyMachine::add_state()
{
    auto id = static_cast<StateId>(num_states());
    cells_.resize(cells_.size() + num_inputs_);
    return id;
}

void MealyMachine::check(StateId s, InputSymbol a) const
{
    if (s >= num_states())
        throw AlphabetError("unknown state " + std::to_string(s));
    if (a >= num_inputs_)
        throw AlphabetError("unknown input symbol " + std::to_string(a));
}

void MealyMachine::set_transition(StateId from, InputSymbol input, StateId to, OutputSymbol output)
{
    check(from, input);
    if (to >= num_states())
        throw AlphabetError("unknown target state " + std::to_string(to));
    if (output >= num_outputs_)
        throw AlphabetError("unknown output symbol " + std::to_string(output));
    auto& c = cells_[from * num_inputs_ + input];
    if (c.target != kNoState)
        throw ValidationError("nondeterministic transition");
    c = {to, output};
}

std::optional<Transition> MealyMachine::step(StateId s, InputSymbol a) const
{
    check(s, a);
    const auto& c = cell(s, a);
    if (c.target == kNoState)
        return std::nullopt;
    return c;
}

std::optional<RunResult> MealyMachine::run_from(StateId s, std::span<const InputSymbol> word) const
{
    if (s >= num_states())
        throw AlphabetError("unknown state " + std::to_string(s));
    RunResult r{s, std::nullopt};
    for (InputSymbol a : word) {
        auto t = step(r.state, a);
        if (!t)
            return std::nullopt;
        r = {t->target, t->output};
    }
    return r;
}

std::optional<RunResult> MealyMachine::run(std::span<const InputSymbol> word) const
{
    return run_from(initial_, word);
}

bool abstracts(const MealyMachine& candidate, const MealyMachine& reference)
{
    if (candidate.num_inputs() != reference.num_inputs() || candidate.num_outputs() != reference.num_outputs())
        throw AlphabetError("abstraction check needs identical alphabets");
    const std::size_t k = reference.num_inputs();
    auto key = [&](StateId r, StateId c) { return static_cast<std::uint64_t>(r) << 32 | c; };

    std::unordered_map<std::uint64_t, bool> seen;
    std::deque<std::pair<StateId, StateId>> queue{{reference.initial(), candidate.initial()}};
    seen[key(reference.initial(), candidate.initial())] = true;
    while (!queue.empty()) {
        auto [r, c] = queue.front();
        queue.pop_front();
        for (InputSymbol a = 0; a < k; ++a) {
            const auto& rt = reference.cell(r, a);
            if (rt.target == kNoState)
                continue;
            const auto& ct = candidate.cell(c, a);
            if (ct.target == kNoState || ct.output != rt.output)
                return false;
            if (seen.emplace(key(rt.target, ct.target), true).second)
                queue.emplace_back(rt.target, ct.target);
        }
    }
    return true;
}

bool isomorphic(const MealyMachine& a, const MealyMachine& b)
{
    if (a.num_inputs() != b.num_inputs())
        return false;
    std::vector<StateId> a_to_b(a.num_states(), kNoState);
    std::vector<StateId> b_to_a(b.num_states(), kNoState);
    std::deque<StateId> queue{a.initial()};
    a_to_b[a.initial()] = b.initial();
    b_to_a[b.initial()] = a.initial();
    std::size_t reached_a = 1;
    while (!queue.empty()) {
        StateId s = queue.front();
        queue.pop_front();
        StateId t = a_to_b[s];
        for (InputSymbol x = 0; x < a.num_inputs(); ++x) {
            const auto& ca = a.cell(s, x);
            const auto& cb = b.cell(t, x);
            if ((ca.target == kNoState) != (cb.target == kNoState))
                return false;
            if (ca.target == kNoState)
                continue;
            if (ca.output != cb.output)
                return false;
            if (a_to_b[ca.target] == kNoState && b_to_a[cb.target] == kNoState) {
                a_to_b[ca.target] = cb.target;
                b_to_a[cb.target] = ca.target;
                ++reached_a;
                queue.push_back(ca.target);
            } else if (a_to_b[ca.target] != cb.target || b_to_a[cb.target] != ca.target) {
                return false;
            }
        }
    }
    // Reachable parts must match exactly; count reachable states of b.
    std::vector<bool> seen(b.num_states(), false);
    std::deque<StateId> qb{b.initial()};
    seen[b.initial()] = true;
    std::size_t reached_b = 1;
    while (!qb.empty()) {
        StateId s = qb.front();
        qb.pop_front();
        for (InputSymbol x = 0; x < b.num_inputs(); ++x) {
            const auto& c = b.cell(s, x);
            if (c.target != kNoState && !seen[c.target]) {
                seen[c.target] = true;
                ++reached_b;
                qb.push_back(c.target);
            }
        }
    }
    return reached_a == reached_b;
}

} // namespace dynshield
