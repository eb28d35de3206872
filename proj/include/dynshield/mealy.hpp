#pragma once

#include "dynshield/alphabet.hpp"

#include <optional>
#include <span>
#include <vector>

namespace dynshield {

using Word = std::vector<InputSymbol>;

struct Transition {
    StateId target = kNoState;
    OutputSymbol output = kNoSymbol;

    friend bool operator==(const Transition&, const Transition&) = default;
};

struct RunResult {
    StateId state = kNoState;
    std::optional<OutputSymbol> last_output; // empty for the empty word

    friend bool operator==(const RunResult&, const RunResult&) = default;
};

/// Deterministic Mealy machine with a partial transition function over dense
/// state and symbol indices. A transition and its output are stored as one
/// cell, so "target defined" and "output defined" cannot disagree.
class MealyMachine {
public:
    MealyMachine() = default;
    MealyMachine(std::size_t num_states, std::size_t num_inputs, std::size_t num_outputs, StateId initial = 0);

    [[nodiscard]] std::size_t num_states() const { return num_inputs_ == 0 ? 0 : cells_.size() / num_inputs_; }
    [[nodiscard]] std::size_t num_inputs() const { return num_inputs_; }
    [[nodiscard]] std::size_t num_outputs() const { return num_outputs_; }
    [[nodiscard]] StateId initial() const { return initial_; }
    [[nodiscard]] std::size_t num_transitions() const;

    StateId add_state();

    /// Throws ValidationError("nondeterministic transition") if (from, input) is already defined.
    void set_transition(StateId from, InputSymbol input, StateId to, OutputSymbol output);

    /// Throws AlphabetError when `s` or `a` is out of range; an in-range but
    /// undefined pair yields std::nullopt.
    [[nodiscard]] std::optional<Transition> step(StateId s, InputSymbol a) const;
    [[nodiscard]] bool defined(StateId s, InputSymbol a) const { return step(s, a).has_value(); }

    [[nodiscard]] std::optional<RunResult> run(std::span<const InputSymbol> word) const;
    [[nodiscard]] std::optional<RunResult> run_from(StateId s, std::span<const InputSymbol> word) const;

    /// Unchecked cell access for hot loops; `s` and `a` must be in range.
    [[nodiscard]] const Transition& cell(StateId s, InputSymbol a) const { return cells_[s * num_inputs_ + a]; }

    friend bool operator==(const MealyMachine&, const MealyMachine&) = default;

private:
    void check(StateId s, InputSymbol a) const;

    std::size_t num_inputs_ = 0;
    std::size_t num_outputs_ = 0;
    StateId initial_ = 0;
    std::vector<Transition> cells_;
};

/// True iff every word defined in `reference` is defined in `candidate` with
/// the same output. Decided by BFS over reachable state pairs.
/// Throws AlphabetError if the alphabet sizes differ.
bool abstracts(const MealyMachine& candidate, const MealyMachine& reference);

/// True iff the two machines are equal up to a renaming of reachable states.
bool isomorphic(const MealyMachine& a, const MealyMachine& b);

} // namespace dynshield
