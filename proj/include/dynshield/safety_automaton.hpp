#pragma once

#include "dynshield/alphabet.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace dynshield {

/// Complete deterministic automaton over output symbols whose unsafe states
/// form an absorbing region. Its language (runs ending in a safe state) is
/// prefix-closed. All invariants are checked on construction.
class SafetyAutomaton {
public:
    SafetyAutomaton() = default;
    /// `next` is row-major: next[q * |sigma| + a]. Throws ValidationError when
    /// the table is not total, the unsafe region is not absorbing, or the
    /// initial state is unsafe.
    SafetyAutomaton(Alphabet sigma, std::vector<std::string> state_names, StateId initial, std::vector<bool> safe,
                    std::vector<StateId> next);

    [[nodiscard]] const Alphabet& sigma() const { return sigma_; }
    [[nodiscard]] std::size_t num_states() const { return names_.size(); }
    [[nodiscard]] StateId initial() const { return initial_; }
    [[nodiscard]] bool is_safe(StateId q) const { return safe_.at(q); }
    [[nodiscard]] const std::string& state_name(StateId q) const { return names_.at(q); }
    [[nodiscard]] const std::vector<std::string>& state_names() const { return names_; }

    /// Throws AlphabetError for an unknown state or symbol.
    [[nodiscard]] StateId next(StateId q, OutputSymbol a) const;
    [[nodiscard]] StateId run(std::span<const OutputSymbol> word) const;
    [[nodiscard]] bool accepts(std::span<const OutputSymbol> word) const { return is_safe(run(word)); }

    friend bool operator==(const SafetyAutomaton&, const SafetyAutomaton&) = default;

private:
    Alphabet sigma_;
    std::vector<std::string> names_;
    StateId initial_ = 0;
    std::vector<bool> safe_;
    std::vector<StateId> next_;
};

inline bool sa_accepts(const SafetyAutomaton& spec, std::span<const OutputSymbol> word)
{
    return spec.accepts(word);
}

/// The two-state specification "never emit a symbol in the bad set": states
/// `ok` (initial, safe) and `bad` (absorbing, unsafe).
SafetyAutomaton never_spec(Alphabet sigma, const std::function<bool(const std::string&)>& is_bad);

} // namespace dynshield
