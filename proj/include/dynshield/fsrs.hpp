#pragma once

#include "dynshield/alphabet.hpp"
#include "dynshield/mealy.hpp"

#include <optional>
#include <string>
#include <vector>

namespace dynshield {

/// A finite-state reactive system: a Mealy machine whose input alphabet is
/// the product of the controller's and the environment's actions. The pair
/// (c, e) is encoded as input symbol c * |env| + e, so input order is the
/// lexicographic order on (cont, env).
class Fsrs {
public:
    Fsrs() = default;
    /// `state_names` must be non-empty, unique and valid names.
    Fsrs(Alphabet cont, Alphabet env, Alphabet out, std::vector<std::string> state_names, StateId initial = 0);
    /// Wraps an already-built machine; its alphabet sizes must agree.
    Fsrs(Alphabet cont, Alphabet env, Alphabet out, MealyMachine machine, std::vector<std::string> state_names = {});

    [[nodiscard]] const Alphabet& cont() const { return cont_; }
    [[nodiscard]] const Alphabet& env() const { return env_; }
    [[nodiscard]] const Alphabet& out() const { return out_; }
    [[nodiscard]] const MealyMachine& machine() const { return machine_; }
    [[nodiscard]] std::size_t num_states() const { return machine_.num_states(); }
    [[nodiscard]] StateId initial() const { return machine_.initial(); }

    [[nodiscard]] const std::string& state_name(StateId s) const;
    [[nodiscard]] std::optional<StateId> find_state(std::string_view name) const;
    [[nodiscard]] const std::vector<std::string>& state_names() const { return names_; }

    [[nodiscard]] InputSymbol input(ContAction c, EnvAction e) const;
    [[nodiscard]] ContAction cont_of(InputSymbol in) const { return static_cast<ContAction>(in / env_.size()); }
    [[nodiscard]] EnvAction env_of(InputSymbol in) const { return static_cast<EnvAction>(in % env_.size()); }

    StateId add_state(std::string name);
    void set_transition(StateId from, ContAction c, EnvAction e, StateId to, OutputSymbol out);
    [[nodiscard]] std::optional<Transition> step(StateId s, ContAction c, EnvAction e) const;

    friend bool operator==(const Fsrs&, const Fsrs&) = default;

private:
    Alphabet cont_;
    Alphabet env_;
    Alphabet out_;
    MealyMachine machine_;
    std::vector<std::string> names_;
};

struct ContTotalityViolation {
    StateId state;
    ContAction cont;

    friend bool operator==(const ContTotalityViolation&, const ContTotalityViolation&) = default;
};

/// Lists every (state, cont action) for which no environment action is
/// defined. Empty iff the machine is Cont-total.
std::vector<ContTotalityViolation> validate_fsrs(const Fsrs& m);

/// Abstraction between FSRSs; throws AlphabetError unless all three alphabets match by name.
bool abstracts(const Fsrs& candidate, const Fsrs& reference);

} // namespace dynshield
