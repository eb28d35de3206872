#pragma once

#include "dynshield/alphabet.hpp"
#include "dynshield/fsrs.hpp"
#include "dynshield/safety_automaton.hpp"

#include <string>
#include <vector>

namespace dynshield {

/// Product of a learned model and a safety automaton. Moves the model does
/// not define lead to the sink, which is safe and absorbing.
class SafetyGame {
public:
    struct State {
        StateId model; // kNoState for the sink
        StateId spec;

        friend bool operator==(const State&, const State&) = default;
    };

    SafetyGame() = default;
    /// `succ` and `predicted` are row-major over (state, cont * |env| + env).
    /// `predicted` holds kNoSymbol where the move is routed to the sink.
    /// Throws ValidationError on inconsistent tables.
    SafetyGame(Alphabet cont, Alphabet env, std::vector<State> states, std::vector<std::string> names,
               std::vector<bool> safe, std::vector<StateId> succ, std::vector<OutputSymbol> predicted,
               StateId initial = 0);

    [[nodiscard]] const Alphabet& cont() const { return cont_; }
    [[nodiscard]] const Alphabet& env() const { return env_; }
    [[nodiscard]] std::size_t num_states() const { return states_.size(); }
    [[nodiscard]] std::size_t num_cont() const { return cont_.size(); }
    [[nodiscard]] std::size_t num_env() const { return env_.size(); }
    [[nodiscard]] StateId initial() const { return initial_; }

    [[nodiscard]] const State& state(StateId g) const { return states_.at(g); }
    [[nodiscard]] const std::string& state_name(StateId g) const { return names_.at(g); }
    [[nodiscard]] const std::vector<std::string>& state_names() const { return names_; }
    [[nodiscard]] bool is_sink(StateId g) const { return states_.at(g).model == kNoState; }
    [[nodiscard]] bool is_safe(StateId g) const { return safe_[g] != 0; }

    [[nodiscard]] StateId succ(StateId g, ContAction c, EnvAction e) const { return succ_[index(g, c, e)]; }
    [[nodiscard]] OutputSymbol predicted(StateId g, ContAction c, EnvAction e) const
    {
        return predicted_[index(g, c, e)];
    }
    [[nodiscard]] const std::vector<StateId>& succ_table() const { return succ_; }

    friend bool operator==(const SafetyGame&, const SafetyGame&) = default;

private:
    [[nodiscard]] std::size_t index(StateId g, ContAction c, EnvAction e) const
    {
        return (static_cast<std::size_t>(g) * cont_.size() + c) * env_.size() + e;
    }

    Alphabet cont_;
    Alphabet env_;
    std::vector<State> states_;
    std::vector<std::string> names_;
    std::vector<char> safe_;
    std::vector<StateId> succ_;
    std::vector<OutputSymbol> predicted_;
    StateId initial_ = 0;
};

/// Materializes the product states reachable from (model initial, spec
/// initial) in breadth-first order. Throws AlphabetError unless the spec
/// alphabet equals the model's output alphabet.
SafetyGame compose(const Fsrs& model, const SafetyAutomaton& spec);

class WinningRegion {
public:
    WinningRegion() = default;
    explicit WinningRegion(std::vector<char> members);

    [[nodiscard]] bool contains(StateId g) const { return g < members_.size() && members_[g] != 0; }
    [[nodiscard]] std::size_t size() const { return count_; }
    [[nodiscard]] const std::vector<char>& members() const { return members_; }

    friend bool operator==(const WinningRegion& a, const WinningRegion& b) { return a.members_ == b.members_; }

private:
    std::vector<char> members_;
    std::size_t count_ = 0;
};

/// Greatest fixpoint of X -> { g safe | exists c, forall e: succ(g, c, e) in X }.
/// Parallel Jacobi sweeps over the whole state space.
WinningRegion winning_region(const SafetyGame& game);

/// Same fixpoint via a backward worklist with per-state counters of
/// still-good actions; linear in the number of moves.
WinningRegion winning_region_serial(const SafetyGame& game);

/// One node per game state (losing states double-circled when `win` is given),
/// one edge per move labeled cont/env.
std::string to_dot(const SafetyGame& game, const WinningRegion* win = nullptr);

} // namespace dynshield
