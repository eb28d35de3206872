#pragma once

#include "dynshield/fsrs.hpp"

#include <utility>
#include <vector>

namespace dynshield {

inline constexpr double kProbabilityTolerance = 1e-9;

/// Memoryless environment strategy: (state, cont action) -> distribution over env actions.
class EnvStrategy {
public:
    using Distribution = std::vector<std::pair<EnvAction, double>>;

    EnvStrategy(std::size_t num_states, std::size_t num_cont);

    void set(StateId s, ContAction c, Distribution d);
    [[nodiscard]] const Distribution& at(StateId s, ContAction c) const;
    [[nodiscard]] std::size_t num_states() const { return num_cont_ == 0 ? 0 : table_.size() / num_cont_; }
    [[nodiscard]] std::size_t num_cont() const { return num_cont_; }

private:
    std::size_t num_cont_;
    std::vector<Distribution> table_;
};

struct Outcome {
    StateId state;
    OutputSymbol output;
    double probability;
};

/// Finite MDP whose transitions are distributions over (successor, output).
struct Mdp {
    std::size_t num_states = 0;
    StateId initial = 0;
    Alphabet cont;
    Alphabet out;
    /// Indexed by s * |cont| + c; empty when the pair is undefined.
    std::vector<std::vector<Outcome>> transitions;

    [[nodiscard]] const std::vector<Outcome>& outcomes(StateId s, ContAction c) const
    {
        return transitions.at(s * cont.size() + c);
    }
};

/// The canonical MDP of an FSRS under `tau`: the probability of (s', b) is the
/// mass tau puts on env actions leading to s' with output b. Outcomes are
/// sorted by (state, output). Throws StrategyError when tau's support leaves
/// the defined transitions or a distribution does not sum to one.
Mdp induce_mdp(const Fsrs& m, const EnvStrategy& tau);

} // namespace dynshield
