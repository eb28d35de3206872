#include "dynshield/mdp.hpp"

#include "dynshield/errors.hpp"

#include <cmath>
#include <map>
#include <string>

namespace dynshield {

EnvStrategy::EnvStrategy(std::size_t num_states, std::size_t num_cont)
    : num_cont_(num_cont), table_(num_states * num_cont)
{
}

void EnvStrategy::set(StateId s, ContAction c, Distribution d)
{
    if (s >= num_states() || c >= num_cont_)
        throw StrategyError("strategy index out of range");
    table_[s * num_cont_ + c] = std::move(d);
}

const EnvStrategy::Distribution& EnvStrategy::at(StateId s, ContAction c) const
{
    if (s >= num_states() || c >= num_cont_)
        throw StrategyError("strategy index out of range");
    return table_[s * num_cont_ + c];
}

Mdp induce_mdp(const Fsrs& m, const EnvStrategy& tau)
{
    if (tau.num_states() != m.num_states() || tau.num_cont() != m.cont().size())
        throw StrategyError("strategy shape does not match the machine");

    Mdp mdp{m.num_states(), m.initial(), m.cont(), m.out(), {}};
    mdp.transitions.resize(m.num_states() * m.cont().size());
    for (StateId s = 0; s < m.num_states(); ++s) {
        for (ContAction c = 0; c < m.cont().size(); ++c) {
            const auto& dist = tau.at(s, c);
            if (dist.empty())
                continue;
            std::map<std::pair<StateId, OutputSymbol>, double> mass;
            double total = 0.0;
            for (auto [e, p] : dist) {
                if (!m.env().contains(e))
                    throw StrategyError("strategy names unknown env action " + std::to_string(e));
                if (p < 0.0)
                    throw StrategyError("negative probability");
                if (p == 0.0)
                    continue;
                auto t = m.step(s, c, e);
                if (!t)
                    throw StrategyError("strategy support outside defined transitions at state '" +
                                        m.state_name(s) + "', cont '" + m.cont().name(c) + "', env '" +
                                        m.env().name(e) + "'");
                mass[{t->target, t->output}] += p;
                total += p;
            }
            if (std::abs(total - 1.0) > kProbabilityTolerance)
                throw StrategyError("distribution at state '" + m.state_name(s) + "', cont '" + m.cont().name(c) +
                                    "' sums to " + std::to_string(total));
            auto& outs = mdp.transitions[s * m.cont().size() + c];
            for (auto& [key, p] : mass)
                outs.push_back({key.first, key.second, p});
        }
    }
    return mdp;
}

} // namespace dynshield
