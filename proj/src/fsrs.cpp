#include "dynshield/fsrs.hpp"

#include "dynshield/errors.hpp"

#include <set>

namespace dynshield {

namespace {

void check_names(const std::vector<std::string>& names)
{
    std::set<std::string_view> seen;
    for (const auto& n : names) {
        if (!is_valid_name(n))
            throw ValidationError("invalid state name '" + n + "'");
        if (!seen.insert(n).second)
            throw ValidationError("duplicate state '" + n + "'");
    }
}

std::vector<std::string> default_names(std::size_t n)
{
    std::vector<std::string> names;
    names.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        names.push_back("s" + std::to_string(i));
    return names;
}

} // namespace

Fsrs::Fsrs(Alphabet cont, Alphabet env, Alphabet out, std::vector<std::string> state_names, StateId initial)
    : cont_(std::move(cont)), env_(std::move(env)), out_(std::move(out)), names_(std::move(state_names))
{
    if (names_.empty())
        throw ValidationError("machine needs at least one state");
    check_names(names_);
    machine_ = MealyMachine(names_.size(), cont_.size() * env_.size(), out_.size(), initial);
}

Fsrs::Fsrs(Alphabet cont, Alphabet env, Alphabet out, MealyMachine machine, std::vector<std::string> state_names)
    : cont_(std::move(cont)), env_(std::move(env)), out_(std::move(out)), machine_(std::move(machine)),
      names_(std::move(state_names))
{
    if (machine_.num_inputs() != cont_.size() * env_.size() || machine_.num_outputs() != out_.size())
        throw AlphabetError("machine alphabet sizes do not match the declared alphabets");
    if (names_.empty())
        names_ = default_names(machine_.num_states());
    if (names_.size() != machine_.num_states())
        throw ValidationError("state name count does not match the machine");
    check_names(names_);
}

const std::string& Fsrs::state_name(StateId s) const
{
    if (s >= names_.size())
        throw AlphabetError("unknown state " + std::to_string(s));
    return names_[s];
}

std::optional<StateId> Fsrs::find_state(std::string_view name) const
{
    for (StateId s = 0; s < names_.size(); ++s) {
        if (names_[s] == name)
            return s;
    }
    return std::nullopt;
}

InputSymbol Fsrs::input(ContAction c, EnvAction e) const
{
    if (!cont_.contains(c))
        throw AlphabetError("unknown cont action " + std::to_string(c));
    if (!env_.contains(e))
        throw AlphabetError("unknown env action " + std::to_string(e));
    return static_cast<InputSymbol>(c * env_.size() + e);
}

StateId Fsrs::add_state(std::string name)
{
    if (!is_valid_name(name))
        throw ValidationError("invalid state name '" + name + "'");
    if (find_state(name))
        throw ValidationError("duplicate state '" + name + "'");
    names_.push_back(std::move(name));
    return machine_.add_state();
}

void Fsrs::set_transition(StateId from, ContAction c, EnvAction e, StateId to, OutputSymbol out)
{
    machine_.set_transition(from, input(c, e), to, out);
}

std::optional<Transition> Fsrs::step(StateId s, ContAction c, EnvAction e) const
{
    return machine_.step(s, input(c, e));
}

std::vector<ContTotalityViolation> validate_fsrs(const Fsrs& m)
{
    std::vector<ContTotalityViolation> violations;
    for (StateId s = 0; s < m.num_states(); ++s) {
        for (ContAction c = 0; c < m.cont().size(); ++c) {
            bool any = false;
            for (EnvAction e = 0; e < m.env().size() && !any; ++e)
                any = m.machine().cell(s, m.input(c, e)).target != kNoState;
            if (!any)
                violations.push_back({s, c});
        }
    }
    return violations;
}

bool abstracts(const Fsrs& candidate, const Fsrs& reference)
{
    if (candidate.cont() != reference.cont() || candidate.env() != reference.env() || candidate.out() != reference.out())
        throw AlphabetError("abstraction check needs identical alphabets");
    return abstracts(candidate.machine(), reference.machine());
}

} // namespace dynshield
