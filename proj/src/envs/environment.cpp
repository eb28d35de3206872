#include "dynshield/envs/environment.hpp"

#include "dynshield/envs/cliffwalk.hpp"
#include "dynshield/envs/gridworld.hpp"
#include "dynshield/envs/taxi.hpp"
#include "dynshield/envs/watertank.hpp"
#include "dynshield/errors.hpp"

#include <unordered_map>

namespace dynshield {

EnvStep Environment::step(ContAction a, Rng& rng)
{
    if (!cont_.contains(a))
        throw AlphabetError("unknown cont action " + std::to_string(a));
    if (done_)
        throw UsageError("step after the episode ended");
    EnvAction e = sample_env(a, rng);
    auto r = step_with(a, e);
    if (!r)
        throw std::logic_error(name() + ": sampled an impossible env action");
    return *r;
}

std::optional<EnvStep> Environment::step_with(ContAction a, EnvAction e)
{
    if (!cont_.contains(a) || !env_.contains(e))
        throw AlphabetError("action out of range");
    if (done_)
        throw UsageError("step after the episode ended");
    auto o = apply(key_, a, e);
    if (!o)
        return std::nullopt;
    key_ = o->next;
    ++steps_;
    done_ = o->done || steps_ >= max_ep_len();
    after_step(a, e, *o);
    return EnvStep{e, o->output, o->reward, done_, done_ && !o->done, o->undesired, rl_state()};
}

Fsrs ground_truth(const Environment& env)
{
    const std::size_t nc = env.cont().size();
    const std::size_t ne = env.env().size();
    std::unordered_map<Environment::Key, StateId> ids;
    std::vector<Environment::Key> keys{env.start_key()};
    ids.emplace(env.start_key(), 0);
    struct Edge {
        StateId from;
        ContAction c;
        EnvAction e;
        Environment::Key to;
        bool done;
        OutputSymbol out;
    };
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        for (ContAction c = 0; c < nc; ++c) {
            for (EnvAction e = 0; e < ne; ++e) {
                auto o = env.apply(keys[i], c, e);
                if (!o)
                    continue;
                edges.push_back({static_cast<StateId>(i), c, e, o->next, o->done, o->output});
                if (!o->done && ids.emplace(o->next, static_cast<StateId>(keys.size())).second)
                    keys.push_back(o->next);
            }
        }
    }
    std::vector<std::string> names;
    names.reserve(keys.size() + 1);
    for (auto k : keys)
        names.push_back(env.key_name(k));
    const auto done_state = static_cast<StateId>(names.size());
    bool any_done = false;
    for (const auto& e : edges)
        any_done = any_done || e.done;
    if (any_done)
        names.push_back("done");
    Fsrs m(env.cont(), env.env(), env.out(), std::move(names), 0);
    for (const auto& e : edges)
        m.set_transition(e.from, e.c, e.e, e.done ? done_state : ids.at(e.to), e.out);
    return m;
}

std::unique_ptr<Environment> make_environment(const std::string& name)
{
    if (name == "watertank")
        return std::make_unique<WaterTank>();
    if (name == "gridworld")
        return std::make_unique<GridWorld>();
    if (name == "cliffwalk")
        return std::make_unique<CliffWalk>();
    if (name == "taxi")
        return std::make_unique<Taxi>();
    throw ValidationError("unknown environment '" + name + "'");
}

} // namespace dynshield
