#include "dynshield/dynamic.hpp"

#include "dynshield/errors.hpp"

#include <chrono>
#include <string>

namespace dynshield {

TraceStore::TraceStore(Alphabet cont, Alphabet env, Alphabet out, std::size_t max_ep_len, std::size_t min_depth_cap)
    : cont_(std::move(cont)), env_(std::move(env)), out_(std::move(out)),
      samples_(cont_.size() * env_.size(), out_.size())
{
    if (max_ep_len == 0)
        throw UsageError("max episode length must be positive");
    log_.max_ep_len = max_ep_len;
    log_.min_depth_max = min_depth_cap;
}

void TraceStore::begin_episode()
{
    if (open_)
        throw UsageError("episode already open");
    open_ = true;
    current_.clear();
}

void TraceStore::record_step(ContAction c, EnvAction e, OutputSymbol out)
{
    if (!open_)
        throw UsageError("record_step without an open episode");
    if (current_.size() >= log_.max_ep_len)
        throw UsageError("episode longer than " + std::to_string(log_.max_ep_len) + " steps");
    if (!cont_.contains(c) || !env_.contains(e) || !out_.contains(out))
        throw AlphabetError("trace step symbol out of range");
    current_.push_back({c, e, out});
}

void TraceStore::end_episode()
{
    if (!open_)
        throw UsageError("end_episode without an open episode");
    open_ = false;
    if (current_.empty())
        return;
    Word inputs;
    std::vector<OutputSymbol> outputs;
    inputs.reserve(current_.size());
    outputs.reserve(current_.size());
    for (const auto& s : current_) {
        inputs.push_back(static_cast<InputSymbol>(s.cont * env_.size() + s.env));
        outputs.push_back(s.out);
    }
    samples_.add_trace(inputs, outputs);
    log_.add(current_.size());
    total_steps_ += current_.size();
    episodes_.push_back(std::move(current_));
    current_.clear();
}

void RebuildPolicy::validate() const
{
    if (min_new_steps == 0)
        throw ValidationError("min_new_steps must be at least 1");
}

ShieldSnapshot rebuild(const TraceStore& store, const SafetyAutomaton& spec)
{
    auto t0 = std::chrono::steady_clock::now();
    ShieldSnapshot s;
    s.min_depth = adaptive_min_depth(store.run_log());
    s.model = learn_fsrs(store.samples(), s.min_depth, store.cont(), store.env(), store.out());
    s.tables = build_shield(s.model, spec).tables_ptr();
    s.sample_size = store.samples().size();
    s.model_states = s.model.num_states();
    s.build_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    return s;
}

ShieldSnapshot initial_snapshot(const Alphabet& cont, const Alphabet& env, const SafetyAutomaton& spec)
{
    ShieldSnapshot s;
    s.model = Fsrs(cont, env, spec.sigma(), std::vector<std::string>{"m0"}, 0);
    s.tables = build_shield(s.model, spec).tables_ptr();
    s.model_states = 1;
    return s;
}

std::optional<ShieldSnapshot> maybe_rebuild(TraceStore& store, const RebuildPolicy& policy,
                                            const SafetyAutomaton& spec)
{
    if (store.episode_open())
        throw UsageError("maybe_rebuild called inside an episode");
    bool due = store.steps_since_build() >= policy.min_new_steps;
    if (!due && policy.rebuild_on_undesired && !store.episodes().empty() && store.steps_since_build() > 0) {
        StateId q = spec.initial();
        for (const auto& s : store.episodes().back())
            q = spec.next(q, s.out);
        due = !spec.is_safe(q);
    }
    if (!due)
        return std::nullopt;
    store.mark_built();
    return rebuild(store, spec);
}

DynamicShield::DynamicShield(Alphabet cont, Alphabet env, SafetyAutomaton spec, RebuildPolicy policy,
                             std::size_t max_ep_len)
    : spec_(std::move(spec)), policy_(policy), store_(cont, env, spec_.sigma(), max_ep_len, policy.min_depth_cap)
{
    policy_.validate();
    publish(initial_snapshot(cont, env, spec_));
    cursor_ = PreemptiveShield(snapshot()->tables);
}

void DynamicShield::on_episode_start()
{
    store_.begin_episode();
    cursor_ = PreemptiveShield(snapshot()->tables);
}

void DynamicShield::advance(ContAction c, EnvAction e, OutputSymbol out)
{
    store_.record_step(c, e, out);
    cursor_.advance(c, e, out);
}

bool DynamicShield::on_episode_end()
{
    store_.end_episode();
    auto s = maybe_rebuild(store_, policy_, spec_);
    if (!s)
        return false;
    ++rebuilds_;
    rebuild_ms_ += s->build_ms;
    publish(std::move(*s));
    return true;
}

std::shared_ptr<const ShieldSnapshot> DynamicShield::snapshot() const
{
    std::lock_guard lock(mutex_);
    return snapshot_;
}

void DynamicShield::publish(ShieldSnapshot s)
{
    auto p = std::make_shared<const ShieldSnapshot>(std::move(s));
    std::lock_guard lock(mutex_);
    snapshot_ = std::move(p);
}

} // namespace dynshield
