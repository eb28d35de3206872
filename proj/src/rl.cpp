#include "dynshield/rl.hpp"

#include "dynshield/errors.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

namespace dynshield {

QTable::QTable(std::size_t states, std::size_t actions, double init)
    : states_(states), actions_(actions), values_(states * actions, init)
{
    if (actions > kMaxContActions)
        throw AlphabetError("too many actions for a Q-table");
}

double QTable::max_over(std::size_t s, ActionSet allowed) const
{
    return at(s, argmax(s, allowed));
}

ContAction QTable::argmax(std::size_t s, ActionSet allowed) const
{
    if ((allowed & full_action_set(actions_)) == 0)
        throw UsageError("argmax over an empty action set");
    ContAction best = kNoSymbol;
    double best_v = 0.0;
    for (ContAction a = 0; a < actions_; ++a) {
        if (!has_action(allowed, a))
            continue;
        double v = values_[s * actions_ + a];
        if (best == kNoSymbol || v > best_v) {
            best = a;
            best_v = v;
        }
    }
    return best;
}

void QConfig::validate() const
{
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw ValidationError("alpha must be in (0, 1]");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw ValidationError("gamma must be in [0, 1)");
    for (double e : {epsilon_start, epsilon_end})
        if (!(e >= 0.0 && e <= 1.0))
            throw ValidationError("epsilon must be in [0, 1]");
    if (!(decay_fraction > 0.0 && decay_fraction <= 1.0))
        throw ValidationError("epsilon decay fraction must be in (0, 1]");
}

double QConfig::epsilon(std::size_t step, std::size_t total_steps) const
{
    double horizon = decay_fraction * static_cast<double>(total_steps);
    double t = horizon <= 0.0 ? 1.0 : std::min(1.0, static_cast<double>(step) / horizon);
    return epsilon_start + (epsilon_end - epsilon_start) * t;
}

void q_update(QTable& q, std::size_t s, ContAction a, double r, std::size_t s_next, ActionSet allowed_next,
              bool terminal, double alpha, double gamma)
{
    double target = r;
    if (!terminal)
        target += gamma * q.max_over(s_next, allowed_next);
    double& v = q.at(s, a);
    v += alpha * (target - v);
}

ContAction select_action(const QTable& q, std::size_t s, ActionSet allowed, double epsilon, Rng& rng)
{
    allowed &= full_action_set(q.num_actions());
    if (allowed == 0)
        throw UsageError("select_action with an empty allowed set");
    if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < epsilon) {
        auto list = action_list(allowed);
        return list[std::uniform_int_distribution<std::size_t>(0, list.size() - 1)(rng)];
    }
    return q.argmax(s, allowed);
}

EvalResult evaluate(const QTable& q, Environment& env, std::size_t episodes, Rng& rng,
                    const std::shared_ptr<const ShieldTables>& shield)
{
    EvalResult r;
    if (episodes == 0)
        return r;
    const ActionSet full = full_action_set(env.cont().size());
    std::size_t safe = 0;
    for (std::size_t i = 0; i < episodes; ++i) {
        std::size_t s = env.reset(rng);
        std::optional<PreemptiveShield> cursor;
        if (shield)
            cursor.emplace(shield);
        double total = 0.0;
        bool undesired = false;
        while (!env.done()) {
            ActionSet allowed = cursor ? cursor->allowed_actions() : full;
            ContAction a = q.argmax(s, allowed);
            EnvStep st = env.step(a, rng);
            if (cursor)
                cursor->advance(a, st.env_action, st.output);
            total += st.reward;
            undesired = undesired || st.undesired;
            s = st.rl_state;
        }
        r.mean_reward += total;
        if (!undesired)
            ++safe;
    }
    r.mean_reward /= static_cast<double>(episodes);
    r.safe_rate = static_cast<double>(safe) / static_cast<double>(episodes);
    return r;
}

const char* mode_name(Mode m)
{
    return m == Mode::Plain ? "plain" : "shielded";
}

Mode parse_mode(const std::string& s)
{
    if (s == "plain")
        return Mode::Plain;
    if (s == "shielded")
        return Mode::Shielded;
    throw ValidationError("unknown mode '" + s + "'");
}

void TrainConfig::validate() const
{
    q.validate();
    policy.validate();
    if (total_steps == 0)
        throw ValidationError("total steps must be positive");
    if (eval_interval == 0)
        throw ValidationError("eval interval must be positive");
}

Rng derive_rng(std::uint64_t seed, std::uint64_t stream)
{
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return Rng(seq);
}

Metrics train(Environment& env, Mode mode, const TrainConfig& config, std::uint64_t seed)
{
    config.validate();
    Rng env_rng = derive_rng(seed, 1);
    Rng agent_rng = derive_rng(seed, 2);
    auto eval_env = env.clone();

    Metrics m;
    QTable q(env.rl_state_count(), env.cont().size());
    const ActionSet full = full_action_set(env.cont().size());
    std::optional<DynamicShield> ds;
    if (mode == Mode::Shielded)
        ds.emplace(env.cont(), env.env(), env.spec(), config.policy, env.max_ep_len());

    std::size_t steps = 0;
    std::size_t next_eval = config.eval_interval;
    std::size_t eval_index = 0;

    while (steps < config.total_steps) {
        std::size_t s = env.reset(env_rng);
        if (ds)
            ds->on_episode_start();
        double total = 0.0;
        bool undesired = false;
        while (!env.done() && steps < config.total_steps) {
            ActionSet allowed = full;
            if (ds) {
                auto query = ds->current_allowed();
                allowed = query.actions;
                if (query.fallback)
                    ++m.fallback_queries;
            }
            ContAction a = select_action(q, s, allowed, config.q.epsilon(steps, config.total_steps), agent_rng);
            if (!has_action(allowed, a))
                ++m.containment_violations;
            EnvStep st = env.step(a, env_rng);
            ++steps;
            if (ds)
                ds->advance(a, st.env_action, st.output);
            const bool terminal = st.done && !st.truncated;
            ActionSet next_allowed = full;
            if (ds && config.masked_target && !terminal)
                next_allowed = ds->current_allowed().actions;
            q_update(q, s, a, st.reward, st.rl_state, next_allowed, terminal, config.q.alpha, config.q.gamma);
            total += st.reward;
            undesired = undesired || st.undesired;
            s = st.rl_state;
        }
        if (ds)
            ds->on_episode_end();

        ++m.episodes;
        if (undesired)
            ++m.undesired_episodes;
        MetricsRow row;
        row.seed = seed;
        row.episode = m.episodes;
        row.steps_cum = steps;
        row.reward = total;
        row.undesired = undesired;
        row.undesired_cum = m.undesired_episodes;
        if (ds) {
            row.shield_states = ds->snapshot()->tables->game.num_states();
            row.rebuild_count = ds->rebuild_count();
            row.rebuild_time_ms = ds->rebuild_ms_total();
        }
        if (steps >= next_eval || steps >= config.total_steps) {
            Rng eval_rng = derive_rng(seed, 1000 + eval_index++);
            std::shared_ptr<const ShieldTables> eval_shield;
            if (ds && config.shielded_eval)
                eval_shield = ds->snapshot()->tables;
            EvalResult r = evaluate(q, *eval_env, config.eval_episodes, eval_rng, eval_shield);
            row.eval_mean_reward = r.mean_reward;
            row.eval_safe_rate = r.safe_rate;
            if (!m.best || r.mean_reward > m.best->mean_reward) {
                m.best = r;
                m.best_q = q;
            }
            while (next_eval <= steps)
                next_eval += config.eval_interval;
        }
        m.rows.push_back(row);
    }
    if (ds) {
        m.rebuilds = ds->rebuild_count();
        m.final_snapshot = ds->snapshot();
        m.traces = ds->store().episodes();
    }
    return m;
}

namespace {

std::string format_double(double v)
{
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

} // namespace

void write_metrics_csv(std::ostream& os, const std::vector<MetricsRow>& rows)
{
    os << "seed,episode,steps_cum,reward,undesired_flag,undesired_cum,shield_states,rebuild_count,"
          "rebuild_time_ms,eval_mean_reward,eval_safe_rate\n";
    for (const auto& r : rows) {
        os << r.seed << ',' << r.episode << ',' << r.steps_cum << ',' << format_double(r.reward) << ','
           << (r.undesired ? 1 : 0) << ',' << r.undesired_cum << ',' << r.shield_states << ',' << r.rebuild_count
           << ',' << format_double(r.rebuild_time_ms) << ','
           << (r.eval_mean_reward ? format_double(*r.eval_mean_reward) : "") << ','
           << (r.eval_safe_rate ? format_double(*r.eval_safe_rate) : "") << '\n';
    }
}

std::vector<MetricsRow> read_metrics_csv(std::istream& is)
{
    std::vector<MetricsRow> rows;
    std::string line;
    std::size_t number = 0;
    auto fail = [&](const std::string& why) { throw ParseError(number, why); };
    if (!std::getline(is, line))
        throw ParseError(1, "empty metrics file");
    ++number;
    if (line.rfind("seed,episode,steps_cum", 0) != 0)
        fail("unexpected metrics header");
    while (std::getline(is, line)) {
        ++number;
        if (line.empty())
            continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');)
            f.push_back(cell);
        if (!line.empty() && line.back() == ',')
            f.emplace_back();
        if (f.size() != 11)
            fail("expected 11 fields");
        try {
            MetricsRow r;
            r.seed = std::stoull(f[0]);
            r.episode = std::stoull(f[1]);
            r.steps_cum = std::stoull(f[2]);
            r.reward = std::stod(f[3]);
            r.undesired = f[4] == "1";
            r.undesired_cum = std::stoull(f[5]);
            r.shield_states = std::stoull(f[6]);
            r.rebuild_count = std::stoull(f[7]);
            r.rebuild_time_ms = std::stod(f[8]);
            if (!f[9].empty())
                r.eval_mean_reward = std::stod(f[9]);
            if (!f[10].empty())
                r.eval_safe_rate = std::stod(f[10]);
            rows.push_back(r);
        } catch (const std::logic_error&) {
            fail("malformed number");
        }
    }
    return rows;
}

} // namespace dynshield
