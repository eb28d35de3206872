#include "dynshield/envs/cliffwalk.hpp"
#include "dynshield/envs/watertank.hpp"
#include "dynshield/errors.hpp"
#include "dynshield/rl.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace dynshield;

namespace {

// rebuild_time_ms is wall-clock, so it is only compared on request.
void check_same_rows(const std::vector<MetricsRow>& a, const std::vector<MetricsRow>& b, bool with_time)
{
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].seed == b[i].seed);
        CHECK(a[i].episode == b[i].episode);
        CHECK(a[i].steps_cum == b[i].steps_cum);
        CHECK(a[i].reward == b[i].reward);
        CHECK(a[i].undesired == b[i].undesired);
        CHECK(a[i].undesired_cum == b[i].undesired_cum);
        CHECK(a[i].shield_states == b[i].shield_states);
        CHECK(a[i].rebuild_count == b[i].rebuild_count);
        CHECK(a[i].eval_mean_reward == b[i].eval_mean_reward);
        CHECK(a[i].eval_safe_rate == b[i].eval_safe_rate);
        if (with_time)
            CHECK(a[i].rebuild_time_ms == b[i].rebuild_time_ms);
    }
}

TrainConfig small_config(std::size_t steps)
{
    TrainConfig c;
    c.total_steps = steps;
    c.eval_interval = steps / 4;
    c.eval_episodes = 10;
    return c;
}

} // namespace

TEST_SUITE("rl") {

TEST_CASE("q_update arithmetic")
{
    QTable q(2, 2);
    q_update(q, 0, 1, 1.0, 1, full_action_set(2), true, 0.5, 0.9);
    CHECK(q.at(0, 1) == 0.5);

    QTable z(2, 2);
    q_update(z, 0, 0, 0.0, 1, full_action_set(2), false, 0.5, 0.9);
    CHECK(z == QTable(2, 2));

    // next state: action 0 worth 10, action 1 worth 2; only action 1 allowed
    QTable m(2, 2);
    m.at(1, 0) = 10.0;
    m.at(1, 1) = 2.0;
    QTable unmasked = m;
    q_update(m, 0, 0, 1.0, 1, ActionSet{0b10}, false, 0.5, 0.9);
    CHECK(m.at(0, 0) == doctest::Approx(0.5 * (1.0 + 0.9 * 2.0)));
    q_update(unmasked, 0, 0, 1.0, 1, full_action_set(2), false, 0.5, 0.9);
    CHECK(unmasked.at(0, 0) == doctest::Approx(0.5 * (1.0 + 0.9 * 10.0)));
}

TEST_CASE("greedy selection respects the mask and breaks ties low")
{
    QTable q(1, 4);
    q.at(0, 2) = 3.0;
    q.at(0, 3) = 1.0;
    Rng rng(0);
    CHECK(select_action(q, 0, full_action_set(4), 0.0, rng) == 2);
    CHECK(select_action(q, 0, ActionSet{0b1011}, 0.0, rng) == 3);
    CHECK(select_action(q, 0, ActionSet{0b0011}, 0.0, rng) == 0);
    CHECK(q.argmax(0, ActionSet{0b0110}) == 2);
    CHECK(q.max_over(0, ActionSet{0b0011}) == 0.0);
}

TEST_CASE("exploration is uniform over the allowed set")
{
    QTable q(1, 4);
    q.at(0, 0) = 5.0;
    Rng rng(123);
    const ActionSet allowed = 0b1101;
    std::array<int, 4> counts{};
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        counts[select_action(q, 0, allowed, 1.0, rng)]++;
    CHECK(counts[1] == 0);
    double chi2 = 0.0;
    for (ContAction a : {0u, 2u, 3u}) {
        const double expect = n / 3.0;
        chi2 += (counts[a] - expect) * (counts[a] - expect) / expect;
    }
    CHECK(chi2 < 13.816); // 2 degrees of freedom, p = 0.001
}

TEST_CASE("epsilon schedule")
{
    QConfig c;
    CHECK(c.epsilon(0, 1000) == 1.0);
    CHECK(c.epsilon(250, 1000) == doctest::Approx(0.525));
    CHECK(c.epsilon(500, 1000) == doctest::Approx(0.05));
    CHECK(c.epsilon(900, 1000) == doctest::Approx(0.05));
    c.alpha = 0.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = QConfig{};
    c.gamma = 1.0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("evaluation of a policy that walks into the cliff")
{
    CliffWalk env;
    QTable q(env.rl_state_count(), 4);
    q.at(env.start_key(), 2) = 1.0; // East from the start
    Rng rng(1);
    EvalResult r = evaluate(q, env, 30, rng);
    CHECK(r.safe_rate == 0.0);
    CHECK(r.mean_reward == -100.0);

    // a shield built from the truth blocks East; the greedy policy then pushes
    // North into the border until the step cap
    auto tables = build_shield(ground_truth(env), env.spec()).tables_ptr();
    Rng rng2(1);
    r = evaluate(q, env, 30, rng2, tables);
    CHECK(r.safe_rate == 1.0);
    CHECK(r.mean_reward == -100.0);
}

TEST_CASE("evaluation is repeatable with equal streams")
{
    WaterTank env;
    QTable q(env.rl_state_count(), 2);
    for (std::size_t s = 0; s < q.num_states(); ++s)
        q.at(s, s % 2) = 1.0;
    Rng a(9), b(9);
    EvalResult x = evaluate(q, env, 30, a);
    EvalResult y = evaluate(q, env, 30, b);
    CHECK(x.mean_reward == y.mean_reward);
    CHECK(x.safe_rate == y.safe_rate);
    CHECK(x.safe_rate >= 0.0);
    CHECK(x.safe_rate <= 1.0);
}

TEST_CASE("plain training never touches the shield")
{
    CliffWalk env;
    Metrics m = train(env, Mode::Plain, small_config(4000), 3);
    CHECK(m.rebuilds == 0);
    CHECK(m.traces.empty());
    for (const auto& row : m.rows) {
        CHECK(row.rebuild_count == 0);
        CHECK(row.shield_states == 0);
    }
}

TEST_CASE("shielded training keeps every action inside the allowed set")
{
    for (const char* name : {"watertank", "cliffwalk"}) {
        auto env = make_environment(name);
        Metrics m = train(*env, Mode::Shielded, small_config(8000), 5);
        CHECK(m.containment_violations == 0);
        CHECK(m.rebuilds > 0);
        CHECK(m.final_snapshot);
        CHECK(m.traces.size() == m.episodes);
    }
}

TEST_CASE("training is a function of seed and config")
{
    for (Mode mode : {Mode::Plain, Mode::Shielded}) {
        WaterTank env;
        Metrics a = train(env, mode, small_config(6000), 11);
        Metrics b = train(env, mode, small_config(6000), 11);
        check_same_rows(a.rows, b.rows, false);
        CHECK(a.best_q == b.best_q);
        CHECK(a.undesired_episodes == b.undesired_episodes);
        Metrics c = train(env, mode, small_config(6000), 12);
        CHECK(c.undesired_episodes + c.rows.size() != a.undesired_episodes + a.rows.size());
    }
}

TEST_CASE("metrics invariants")
{
    CliffWalk env;
    Metrics m = train(env, Mode::Shielded, small_config(8000), 2);
    std::size_t cum = 0;
    std::size_t evals = 0;
    std::optional<double> best;
    for (const auto& row : m.rows) {
        CHECK(row.undesired_cum >= cum);
        cum = row.undesired_cum;
        if (row.eval_safe_rate) {
            CHECK(*row.eval_safe_rate >= 0.0);
            CHECK(*row.eval_safe_rate <= 1.0);
            REQUIRE(row.eval_mean_reward);
            if (!best || *row.eval_mean_reward > *best)
                best = row.eval_mean_reward;
            ++evals;
        }
    }
    CHECK(cum == m.undesired_episodes);
    CHECK(m.rows.size() == m.episodes);
    CHECK(evals == 4);
    REQUIRE(m.best);
    CHECK(m.best->mean_reward == best);

    // rewards lie in [-100, 0], so |Q| stays below 100 / (1 - gamma)
    const double bound = 100.0 / (1.0 - 0.99);
    for (std::size_t s = 0; s < m.best_q.num_states(); ++s)
        for (ContAction a = 0; a < m.best_q.num_actions(); ++a)
            CHECK(std::abs(m.best_q.at(s, a)) <= bound);
}

TEST_CASE("metrics csv round trip")
{
    WaterTank env;
    Metrics m = train(env, Mode::Shielded, small_config(4000), 8);
    std::ostringstream os;
    write_metrics_csv(os, m.rows);
    const std::string text = os.str();
    CHECK(text.starts_with("seed,episode,steps_cum,reward,undesired_flag,undesired_cum,shield_states,"
                           "rebuild_count,rebuild_time_ms,eval_mean_reward,eval_safe_rate\n"));
    std::istringstream is(text);
    auto back = read_metrics_csv(is);
    check_same_rows(m.rows, back, true);
    std::ostringstream again;
    write_metrics_csv(again, back);
    CHECK(again.str() == text);

    std::istringstream bad("seed,episode\n1,2\n");
    CHECK_THROWS(read_metrics_csv(bad));
}

TEST_CASE("derived streams are independent and repeatable")
{
    Rng a = derive_rng(1, 1);
    Rng b = derive_rng(1, 1);
    Rng c = derive_rng(1, 2);
    Rng d = derive_rng(2, 1);
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
}

TEST_CASE("config validation")
{
    TrainConfig c;
    c.total_steps = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    c = TrainConfig{};
    c.policy.min_new_steps = 0;
    CHECK_THROWS_AS(c.validate(), ValidationError);
    CHECK(parse_mode("shielded") == Mode::Shielded);
    CHECK(std::string(mode_name(Mode::Plain)) == "plain");
    CHECK_THROWS_AS(parse_mode("shield"), ValidationError);
}

} // TEST_SUITE
