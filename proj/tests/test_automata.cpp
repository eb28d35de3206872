#include "test_support.hpp"

#include "dynshield/envs/environment.hpp"
#include "dynshield/envs/watertank.hpp"
#include "dynshield/errors.hpp"
#include "dynshield/mdp.hpp"
#include "dynshield/text_format.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

using namespace dynshield;
using testing::Rng;

namespace {

InputSymbol wt(const Fsrs& m, const char* cont, int inflow, int outflow)
{
    return m.input(m.cont().index(cont), WaterTank::env_action(inflow, outflow));
}

// Copy of `m` with every defined cell kept with probability `keep`.
MealyMachine thin(Rng& rng, const MealyMachine& m, double keep)
{
    std::bernoulli_distribution coin(keep);
    MealyMachine r(m.num_states(), m.num_inputs(), m.num_outputs(), m.initial());
    for (StateId s = 0; s < m.num_states(); ++s)
        for (InputSymbol a = 0; a < m.num_inputs(); ++a)
            if (auto t = m.step(s, a); t && coin(rng))
                r.set_transition(s, a, t->target, t->output);
    return r;
}

// Abstraction by enumerating every word of `reference` up to `depth`.
bool abstracts_bounded(const MealyMachine& cand, const MealyMachine& ref, std::size_t depth)
{
    std::vector<std::pair<StateId, StateId>> frontier{{ref.initial(), cand.initial()}};
    for (std::size_t d = 0; d < depth && !frontier.empty(); ++d) {
        std::vector<std::pair<StateId, StateId>> next;
        for (auto [r, c] : frontier) {
            for (InputSymbol a = 0; a < ref.num_inputs(); ++a) {
                auto tr = ref.step(r, a);
                if (!tr)
                    continue;
                auto tc = cand.step(c, a);
                if (!tc || tc->output != tr->output)
                    return false;
                next.emplace_back(tr->target, tc->target);
            }
        }
        frontier = std::move(next);
    }
    return true;
}

std::filesystem::path data_dir()
{
    return DYNSHIELD_DATA_DIR;
}

} // namespace

TEST_SUITE("automata") {

TEST_CASE("alphabet rejects empty, duplicate and malformed names")
{
    CHECK_THROWS_AS(Alphabet(std::vector<std::string>{}), AlphabetError);
    CHECK_THROWS_AS(Alphabet({"a", "a"}), AlphabetError);
    CHECK_THROWS_AS(Alphabet({"a b"}), AlphabetError);
    CHECK_THROWS_AS(Alphabet({"x#"}), AlphabetError);
    Alphabet a({"open", "close"});
    CHECK(a.index("close") == 1);
    CHECK_FALSE(a.find("stay"));
    CHECK_THROWS_AS((void)a.index("stay"), AlphabetError);
    CHECK_THROWS_AS((void)a.name(2), AlphabetError);
}

TEST_CASE("watertank step examples")
{
    const Fsrs m = watertank_level_model();
    auto t = m.machine().step(50, wt(m, "open", 2, 1));
    REQUIRE(t);
    CHECK(t->target == 51);
    CHECK(m.out().name(t->output) == "safe");

    t = m.machine().step(1, wt(m, "close", 0, 1));
    REQUIRE(t);
    CHECK(t->target == 0);
    CHECK(m.out().name(t->output) == "low");

    // close with inflow is not a move of the model
    CHECK_FALSE(m.machine().step(50, wt(m, "close", 1, 0)));
    CHECK_THROWS_AS((void)m.machine().step(101, 0), AlphabetError);
    CHECK_THROWS_AS((void)m.machine().step(0, 12), AlphabetError);
}

TEST_CASE("run folds steps and handles the empty word")
{
    const Fsrs m = watertank_level_model();
    auto r = m.machine().run(Word{});
    REQUIRE(r);
    CHECK(r->state == 50);
    CHECK_FALSE(r->last_output);

    r = m.machine().run(Word{wt(m, "open", 2, 0), wt(m, "open", 1, 1)});
    REQUIRE(r);
    CHECK(r->state == 52);
    CHECK(r->last_output == m.out().index("safe"));

    CHECK_FALSE(m.machine().run(Word{wt(m, "open", 2, 0), wt(m, "close", 2, 0)}));
}

TEST_CASE("run is compositional")
{
    Rng rng(11);
    for (int i = 0; i < 100; ++i) {
        auto m = testing::random_mealy(rng, 5, 3, 2, 0.7);
        std::uniform_int_distribution<InputSymbol> sym(0, 2);
        Word u, v;
        for (int k = 0; k < 4; ++k) {
            u.push_back(sym(rng));
            v.push_back(sym(rng));
        }
        Word uv = u;
        uv.insert(uv.end(), v.begin(), v.end());
        auto whole = m.run(uv);
        if (!whole)
            continue;
        auto mid = m.run(u);
        REQUIRE(mid);
        auto rest = m.run_from(mid->state, v);
        REQUIRE(rest);
        CHECK(rest->state == whole->state);
        CHECK(rest->last_output == whole->last_output);
    }
}

TEST_CASE("set_transition refuses a second definition")
{
    MealyMachine m(2, 2, 2);
    m.set_transition(0, 0, 1, 0);
    CHECK_THROWS_WITH_AS(m.set_transition(0, 0, 0, 1), "nondeterministic transition", ValidationError);
    CHECK(m.num_transitions() == 1);
}

TEST_CASE("cont-totality validation")
{
    CHECK(validate_fsrs(watertank_level_model()).empty());

    Fsrs m(Alphabet({"open", "close"}), Alphabet({"e"}), Alphabet({"o"}), {"a", "b"});
    m.set_transition(0, 0, 0, 1, 0);
    m.set_transition(0, 1, 0, 1, 0);
    m.set_transition(1, 0, 0, 0, 0);
    auto v = validate_fsrs(m);
    REQUIRE(v.size() == 1);
    CHECK(v[0] == ContTotalityViolation{1, 1});

    Fsrs empty(Alphabet({"x", "y"}), Alphabet({"e"}), Alphabet({"o"}), {"a", "b", "c"});
    CHECK(validate_fsrs(empty).size() == 6);
}

TEST_CASE("safety automaton invariants are checked on construction")
{
    Alphabet sigma({"ok", "bad"});
    CHECK_NOTHROW(SafetyAutomaton(sigma, {"q0", "q1"}, 0, {true, false}, {0, 1, 1, 1}));
    CHECK_THROWS_WITH_AS(SafetyAutomaton(sigma, {"q0", "q1"}, 0, {true, false}, {0, 1, 0, 1}),
                         doctest::Contains("unsafe region not absorbing"), ValidationError);
    CHECK_THROWS_WITH_AS(SafetyAutomaton(sigma, {"q0", "q1"}, 1, {true, false}, {0, 1, 1, 1}),
                         "initial state is unsafe", ValidationError);
    CHECK_THROWS_WITH_AS(SafetyAutomaton(sigma, {"q0", "q1"}, 0, {true, false}, {0, 1, 1}),
                         doctest::Contains("not total"), ValidationError);
}

TEST_CASE("watertank spec acceptance")
{
    const SafetyAutomaton spec = watertank_spec();
    const auto& s = spec.sigma();
    CHECK(spec.accepts(std::vector<OutputSymbol>{}));
    std::vector<OutputSymbol> w{s.index("open_safe_ok"), s.index("close_safe_ok")};
    CHECK(spec.accepts(w));
    w.push_back(s.index("open_high_ok"));
    CHECK_FALSE(spec.accepts(w));
    w.push_back(s.index("close_safe_ok"));
    CHECK_FALSE(spec.accepts(w));
    CHECK_FALSE(sa_accepts(spec, std::vector<OutputSymbol>{s.index("close_safe_viol")}));
    CHECK_THROWS_AS((void)spec.next(0, static_cast<OutputSymbol>(s.size())), AlphabetError);
}

TEST_CASE("safety language is prefix closed")
{
    Rng rng(5);
    for (int i = 0; i < 200; ++i) {
        auto sigma = testing::names("o", 3);
        auto spec = testing::random_spec(rng, sigma, 2 + i % 6);
        std::uniform_int_distribution<OutputSymbol> sym(0, 2);
        std::vector<OutputSymbol> w;
        bool accepted = true;
        for (int k = 0; k < 12; ++k) {
            w.push_back(sym(rng));
            bool now = spec.accepts(w);
            CHECK((accepted || !now));
            accepted = now;
        }
    }
}

TEST_CASE("induced MDP of the watertank level model")
{
    const Fsrs m = watertank_level_model();
    const Mdp mdp = induce_mdp(m, watertank_level_strategy());
    const auto& open = mdp.outcomes(50, WaterTank::Open);
    REQUIRE(open.size() == 3);
    const OutputSymbol safe = m.out().index("safe");
    CHECK(open[0].state == 50);
    CHECK(open[0].probability == doctest::Approx(0.25));
    CHECK(open[1].state == 51);
    CHECK(open[1].probability == doctest::Approx(0.5));
    CHECK(open[2].state == 52);
    CHECK(open[2].probability == doctest::Approx(0.25));
    for (const auto& o : open)
        CHECK(o.output == safe);

    const auto& closed0 = mdp.outcomes(0, WaterTank::Close);
    REQUIRE(closed0.size() == 1);
    CHECK(closed0[0].state == 0);
    CHECK(closed0[0].output == m.out().index("low"));
    CHECK(closed0[0].probability == doctest::Approx(1.0));

    for (StateId s = 0; s < mdp.num_states; ++s) {
        for (ContAction c = 0; c < mdp.cont.size(); ++c) {
            double total = 0.0;
            for (const auto& o : mdp.outcomes(s, c))
                total += o.probability;
            CHECK(std::abs(total - 1.0) <= kProbabilityTolerance);
        }
    }
}

TEST_CASE("point strategies give point distributions")
{
    const Fsrs m = watertank_level_model();
    EnvStrategy tau(m.num_states(), 2);
    for (StateId s = 0; s < m.num_states(); ++s) {
        tau.set(s, WaterTank::Open, {{WaterTank::env_action(1, 0), 1.0}});
        tau.set(s, WaterTank::Close, {{WaterTank::env_action(0, 1), 1.0}});
    }
    const Mdp mdp = induce_mdp(m, tau);
    for (const auto& t : mdp.transitions) {
        REQUIRE(t.size() == 1);
        CHECK(t[0].probability == 1.0);
    }
    CHECK(mdp.outcomes(10, WaterTank::Open)[0].state == 11);
}

TEST_CASE("strategies outside the defined moves are rejected")
{
    const Fsrs m = watertank_level_model();
    EnvStrategy tau = watertank_level_strategy();
    tau.set(3, WaterTank::Close, {{WaterTank::env_action(1, 0), 1.0}});
    CHECK_THROWS_AS(induce_mdp(m, tau), StrategyError);

    tau = watertank_level_strategy();
    tau.set(3, WaterTank::Close, {{WaterTank::env_action(0, 0), 0.5}});
    CHECK_THROWS_AS(induce_mdp(m, tau), StrategyError);
}

TEST_CASE("abstracts examples")
{
    Rng rng(3);
    auto m = testing::random_mealy(rng, 4, 2, 2, 0.8);
    CHECK(abstracts(m, m));

    // 2-state machine; sampling only the word "0" leaves "1" and "00" unseen
    MealyMachine t(2, 2, 2);
    t.set_transition(0, 0, 1, 0);
    t.set_transition(0, 1, 0, 1);
    t.set_transition(1, 0, 0, 1);
    MealyMachine ptmm(2, 2, 2);
    ptmm.set_transition(0, 0, 1, 0);
    CHECK_FALSE(abstracts(ptmm, t));
    CHECK(abstracts(t, ptmm));

    MealyMachine constant(3, 2, 2);
    for (StateId s = 0; s < 3; ++s)
        for (InputSymbol a = 0; a < 2; ++a)
            if (!(s == 2 && a == 1))
                constant.set_transition(s, a, (s + a) % 3, 1);
    MealyMachine one(1, 2, 2);
    one.set_transition(0, 0, 0, 1);
    one.set_transition(0, 1, 0, 1);
    CHECK(abstracts(one, constant));
    CHECK_FALSE(abstracts(constant, one));

    CHECK_THROWS_AS(abstracts(MealyMachine(1, 3, 2), m), AlphabetError);
}

TEST_CASE("abstracts agrees with bounded word enumeration")
{
    Rng rng(21);
    for (int i = 0; i < 300; ++i) {
        auto a = testing::random_mealy(rng, 1 + i % 4, 2, 2, 0.8);
        auto b = i % 3 == 0 ? thin(rng, a, 0.7) : testing::random_mealy(rng, 1 + i % 3, 2, 2, 0.6);
        // any difference shows up on a word no longer than the product size
        const std::size_t depth = a.num_states() * b.num_states() + 1;
        CHECK(abstracts(a, b) == abstracts_bounded(a, b, depth));
        CHECK(abstracts(b, a) == abstracts_bounded(b, a, depth));
    }
}

TEST_CASE("abstracts is reflexive and transitive")
{
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        auto c = testing::random_mealy(rng, 2 + i % 5, 3, 2, 0.9);
        auto b = thin(rng, c, 0.8);
        auto a = thin(rng, b, 0.8);
        CHECK(abstracts(a, a));
        CHECK(abstracts(c, b));
        CHECK(abstracts(b, a));
        CHECK(abstracts(c, a));

        // random triples: the implication must hold whenever its premise does
        auto x = testing::random_mealy(rng, 2, 2, 2, 0.5);
        auto y = thin(rng, x, 0.5);
        auto z = testing::random_mealy(rng, 2, 2, 2, 0.3);
        if (abstracts(x, y) && abstracts(y, z))
            CHECK(abstracts(x, z));
    }
}

TEST_CASE("fsrs round trip on random machines")
{
    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
        Fsrs m = testing::random_fsrs(rng, 1 + i % 9, 1 + i % 3, 1 + i % 4, 1 + i % 5, 0.5);
        const std::string text = serialize_fsrs(m);
        Fsrs back = parse_fsrs(text);
        CHECK(back == m);
        CHECK(serialize_fsrs(back) == text);
        CHECK(to_dot(back) == to_dot(m));
    }
}

TEST_CASE("spec round trip on random automata")
{
    Rng rng(43);
    for (int i = 0; i < 200; ++i) {
        auto spec = testing::random_spec(rng, testing::names("o", 1 + i % 4), 2 + i % 7);
        const std::string text = serialize_spec(spec);
        CHECK(parse_spec(text) == spec);
    }
}

TEST_CASE("fsrs parser errors carry line numbers")
{
    const char* dup = "fsrs v1\ncont a\nenv x\nout o\ninit s\nt s a x s o\nt s a x t o\n";
    try {
        (void)parse_fsrs(dup);
        FAIL("accepted a duplicate transition");
    } catch (const ParseError& e) {
        CHECK(e.line() == 7);
        CHECK(e.reason() == "nondeterministic transition");
    }
    CHECK_THROWS_AS(parse_fsrs("fsrs v2\n"), ParseError);
    CHECK_THROWS_AS(parse_fsrs("fsrs v1\ncont a\nenv x\nout o\n"), ParseError);
    CHECK_THROWS_AS(parse_fsrs("fsrs v1\ncont a\nenv x\nout o\ninit s\nt s a y s o\n"), ParseError);
    CHECK_THROWS_AS(parse_fsrs("fsrs v1\ncont a\nenv x\nout o\ninit s\nfoo\n"), ParseError);
}

TEST_CASE("spec parser enforces the automaton invariants")
{
    const char* back_edge = "spec v1\nsigma ok bad\ninit q0\nunsafe q1\n"
                            "t q0 ok q0\nt q0 bad q1\nt q1 ok q0\nt q1 bad q1\n";
    try {
        (void)parse_spec(back_edge);
        FAIL("accepted a non-absorbing unsafe state");
    } catch (const ParseError& e) {
        CHECK(e.reason() == "unsafe region not absorbing");
        CHECK(e.line() == 7);
    }
    const char* dup = "spec v1\nsigma ok\ninit q0\nt q0 ok q0\nt q0 ok q0\n";
    CHECK_THROWS_WITH_AS(parse_spec(dup), doctest::Contains("nondeterministic transition"), ParseError);
    const char* partial = "spec v1\nsigma ok bad\ninit q0\nt q0 ok q0\n";
    CHECK_THROWS_WITH_AS(parse_spec(partial), doctest::Contains("not total"), ParseError);
    const char* bad_init = "spec v1\nsigma ok\ninit q0\nunsafe q0\nt q0 ok q0\n";
    CHECK_THROWS_WITH_AS(parse_spec(bad_init), doctest::Contains("initial state is unsafe"), ParseError);
}

TEST_CASE("comments and blank lines are ignored")
{
    const char* text = "# demo\nfsrs v1\n\ncont a b # two\nenv x\nout o p\ninit s0\n"
                       "t s0 a x s1 o\nt s0 b x s0 p\nt s1 a x s2 p\nt s1 b x s0 o\nt s2 a x s2 o\nt s2 b x s1 p\n";
    Fsrs m = parse_fsrs(text);
    CHECK(m.num_states() == 3);
    CHECK(validate_fsrs(m).empty());
    CHECK(parse_fsrs(serialize_fsrs(m)) == m);
}

TEST_CASE("dot export is deterministic and lists every edge")
{
    Fsrs m = parse_fsrs("fsrs v1\ncont a\nenv x y\nout o\ninit s\nt s a x t o\nt s a y s o\nt t a x s o\n");
    const std::string dot = to_dot(m);
    CHECK(dot == to_dot(parse_fsrs(serialize_fsrs(m))));
    std::size_t arrows = 0;
    for (std::size_t p = dot.find("->"); p != std::string::npos; p = dot.find("->", p + 2))
        ++arrows;
    CHECK(arrows == 4); // three moves plus the start marker
    CHECK(to_dot(watertank_spec()).find("doublecircle") != std::string::npos);
}

TEST_CASE("shipped benchmark files parse, validate and round trip")
{
    std::size_t seen = 0;
    for (const char* env : {"watertank", "gridworld", "cliffwalk", "taxi"}) {
        const auto e = make_environment(env);
        const auto fsrs_path = data_dir() / (std::string(env) + ".fsrs");
        const auto spec_path = data_dir() / (std::string(env) + ".spec");
        REQUIRE(std::filesystem::exists(fsrs_path));
        REQUIRE(std::filesystem::exists(spec_path));

        const std::string ftext = read_text_file(fsrs_path);
        Fsrs truth = parse_fsrs(ftext);
        CHECK(serialize_fsrs(truth) == ftext);
        CHECK(truth == ground_truth(*e));

        const std::string stext = read_text_file(spec_path);
        SafetyAutomaton spec = parse_spec(stext);
        CHECK(serialize_spec(spec) == stext);
        CHECK(spec == e->spec());
        CHECK(spec.sigma() == truth.out());
        seen += 2;
    }
    CHECK(seen == 8);
}

} // TEST_SUITE
