#include "dynshield/game.hpp"

#include "dynshield/errors.hpp"
#include "dynshield/text_format.hpp"

#include <algorithm>
#include <string>

namespace dynshield {

SafetyGame::SafetyGame(Alphabet cont, Alphabet env, std::vector<State> states, std::vector<std::string> names,
                       std::vector<bool> safe, std::vector<StateId> succ, std::vector<OutputSymbol> predicted,
                       StateId initial)
    : cont_(std::move(cont)), env_(std::move(env)), states_(std::move(states)), names_(std::move(names)),
      succ_(std::move(succ)), predicted_(std::move(predicted)), initial_(initial)
{
    const std::size_t n = states_.size();
    const std::size_t moves = cont_.size() * env_.size();
    if (n == 0)
        throw ValidationError("game has no states");
    if (names_.size() != n || safe.size() != n)
        throw ValidationError("game state tables differ in size");
    if (succ_.size() != n * moves || predicted_.size() != n * moves)
        throw ValidationError("transition map not total");
    if (initial_ >= n)
        throw ValidationError("initial state out of range");
    safe_.assign(safe.begin(), safe.end());
    for (StateId g = 0; g < n; ++g) {
        for (std::size_t m = 0; m < moves; ++m) {
            StateId t = succ_[g * moves + m];
            if (t >= n)
                throw ValidationError("successor out of range at state " + names_[g]);
            if (is_sink(g) && (t != g || predicted_[g * moves + m] != kNoSymbol))
                throw ValidationError("sink state " + names_[g] + " is not absorbing");
        }
        if (is_sink(g) && !safe_[g])
            throw ValidationError("sink state " + names_[g] + " is not safe");
    }
}

SafetyGame compose(const Fsrs& model, const SafetyAutomaton& spec)
{
    if (!(spec.sigma() == model.out()))
        throw AlphabetError("spec alphabet differs from the model output alphabet");

    const std::size_t nc = model.cont().size();
    const std::size_t ne = model.env().size();
    const std::size_t nq = spec.num_states();
    const std::size_t sink = model.num_states();
    const MealyMachine& mm = model.machine();

    // Product key (model or sink, spec) -> game id.
    std::vector<StateId> id((sink + 1) * nq, kNoState);
    std::vector<SafetyGame::State> states;
    std::vector<StateId> succ;
    std::vector<OutputSymbol> predicted;

    auto intern = [&](std::size_t l, StateId q) {
        StateId& slot = id[l * nq + q];
        if (slot == kNoState) {
            slot = static_cast<StateId>(states.size());
            states.push_back({l == sink ? kNoState : static_cast<StateId>(l), q});
        }
        return slot;
    };

    intern(model.initial(), spec.initial());
    for (std::size_t g = 0; g < states.size(); ++g) {
        const auto [l, q] = states[g];
        for (std::size_t c = 0; c < nc; ++c) {
            for (std::size_t e = 0; e < ne; ++e) {
                if (l == kNoState) {
                    succ.push_back(static_cast<StateId>(g));
                    predicted.push_back(kNoSymbol);
                    continue;
                }
                const Transition& t = mm.cell(l, static_cast<InputSymbol>(c * ne + e));
                if (t.target == kNoState) {
                    succ.push_back(intern(sink, q));
                    predicted.push_back(kNoSymbol);
                } else {
                    succ.push_back(intern(t.target, spec.next(q, t.output)));
                    predicted.push_back(t.output);
                }
            }
        }
    }

    std::vector<std::string> names;
    std::vector<bool> safe;
    names.reserve(states.size());
    safe.reserve(states.size());
    for (const auto& s : states) {
        const std::string& qn = spec.state_name(s.spec);
        if (s.model == kNoState) {
            names.push_back("@sink/" + qn);
            safe.push_back(true);
        } else {
            names.push_back(model.state_name(s.model) + "/" + qn);
            safe.push_back(spec.is_safe(s.spec));
        }
    }
    return SafetyGame(model.cont(), model.env(), std::move(states), std::move(names), std::move(safe),
                      std::move(succ), std::move(predicted), 0);
}

WinningRegion::WinningRegion(std::vector<char> members) : members_(std::move(members))
{
    for (char& m : members_) {
        m = m ? 1 : 0;
        count_ += static_cast<std::size_t>(m);
    }
}

WinningRegion winning_region(const SafetyGame& game)
{
    const auto n = static_cast<std::ptrdiff_t>(game.num_states());
    const std::size_t nc = game.num_cont();
    const std::size_t ne = game.num_env();
    const auto& succ = game.succ_table();

    std::vector<char> cur(static_cast<std::size_t>(n));
    for (std::ptrdiff_t g = 0; g < n; ++g)
        cur[g] = game.is_safe(static_cast<StateId>(g)) ? 1 : 0;
    std::vector<char> next = cur;

    bool changed = true;
    while (changed) {
        changed = false;
#pragma omp parallel for schedule(static) reduction(|| : changed)
        for (std::ptrdiff_t g = 0; g < n; ++g) {
            if (!cur[g])
                continue;
            const StateId* row = succ.data() + static_cast<std::size_t>(g) * nc * ne;
            bool keep = false;
            for (std::size_t c = 0; c < nc && !keep; ++c) {
                bool all = true;
                for (std::size_t e = 0; e < ne && all; ++e)
                    all = cur[row[c * ne + e]] != 0;
                keep = all;
            }
            next[g] = keep ? 1 : 0;
            if (!keep)
                changed = true;
        }
        cur.swap(next);
        std::copy(cur.begin(), cur.end(), next.begin());
    }
    return WinningRegion(std::move(cur));
}

WinningRegion winning_region_serial(const SafetyGame& game)
{
    const std::size_t n = game.num_states();
    const std::size_t nc = game.num_cont();
    const std::size_t ne = game.num_env();
    const auto& succ = game.succ_table();

    // Reverse edges as (predecessor, cont) pairs in CSR form.
    std::vector<std::size_t> start(n + 1, 0);
    for (StateId t : succ)
        ++start[t + 1];
    for (std::size_t i = 0; i < n; ++i)
        start[i + 1] += start[i];
    std::vector<std::size_t> fill(start.begin(), start.end() - 1);
    std::vector<std::pair<StateId, ContAction>> pred(succ.size());
    for (std::size_t i = 0; i < succ.size(); ++i) {
        auto g = static_cast<StateId>(i / (nc * ne));
        auto c = static_cast<ContAction>((i / ne) % nc);
        pred[fill[succ[i]]++] = {g, c};
    }

    std::vector<char> lost(n, 0);
    std::vector<char> bad(n * nc, 0);
    std::vector<std::size_t> good(n, nc);
    std::vector<StateId> work;
    for (StateId g = 0; g < n; ++g) {
        if (!game.is_safe(g) || nc == 0) {
            lost[g] = 1;
            work.push_back(g);
        }
    }
    while (!work.empty()) {
        StateId t = work.back();
        work.pop_back();
        for (std::size_t i = start[t]; i < start[t + 1]; ++i) {
            auto [p, c] = pred[i];
            if (lost[p] || bad[p * nc + c])
                continue;
            bad[p * nc + c] = 1;
            if (--good[p] == 0) {
                lost[p] = 1;
                work.push_back(p);
            }
        }
    }
    for (char& x : lost)
        x = x ? 0 : 1;
    return WinningRegion(std::move(lost));
}

std::string to_dot(const SafetyGame& game, const WinningRegion* win)
{
    std::string s = "digraph game {\n  rankdir=LR;\n  __start [shape=point];\n";
    for (StateId g = 0; g < game.num_states(); ++g) {
        bool losing = win ? !win->contains(g) : !game.is_safe(g);
        s += "  g" + std::to_string(g) + " [label=" + dot_quote(game.state_name(g)) +
             (losing ? ", shape=doublecircle" : ", shape=circle") + "];\n";
    }
    s += "  __start -> g" + std::to_string(game.initial()) + ";\n";
    for (StateId g = 0; g < game.num_states(); ++g) {
        for (ContAction c = 0; c < game.num_cont(); ++c) {
            for (EnvAction e = 0; e < game.num_env(); ++e) {
                s += "  g" + std::to_string(g) + " -> g" + std::to_string(game.succ(g, c, e)) +
                     " [label=" + dot_quote(game.cont().name(c) + "/" + game.env().name(e)) + "];\n";
            }
        }
    }
    s += "}\n";
    return s;
}

} // namespace dynshield
