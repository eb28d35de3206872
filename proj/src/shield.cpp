#include "dynshield/shield.hpp"

#include "dynshield/errors.hpp"

#include <unordered_map>

namespace dynshield {

namespace {

PreemptiveShield::Query query_at(const ShieldTables& t, StateId g, bool diverged)
{
    if (diverged || !t.win.contains(g) || t.allowed[g] == 0)
        return {t.full, true};
    return {t.allowed[g], false};
}

// Cursor transition; shared by the runtime shield and the verifier.
std::pair<StateId, bool> cursor_step(const ShieldTables& t, StateId g, bool diverged, ContAction c, EnvAction e,
                                     OutputSymbol observed)
{
    if (diverged)
        return {g, true};
    OutputSymbol p = t.game.predicted(g, c, e);
    if (p != kNoSymbol && p != observed)
        return {g, true};
    return {t.game.succ(g, c, e), false};
}

struct ProductKey {
    StateId truth, spec, game;
    bool diverged;
    bool operator==(const ProductKey&) const = default;
};
struct ProductKeyHash {
    std::size_t operator()(const ProductKey& k) const
    {
        std::uint64_t h = k.truth;
        h = h * 0x9E3779B97F4A7C15ULL + k.spec;
        h = h * 0x9E3779B97F4A7C15ULL + k.game;
        h = h * 2 + (k.diverged ? 1 : 0);
        return static_cast<std::size_t>(h ^ (h >> 29));
    }
};

} // namespace

std::vector<ContAction> action_list(ActionSet s)
{
    std::vector<ContAction> out;
    for (ContAction c = 0; s != 0; ++c, s >>= 1U) {
        if (s & 1U)
            out.push_back(c);
    }
    return out;
}

PreemptiveShield::PreemptiveShield(std::shared_ptr<const ShieldTables> tables)
    : tables_(std::move(tables)), state_(tables_->game.initial())
{
}

PreemptiveShield::Query PreemptiveShield::query() const
{
    return query_at(*tables_, state_, diverged_);
}

void PreemptiveShield::advance(ContAction c, EnvAction e, OutputSymbol observed)
{
    const SafetyGame& game = tables_->game;
    if (c >= game.num_cont() || e >= game.num_env())
        throw AlphabetError("shield advanced with an out-of-range action");
    std::tie(state_, diverged_) = cursor_step(*tables_, state_, diverged_, c, e, observed);
}

void PreemptiveShield::reset()
{
    state_ = tables_->game.initial();
    diverged_ = false;
}

PreemptiveShield synthesize_preemptive(SafetyGame game, WinningRegion win)
{
    const std::size_t nc = game.num_cont();
    const std::size_t ne = game.num_env();
    if (nc > kMaxContActions)
        throw AlphabetError("at most " + std::to_string(kMaxContActions) + " cont actions are supported");
    if (win.members().size() != game.num_states())
        throw ValidationError("winning region does not match the game");

    auto t = std::make_shared<ShieldTables>();
    t->full = full_action_set(nc);
    t->allowed.assign(game.num_states(), 0);
    for (StateId g = 0; g < game.num_states(); ++g) {
        if (!win.contains(g))
            continue;
        for (ContAction c = 0; c < nc; ++c) {
            bool ok = true;
            for (EnvAction e = 0; e < ne && ok; ++e)
                ok = win.contains(game.succ(g, c, e));
            if (ok)
                t->allowed[g] |= ActionSet{1} << c;
        }
    }
    t->game = std::move(game);
    t->win = std::move(win);
    return PreemptiveShield(std::move(t));
}

PreemptiveShield build_shield(const Fsrs& model, const SafetyAutomaton& spec)
{
    SafetyGame game = compose(model, spec);
    WinningRegion win = winning_region(game);
    return synthesize_preemptive(std::move(game), std::move(win));
}

PreemptiveShield trivial_shield(const Alphabet& cont, const Alphabet& env, const SafetyAutomaton& spec)
{
    Fsrs empty(cont, env, spec.sigma(), std::vector<std::string>{"m0"}, 0);
    return build_shield(empty, spec);
}

ContAction PostPosedShield::substitute(ContAction proposed) const
{
    ActionSet allowed = base_.allowed_actions();
    if (has_action(allowed, proposed))
        return proposed;
    return static_cast<ContAction>(std::countr_zero(allowed));
}

PostPosedShield synthesize_postposed(PreemptiveShield s)
{
    return PostPosedShield(std::move(s));
}

std::vector<Episode> verify_shield(const Fsrs& truth, const SafetyAutomaton& spec, const PreemptiveShield& shield)
{
    const ShieldTables& t = shield.tables();
    if (!(truth.cont() == t.game.cont()) || !(truth.env() == t.game.env()))
        throw AlphabetError("truth and shield disagree on the action alphabets");
    if (!(spec.sigma() == truth.out()))
        throw AlphabetError("spec alphabet differs from the truth output alphabet");

    struct Node {
        ProductKey key;
        std::size_t parent;
        TraceStep via;
    };

    std::vector<Node> nodes;
    std::unordered_map<ProductKey, std::size_t, ProductKeyHash> seen;
    std::unordered_map<ProductKey, bool, ProductKeyHash> reported;
    std::vector<Episode> violations;

    auto path_to = [&](std::size_t n) {
        Episode ep;
        for (; n != 0; n = nodes[n].parent)
            ep.push_back(nodes[n].via);
        return Episode(ep.rbegin(), ep.rend());
    };

    ProductKey start{truth.initial(), spec.initial(), t.game.initial(), false};
    nodes.push_back({start, 0, {}});
    seen.emplace(start, 0);
    const MealyMachine& tm = truth.machine();
    const std::size_t ne = truth.env().size();

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const ProductKey k = nodes[i].key;
        ActionSet allowed = query_at(t, k.game, k.diverged).actions;
        for (ContAction c : action_list(allowed)) {
            for (EnvAction e = 0; e < ne; ++e) {
                const Transition& tr = tm.cell(k.truth, static_cast<InputSymbol>(c * ne + e));
                if (tr.target == kNoState)
                    continue;
                StateId q = spec.next(k.spec, tr.output);
                auto [g, d] = cursor_step(t, k.game, k.diverged, c, e, tr.output);
                ProductKey nk{tr.target, q, g, d};
                TraceStep step{c, e, tr.output};
                if (!spec.is_safe(q)) {
                    if (reported.emplace(nk, true).second) {
                        Episode ep = path_to(i);
                        ep.push_back(step);
                        violations.push_back(std::move(ep));
                    }
                    continue;
                }
                if (seen.emplace(nk, nodes.size()).second)
                    nodes.push_back({nk, i, step});
            }
        }
    }
    return violations;
}

ShieldListing listing(const ShieldTables& tables)
{
    ShieldListing l;
    l.cont = tables.game.cont();
    l.init = tables.game.state_name(tables.game.initial());
    for (StateId g = 0; g < tables.game.num_states(); ++g)
        l.allow.emplace_back(tables.game.state_name(g), tables.allowed[g]);
    return l;
}

} // namespace dynshield
