#pragma once

#include "dynshield/fsrs.hpp"
#include "dynshield/game.hpp"
#include "dynshield/safety_automaton.hpp"
#include "dynshield/trace.hpp"

#include <bit>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dynshield {

/// Bit c set <=> cont action c is in the set.
using ActionSet = std::uint64_t;
inline constexpr std::size_t kMaxContActions = 64;

inline ActionSet full_action_set(std::size_t n)
{
    return n >= 64 ? ~ActionSet{0} : (ActionSet{1} << n) - 1;
}
inline bool has_action(ActionSet s, ContAction c)
{
    return c < 64 && ((s >> c) & 1U) != 0;
}
inline std::size_t action_count(ActionSet s)
{
    return static_cast<std::size_t>(std::popcount(s));
}
std::vector<ContAction> action_list(ActionSet s);

/// Immutable part of a synthesized shield; shared between cursors.
struct ShieldTables {
    SafetyGame game;
    WinningRegion win;
    std::vector<ActionSet> allowed; // empty outside the winning region
    ActionSet full = 0;
};

/// Runtime cursor over a preemptive shield: current game state plus a flag
/// set once the environment contradicts the model.
class PreemptiveShield {
public:
    struct Query {
        ActionSet actions;
        bool fallback; // the shield abstained and returned every action
    };

    PreemptiveShield() = default;
    explicit PreemptiveShield(std::shared_ptr<const ShieldTables> tables);

    /// Never empty: abstains with every action when diverged, outside the
    /// winning region, or when no action is safe.
    [[nodiscard]] Query query() const;
    [[nodiscard]] ActionSet allowed_actions() const { return query().actions; }
    /// Static allowed set of a game state (may be empty).
    [[nodiscard]] ActionSet allowed_at(StateId g) const { return tables_->allowed.at(g); }

    void advance(ContAction c, EnvAction e, OutputSymbol observed);
    void reset();

    [[nodiscard]] StateId state() const { return state_; }
    [[nodiscard]] bool diverged() const { return diverged_; }
    [[nodiscard]] const ShieldTables& tables() const { return *tables_; }
    [[nodiscard]] const std::shared_ptr<const ShieldTables>& tables_ptr() const { return tables_; }

private:
    std::shared_ptr<const ShieldTables> tables_;
    StateId state_ = 0;
    bool diverged_ = false;
};

/// allowed(g) = { c | forall e: succ(g, c, e) in W } for g in W.
/// Throws AlphabetError when the cont alphabet exceeds kMaxContActions.
PreemptiveShield synthesize_preemptive(SafetyGame game, WinningRegion win);

/// compose -> winning_region -> synthesize_preemptive.
PreemptiveShield build_shield(const Fsrs& model, const SafetyAutomaton& spec);

/// Shield of the model with a single state and no transitions: every move
/// goes to the sink, so everything is allowed.
PreemptiveShield trivial_shield(const Alphabet& cont, const Alphabet& env, const SafetyAutomaton& spec);

/// Replaces a disallowed proposal by the smallest allowed action.
class PostPosedShield {
public:
    explicit PostPosedShield(PreemptiveShield base) : base_(std::move(base)) {}

    [[nodiscard]] ContAction substitute(ContAction proposed) const;
    void advance(ContAction c, EnvAction e, OutputSymbol observed) { base_.advance(c, e, observed); }
    void reset() { base_.reset(); }
    [[nodiscard]] const PreemptiveShield& base() const { return base_; }

private:
    PreemptiveShield base_;
};

PostPosedShield synthesize_postposed(PreemptiveShield s);

/// Explores (truth state, spec state, shield state, divergence) breadth-first
/// with shield-allowed cont actions and every env action truth defines.
/// Returns one shortest run per reached product state whose spec state is
/// unsafe; empty means the shield keeps truth safe.
/// Throws AlphabetError on alphabet mismatch.
std::vector<Episode> verify_shield(const Fsrs& truth, const SafetyAutomaton& spec, const PreemptiveShield& shield);

/// Text listing of a shield: `shield v1`, `cont ...`, `init <state>`, then
/// `allow <state> a+b` per game state (`-` for the empty set).
struct ShieldListing {
    Alphabet cont;
    std::string init;
    std::vector<std::pair<std::string, ActionSet>> allow;

    friend bool operator==(const ShieldListing&, const ShieldListing&) = default;
};

ShieldListing listing(const ShieldTables& tables);
std::string serialize_shield(const ShieldListing& l);
ShieldListing parse_shield(std::string_view text);

} // namespace dynshield
