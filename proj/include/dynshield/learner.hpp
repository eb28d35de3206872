#pragma once

#include "dynshield/fsrs.hpp"
#include "dynshield/mealy.hpp"

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <tuple>
#include <unordered_map>
#include <vector>

namespace dynshield {

/// Training data: a finite map from non-empty input words to the output of
/// their last step, stored as a trie. The root stands for the empty word and
/// carries no output.
class SampleSet {
public:
    using NodeId = std::uint32_t;
    struct Node {
        OutputSymbol output = kNoSymbol; // kNoSymbol: word not sampled (root, or only a prefix of a sampled word)
        std::vector<std::pair<InputSymbol, NodeId>> children; // sorted by input
    };

    SampleSet(std::size_t num_inputs, std::size_t num_outputs);

    /// Throws ValidationError on an output conflict or an empty word,
    /// AlphabetError on out-of-range symbols.
    void add(std::span<const InputSymbol> word, OutputSymbol out);
    /// Adds every non-empty prefix of an input/output trace.
    void add_trace(std::span<const InputSymbol> inputs, std::span<const OutputSymbol> outputs);

    [[nodiscard]] std::optional<OutputSymbol> output(std::span<const InputSymbol> word) const;
    [[nodiscard]] std::size_t size() const { return sampled_; }
    [[nodiscard]] std::size_t num_inputs() const { return num_inputs_; }
    [[nodiscard]] std::size_t num_outputs() const { return num_outputs_; }

    /// Shortlex-first sampled word with an unsampled non-empty proper prefix.
    [[nodiscard]] std::optional<Word> orphan() const;
    [[nodiscard]] bool prefix_closed() const { return !orphan().has_value(); }

    /// Visits sampled words in shortlex order.
    template <class F>
    void for_each(F&& f) const;

    [[nodiscard]] const std::vector<Node>& nodes() const { return nodes_; }

    friend bool operator==(const SampleSet&, const SampleSet&);

private:
    NodeId child(NodeId n, InputSymbol a) const;
    NodeId child_or_insert(NodeId n, InputSymbol a);

    std::size_t num_inputs_;
    std::size_t num_outputs_;
    std::size_t sampled_ = 0;
    std::vector<Node> nodes_;
};

/// Prefix-tree Mealy machine of a prefix-closed sample. State ids follow the
/// shortlex order of access words, so state 0 is the empty word.
class Ptmm {
public:
    /// Throws ValidationError naming the orphaned word if `d` is not prefix-closed.
    explicit Ptmm(const SampleSet& d);

    struct Edge {
        InputSymbol input;
        StateId target;
        OutputSymbol output;
    };

    [[nodiscard]] std::size_t num_states() const { return children_.size(); }
    [[nodiscard]] std::size_t num_inputs() const { return num_inputs_; }
    [[nodiscard]] std::size_t num_outputs() const { return num_outputs_; }
    [[nodiscard]] const std::vector<Edge>& children(StateId s) const { return children_.at(s); }
    [[nodiscard]] std::size_t height(StateId s) const { return height_.at(s); }
    [[nodiscard]] StateId parent(StateId s) const { return parent_.at(s); }
    [[nodiscard]] Word access_word(StateId s) const;
    [[nodiscard]] MealyMachine machine() const;

private:
    std::size_t num_inputs_;
    std::size_t num_outputs_;
    std::vector<std::vector<Edge>> children_;
    std::vector<StateId> parent_;
    std::vector<InputSymbol> via_;
    std::vector<std::size_t> height_;
};

inline Ptmm build_ptmm(const SampleSet& d)
{
    return Ptmm(d);
}

/// Shortlex order: shorter first, then lexicographic on symbol indices.
bool shortlex_less(std::span<const InputSymbol> a, std::span<const InputSymbol> b);

/// Red-blue state-merging hypothesis over a prefix tree. Red states are
/// final states of the result; blue states are non-red successors of red
/// states. Everything below the blue frontier is still tree-shaped.
class MergeHypothesis {
public:
    using NodeId = StateId;

    /// Starts with red = {root} and blue = its children.
    explicit MergeHypothesis(const Ptmm& tree);

    [[nodiscard]] const std::vector<NodeId>& red() const { return red_; }
    [[nodiscard]] std::vector<NodeId> blue() const;
    [[nodiscard]] bool has_blue() const { return !blue_.empty(); }
    /// Smallest blue state in shortlex order of access words.
    [[nodiscard]] NodeId first_blue() const;
    [[nodiscard]] bool is_red(NodeId n) const { return red_flag_.at(n) != 0; }
    [[nodiscard]] const Word& access(NodeId red_or_blue) const;

    /// Trial fold of blue's subtree into red; leaves the hypothesis unchanged.
    [[nodiscard]] bool compatible(NodeId red, NodeId blue) const;
    /// Longest input word with defined, output-equal paths from red (current
    /// quotient) and blue (its subtree).
    [[nodiscard]] std::size_t agreement_depth(NodeId red, NodeId blue) const;
    /// Same as agreement_depth(red, blue) >= depth, with early exit.
    [[nodiscard]] bool has_agreement(NodeId red, NodeId blue, std::size_t depth) const;
    [[nodiscard]] std::size_t subtree_height(NodeId blue) const;
    /// Red states with agreement >= depth against blue, in shortlex order.
    /// For depth 0 this is every red state.
    [[nodiscard]] std::vector<NodeId> gate_candidates(NodeId blue, std::size_t depth) const;

    /// Redirects blue's incoming edge to red and folds its subtree in.
    /// Precondition: compatible(red, blue).
    void merge(NodeId red, NodeId blue);
    void promote(NodeId blue);

    /// The quotient restricted to red states, numbered in shortlex order.
    /// Only meaningful once no blue state is left.
    [[nodiscard]] MealyMachine to_machine() const;

private:
    struct Edge {
        InputSymbol input;
        NodeId target;
        OutputSymbol output;
    };
    struct BlueEntry {
        Word key;
        NodeId node;
        NodeId parent;
        InputSymbol input;
    };
    struct BlueOrder {
        bool operator()(const BlueEntry& a, const BlueEntry& b) const
        {
            if (shortlex_less(a.key, b.key))
                return true;
            if (shortlex_less(b.key, a.key))
                return false;
            return a.node < b.node;
        }
    };

    [[nodiscard]] const Edge* find_edge(NodeId n, InputSymbol a) const;
    [[nodiscard]] const BlueEntry& blue_entry(NodeId blue) const;
    void add_blue(NodeId parent, InputSymbol a, NodeId node);
    void index_red_edge(NodeId red, const Edge& e);

    class OverlayStore;
    class DirectStore;
    template <class Store>
    static bool fold(Store& store, NodeId red, NodeId blue);

    std::size_t num_inputs_;
    std::size_t num_outputs_;
    std::vector<std::vector<Edge>> edges_; // sorted by input
    std::vector<char> red_flag_;
    std::vector<NodeId> red_;              // sorted by access word
    std::vector<Word> red_access_;         // indexed by node; filled for red nodes
    using BlueSet = std::set<BlueEntry, BlueOrder>;
    BlueSet blue_;
    std::vector<BlueSet::const_iterator> blue_iter_; // indexed by node; valid while blue_flag_ is set
    std::vector<char> blue_flag_;
    // (input, output) -> red states with such an edge; only ever grows
    std::unordered_map<std::uint64_t, std::vector<NodeId>> red_index_;
    // reused by the gate checks
    mutable std::vector<std::tuple<NodeId, NodeId, std::size_t>> agree_stack_;
    mutable std::vector<std::pair<NodeId, std::size_t>> height_stack_;
};

/// Red-blue RPNI for Mealy machines with an evidence gate: a blue state merges
/// into the first compatible red state (shortlex order) whose agreement depth
/// reaches min(min_depth, height of the blue subtree); otherwise it is
/// promoted. min_depth = 0 is classical RPNI. The result is consistent with d.
MealyMachine rpni(const SampleSet& d, std::size_t min_depth);

/// rpni() wrapped as an FSRS over the given alphabets, states named m0, m1, ...
Fsrs learn_fsrs(const SampleSet& d, std::size_t min_depth, const Alphabet& cont, const Alphabet& env,
                const Alphabet& out);

/// Episode lengths experienced so far plus the bounds of the adaptive gate.
struct RunLog {
    std::vector<std::size_t> lengths;
    std::size_t max_ep_len = 1;
    std::size_t min_depth_max = 5;

    /// Throws UsageError unless 1 <= len <= max_ep_len.
    void add(std::size_t len);
};

/// floor(min(|R| * ceil(MaxEpLen - mean) / sum, MinDepth_max)) in exact
/// integer arithmetic; an empty log yields MinDepth_max.
std::size_t adaptive_min_depth(const RunLog& log);

// ---------------------------------------------------------------------------

template <class F>
void SampleSet::for_each(F&& f) const
{
    std::vector<std::pair<NodeId, Word>> level{{0, {}}};
    while (!level.empty()) {
        std::vector<std::pair<NodeId, Word>> next;
        for (auto& [n, w] : level) {
            if (n != 0 && nodes_[n].output != kNoSymbol)
                f(static_cast<const Word&>(w), nodes_[n].output);
            for (auto [a, c] : nodes_[n].children) {
                Word cw = w;
                cw.push_back(a);
                next.emplace_back(c, std::move(cw));
            }
        }
        level = std::move(next);
    }
}

} // namespace dynshield
