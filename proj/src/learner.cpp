#include "dynshield/learner.hpp"

#include "dynshield/errors.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>
#include <string>
#include <unordered_map>

namespace dynshield {

// ---------------------------------------------------------------- SampleSet

SampleSet::SampleSet(std::size_t num_inputs, std::size_t num_outputs)
    : num_inputs_(num_inputs), num_outputs_(num_outputs), nodes_(1)
{
}

SampleSet::NodeId SampleSet::child(NodeId n, InputSymbol a) const
{
    const auto& ch = nodes_[n].children;
    auto it = std::lower_bound(ch.begin(), ch.end(), a, [](const auto& e, InputSymbol x) { return e.first < x; });
    if (it == ch.end() || it->first != a)
        return 0;
    return it->second;
}

SampleSet::NodeId SampleSet::child_or_insert(NodeId n, InputSymbol a)
{
    if (a >= num_inputs_)
        throw AlphabetError("input symbol " + std::to_string(a) + " out of range");
    auto& ch = nodes_[n].children;
    auto it = std::lower_bound(ch.begin(), ch.end(), a, [](const auto& e, InputSymbol x) { return e.first < x; });
    if (it != ch.end() && it->first == a)
        return it->second;
    auto id = static_cast<NodeId>(nodes_.size());
    ch.insert(it, {a, id});
    nodes_.emplace_back();
    return id;
}

void SampleSet::add(std::span<const InputSymbol> word, OutputSymbol out)
{
    if (word.empty())
        throw ValidationError("the empty word carries no output");
    if (out >= num_outputs_)
        throw AlphabetError("output symbol " + std::to_string(out) + " out of range");
    NodeId n = 0;
    for (InputSymbol a : word)
        n = child_or_insert(n, a);
    auto& slot = nodes_[n].output;
    if (slot == kNoSymbol) {
        slot = out;
        ++sampled_;
    } else if (slot != out) {
        throw ValidationError("output conflict on a word of length " + std::to_string(word.size()));
    }
}

void SampleSet::add_trace(std::span<const InputSymbol> inputs, std::span<const OutputSymbol> outputs)
{
    if (inputs.size() != outputs.size())
        throw ValidationError("trace inputs and outputs differ in length");
    NodeId n = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        if (outputs[i] >= num_outputs_)
            throw AlphabetError("output symbol " + std::to_string(outputs[i]) + " out of range");
        n = child_or_insert(n, inputs[i]);
        auto& slot = nodes_[n].output;
        if (slot == kNoSymbol) {
            slot = outputs[i];
            ++sampled_;
        } else if (slot != outputs[i]) {
            throw ValidationError("output conflict on a word of length " + std::to_string(i + 1));
        }
    }
}

std::optional<OutputSymbol> SampleSet::output(std::span<const InputSymbol> word) const
{
    NodeId n = 0;
    for (InputSymbol a : word) {
        n = child(n, a);
        if (n == 0)
            return std::nullopt;
    }
    if (n == 0 || nodes_[n].output == kNoSymbol)
        return std::nullopt;
    return nodes_[n].output;
}

std::optional<Word> SampleSet::orphan() const
{
    struct Item {
        NodeId node;
        Word word;
        bool chain_ok; // every non-empty proper prefix is sampled
    };
    std::vector<Item> level{{0, {}, true}};
    while (!level.empty()) {
        std::vector<Item> next;
        for (auto& it : level) {
            const Node& n = nodes_[it.node];
            if (it.node != 0 && n.output != kNoSymbol && !it.chain_ok)
                return it.word;
            bool child_ok = it.chain_ok && (it.node == 0 || n.output != kNoSymbol);
            for (auto [a, c] : n.children) {
                Word w = it.word;
                w.push_back(a);
                next.push_back({c, std::move(w), child_ok});
            }
        }
        level = std::move(next);
    }
    return std::nullopt;
}

bool operator==(const SampleSet& a, const SampleSet& b)
{
    if (a.num_inputs_ != b.num_inputs_ || a.num_outputs_ != b.num_outputs_ || a.sampled_ != b.sampled_)
        return false;
    std::vector<std::pair<Word, OutputSymbol>> wa, wb;
    a.for_each([&](const Word& w, OutputSymbol o) { wa.emplace_back(w, o); });
    b.for_each([&](const Word& w, OutputSymbol o) { wb.emplace_back(w, o); });
    return wa == wb;
}

// ---------------------------------------------------------------- Ptmm

namespace {

std::string word_string(const Word& w)
{
    std::string s = "[";
    for (std::size_t i = 0; i < w.size(); ++i)
        s += (i ? " " : "") + std::to_string(w[i]);
    return s + "]";
}

} // namespace

Ptmm::Ptmm(const SampleSet& d) : num_inputs_(d.num_inputs()), num_outputs_(d.num_outputs())
{
    if (auto w = d.orphan())
        throw ValidationError("sample is not prefix-closed: orphaned word " + word_string(*w));

    const auto& trie = d.nodes();
    // BFS with children in input order numbers nodes in shortlex order.
    std::vector<SampleSet::NodeId> order{0};
    children_.emplace_back();
    parent_.push_back(kNoState);
    via_.push_back(kNoSymbol);
    for (std::size_t i = 0; i < order.size(); ++i) {
        for (auto [a, c] : trie[order[i]].children) {
            auto id = static_cast<StateId>(order.size());
            order.push_back(c);
            children_[i].push_back({a, id, trie[c].output});
            children_.emplace_back();
            parent_.push_back(static_cast<StateId>(i));
            via_.push_back(a);
        }
    }
    height_.assign(order.size(), 0);
    for (std::size_t i = order.size(); i-- > 1;)
        height_[parent_[i]] = std::max(height_[parent_[i]], height_[i] + 1);
}

Word Ptmm::access_word(StateId s) const
{
    Word w;
    for (StateId n = s; n != 0; n = parent_.at(n))
        w.push_back(via_[n]);
    std::reverse(w.begin(), w.end());
    return w;
}

MealyMachine Ptmm::machine() const
{
    MealyMachine m(num_states(), num_inputs_, num_outputs_, 0);
    for (StateId s = 0; s < num_states(); ++s) {
        for (const auto& e : children_[s])
            m.set_transition(s, e.input, e.target, e.output);
    }
    return m;
}

bool shortlex_less(std::span<const InputSymbol> a, std::span<const InputSymbol> b)
{
    if (a.size() != b.size())
        return a.size() < b.size();
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// ---------------------------------------------------------------- MergeHypothesis

// Writes straight into the hypothesis; new edges out of red states become blue.
class MergeHypothesis::DirectStore {
public:
    explicit DirectStore(MergeHypothesis& h) : h_(h) {}

    [[nodiscard]] const Edge* find(NodeId q, InputSymbol a) const { return h_.find_edge(q, a); }
    [[nodiscard]] const std::vector<Edge>& tree_edges(NodeId t) const { return h_.edges_[t]; }

    void add(NodeId q, const Edge& e)
    {
        auto& v = h_.edges_[q];
        auto it = std::lower_bound(v.begin(), v.end(), e.input,
                                   [](const Edge& x, InputSymbol a) { return x.input < a; });
        v.insert(it, e);
        if (h_.is_red(q)) {
            h_.index_red_edge(q, e);
            h_.add_blue(q, e.input, e.target);
        }
    }

private:
    MergeHypothesis& h_;
};

// Records the redirect and the added edges on the side, so a trial fold
// never touches the hypothesis.
class MergeHypothesis::OverlayStore {
public:
    OverlayStore(const MergeHypothesis& h, NodeId parent, InputSymbol input, NodeId red)
        : h_(h), parent_(parent), input_(input)
    {
        const Edge* e = h.find_edge(parent, input);
        redirect_ = {input, red, e->output};
    }

    [[nodiscard]] const Edge* find(NodeId q, InputSymbol a) const
    {
        if (q == parent_ && a == input_)
            return &redirect_;
        if (const Edge* e = h_.find_edge(q, a))
            return e;
        auto it = added_.find(q);
        if (it == added_.end())
            return nullptr;
        for (const auto& e : it->second) {
            if (e.input == a)
                return &e;
        }
        return nullptr;
    }

    [[nodiscard]] const std::vector<Edge>& tree_edges(NodeId t) const { return h_.edges_[t]; }

    void add(NodeId q, const Edge& e) { added_[q].push_back(e); }

private:
    const MergeHypothesis& h_;
    NodeId parent_;
    InputSymbol input_;
    Edge redirect_{};
    std::unordered_map<NodeId, std::vector<Edge>> added_;
};

template <class Store>
bool MergeHypothesis::fold(Store& store, NodeId red, NodeId blue)
{
    std::vector<std::pair<NodeId, NodeId>> stack{{red, blue}};
    std::vector<Edge> pending;
    while (!stack.empty()) {
        auto [q, t] = stack.back();
        stack.pop_back();
        pending = store.tree_edges(t);
        for (const Edge& e : pending) {
            if (const Edge* f = store.find(q, e.input)) {
                if (f->output != e.output)
                    return false;
                stack.emplace_back(f->target, e.target);
            } else {
                store.add(q, e);
            }
        }
    }
    return true;
}

MergeHypothesis::MergeHypothesis(const Ptmm& tree)
    : num_inputs_(tree.num_inputs()), num_outputs_(tree.num_outputs()), edges_(tree.num_states()),
      red_flag_(tree.num_states(), 0), red_{0}, red_access_(tree.num_states()),
      blue_iter_(tree.num_states()), blue_flag_(tree.num_states(), 0)
{
    for (StateId s = 0; s < tree.num_states(); ++s) {
        for (const auto& e : tree.children(s))
            edges_[s].push_back({e.input, e.target, e.output});
    }
    red_flag_[0] = 1;
    for (const auto& e : edges_[0]) {
        index_red_edge(0, e);
        add_blue(0, e.input, e.target);
    }
}

void MergeHypothesis::index_red_edge(NodeId red, const Edge& e)
{
    red_index_[std::uint64_t{e.input} * num_outputs_ + e.output].push_back(red);
}

const MergeHypothesis::Edge* MergeHypothesis::find_edge(NodeId n, InputSymbol a) const
{
    const auto& v = edges_[n];
    auto it = std::lower_bound(v.begin(), v.end(), a, [](const Edge& x, InputSymbol s) { return x.input < s; });
    if (it == v.end() || it->input != a)
        return nullptr;
    return &*it;
}

void MergeHypothesis::add_blue(NodeId parent, InputSymbol a, NodeId node)
{
    assert(!is_red(node) && !blue_flag_[node]);
    Word key = red_access_[parent];
    key.push_back(a);
    blue_iter_[node] = blue_.insert(BlueEntry{std::move(key), node, parent, a}).first;
    blue_flag_[node] = 1;
}

const MergeHypothesis::BlueEntry& MergeHypothesis::blue_entry(NodeId blue) const
{
    if (blue >= blue_flag_.size() || !blue_flag_[blue])
        throw std::logic_error("state " + std::to_string(blue) + " is not blue");
    return *blue_iter_[blue];
}

std::vector<MergeHypothesis::NodeId> MergeHypothesis::blue() const
{
    std::vector<NodeId> out;
    out.reserve(blue_.size());
    for (const auto& e : blue_)
        out.push_back(e.node);
    return out;
}

MergeHypothesis::NodeId MergeHypothesis::first_blue() const
{
    if (blue_.empty())
        throw std::logic_error("no blue state left");
    return blue_.begin()->node;
}

const Word& MergeHypothesis::access(NodeId n) const
{
    if (is_red(n))
        return red_access_[n];
    return blue_entry(n).key;
}

bool MergeHypothesis::compatible(NodeId red, NodeId blue) const
{
    if (!is_red(red))
        throw std::logic_error("state " + std::to_string(red) + " is not red");
    const BlueEntry& b = blue_entry(blue);
    OverlayStore store(*this, b.parent, b.input, red);
    return fold(store, red, blue);
}

std::size_t MergeHypothesis::agreement_depth(NodeId red, NodeId blue) const
{
    std::size_t best = 0;
    std::vector<std::tuple<NodeId, NodeId, std::size_t>> stack{{red, blue, 0}};
    while (!stack.empty()) {
        auto [q, t, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        for (const Edge& e : edges_[t]) {
            const Edge* f = find_edge(q, e.input);
            if (f && f->output == e.output)
                stack.emplace_back(f->target, e.target, d + 1);
        }
    }
    return best;
}

bool MergeHypothesis::has_agreement(NodeId red, NodeId blue, std::size_t depth) const
{
    if (depth == 0)
        return true;
    auto& stack = agree_stack_;
    stack.assign(1, {red, blue, 0});
    while (!stack.empty()) {
        auto [q, t, d] = stack.back();
        stack.pop_back();
        for (const Edge& e : edges_[t]) {
            const Edge* f = find_edge(q, e.input);
            if (!f || f->output != e.output)
                continue;
            if (d + 1 >= depth)
                return true;
            stack.emplace_back(f->target, e.target, d + 1);
        }
    }
    return false;
}

std::size_t MergeHypothesis::subtree_height(NodeId blue) const
{
    std::size_t best = 0;
    auto& stack = height_stack_;
    stack.assign(1, {blue, 0});
    while (!stack.empty()) {
        auto [n, d] = stack.back();
        stack.pop_back();
        best = std::max(best, d);
        if (d > edges_.size())
            throw std::logic_error("cycle below the blue frontier");
        for (const Edge& e : edges_[n])
            stack.emplace_back(e.target, d + 1);
    }
    return best;
}

std::vector<MergeHypothesis::NodeId> MergeHypothesis::gate_candidates(NodeId blue, std::size_t depth) const
{
    if (depth == 0)
        return red_;
    // Any agreeing path starts with one of blue's own edges.
    std::vector<NodeId> out;
    for (const Edge& e : edges_[blue]) {
        auto it = red_index_.find(std::uint64_t{e.input} * num_outputs_ + e.output);
        if (it != red_index_.end())
            out.insert(out.end(), it->second.begin(), it->second.end());
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    std::erase_if(out, [&](NodeId r) { return !has_agreement(r, blue, depth); });
    std::sort(out.begin(), out.end(),
              [&](NodeId a, NodeId b) { return shortlex_less(red_access_[a], red_access_[b]); });
    return out;
}

void MergeHypothesis::merge(NodeId red, NodeId blue)
{
    if (!is_red(red))
        throw std::logic_error("state " + std::to_string(red) + " is not red");
    const BlueEntry entry = blue_entry(blue);
    blue_.erase(blue_iter_[blue]);
    blue_flag_[blue] = 0;

    auto& v = edges_[entry.parent];
    auto it = std::lower_bound(v.begin(), v.end(), entry.input,
                               [](const Edge& x, InputSymbol a) { return x.input < a; });
    it->target = red;

    DirectStore store(*this);
    if (!fold(store, red, blue))
        throw std::logic_error("fold conflict while merging compatible states");
}

void MergeHypothesis::promote(NodeId blue)
{
    const BlueEntry entry = blue_entry(blue);
    blue_.erase(blue_iter_[blue]);
    blue_flag_[blue] = 0;
    red_flag_[blue] = 1;
    red_access_[blue] = entry.key;
    auto pos = std::lower_bound(red_.begin(), red_.end(), blue, [&](NodeId a, NodeId b) {
        return shortlex_less(red_access_[a], red_access_[b]);
    });
    red_.insert(pos, blue);
    for (const Edge& e : edges_[blue]) {
        index_red_edge(blue, e);
        if (!is_red(e.target))
            add_blue(blue, e.input, e.target);
    }
}

MealyMachine MergeHypothesis::to_machine() const
{
    std::vector<StateId> index(edges_.size(), kNoState);
    for (std::size_t i = 0; i < red_.size(); ++i)
        index[red_[i]] = static_cast<StateId>(i);
    MealyMachine m(red_.size(), num_inputs_, num_outputs_, index[0]);
    for (NodeId r : red_) {
        for (const Edge& e : edges_[r]) {
            if (index[e.target] == kNoState)
                throw std::logic_error("hypothesis still has blue states");
            m.set_transition(index[r], e.input, index[e.target], e.output);
        }
    }
    return m;
}

// ---------------------------------------------------------------- rpni

namespace {

[[maybe_unused]] bool consistent_with(const MealyMachine& m, const SampleSet& d)
{
    bool ok = true;
    d.for_each([&](const Word& w, OutputSymbol o) {
        auto r = m.run(w);
        ok = ok && r && r->last_output == o;
    });
    return ok;
}

} // namespace

MealyMachine rpni(const SampleSet& d, std::size_t min_depth)
{
    Ptmm tree(d);
    MergeHypothesis h(tree);
    while (h.has_blue()) {
        const auto blue = h.first_blue();
        const std::size_t needed = std::min(min_depth, h.subtree_height(blue));
        bool merged = false;
        for (auto red : h.gate_candidates(blue, needed)) {
            if (h.compatible(red, blue)) {
                h.merge(red, blue);
                merged = true;
                break;
            }
        }
        if (!merged)
            h.promote(blue);
    }
    MealyMachine m = h.to_machine();
    assert(consistent_with(m, d));
    return m;
}

Fsrs learn_fsrs(const SampleSet& d, std::size_t min_depth, const Alphabet& cont, const Alphabet& env,
                const Alphabet& out)
{
    if (d.num_inputs() != cont.size() * env.size() || d.num_outputs() != out.size())
        throw AlphabetError("sample alphabet sizes do not match the declared alphabets");
    MealyMachine m = rpni(d, min_depth);
    std::vector<std::string> names;
    names.reserve(m.num_states());
    for (std::size_t i = 0; i < m.num_states(); ++i)
        names.push_back("m" + std::to_string(i));
    return Fsrs(cont, env, out, std::move(m), std::move(names));
}

// ---------------------------------------------------------------- MinDepth

void RunLog::add(std::size_t len)
{
    if (len < 1 || len > max_ep_len)
        throw UsageError("episode length " + std::to_string(len) + " outside [1, " + std::to_string(max_ep_len) +
                         "]");
    lengths.push_back(len);
}

std::size_t adaptive_min_depth(const RunLog& log)
{
    if (log.lengths.empty())
        return log.min_depth_max;
    const std::uint64_t runs = log.lengths.size();
    std::uint64_t total = 0;
    for (auto len : log.lengths)
        total += len;
    // ceil(MaxEpLen - total / runs) == MaxEpLen - floor(total / runs) for integral MaxEpLen.
    const std::uint64_t slack = log.max_ep_len - total / runs;
    const std::uint64_t value = runs * slack / total;
    return static_cast<std::size_t>(std::min<std::uint64_t>(value, log.min_depth_max));
}

} // namespace dynshield
