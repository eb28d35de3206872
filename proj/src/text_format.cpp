#include "dynshield/text_format.hpp"

#include "dynshield/errors.hpp"
#include "dynshield/shield.hpp"

#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace dynshield {

namespace {

struct Line {
    std::size_t number;
    std::vector<std::string> tokens;
};

std::vector<Line> tokenize(std::string_view text)
{
    std::vector<Line> lines;
    std::size_t number = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos)
            end = text.size();
        ++number;
        std::string_view raw = text.substr(pos, end - pos);
        if (auto hash = raw.find('#'); hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        std::istringstream in{std::string(raw)};
        Line line{number, {}};
        for (std::string tok; in >> tok;)
            line.tokens.push_back(std::move(tok));
        if (!line.tokens.empty())
            lines.push_back(std::move(line));
        pos = end + 1;
    }
    return lines;
}

Alphabet make_alphabet(const Line& line)
{
    try {
        return Alphabet(std::vector<std::string>(line.tokens.begin() + 1, line.tokens.end()));
    } catch (const AlphabetError& e) {
        throw ParseError(line.number, e.what());
    }
}

void expect_header(const std::vector<Line>& lines, std::string_view kind)
{
    if (lines.empty() || lines[0].tokens.size() != 2 || lines[0].tokens[0] != kind || lines[0].tokens[1] != "v1")
        throw ParseError(lines.empty() ? 1 : lines[0].number, "expected header '" + std::string(kind) + " v1'");
}

void expect_arity(const Line& line, std::size_t n)
{
    if (line.tokens.size() != n)
        throw ParseError(line.number, "'" + line.tokens[0] + "' expects " + std::to_string(n - 1) + " arguments");
}

Symbol lookup(const Alphabet& a, const std::string& name, const Line& line, std::string_view what)
{
    auto s = a.find(name);
    if (!s)
        throw ParseError(line.number, "unknown " + std::string(what) + " '" + name + "'");
    return *s;
}

/// State table shared by both automaton parsers.
class StateTable {
public:
    void declare(const Line& line)
    {
        if (declared_ || !names_.empty())
            throw ParseError(line.number, "'states' must appear once, before any state is used");
        declared_ = true;
        for (std::size_t i = 1; i < line.tokens.size(); ++i) {
            if (!index_.emplace(line.tokens[i], static_cast<StateId>(names_.size())).second)
                throw ParseError(line.number, "duplicate state '" + line.tokens[i] + "'");
            names_.push_back(line.tokens[i]);
        }
    }

    StateId get(const std::string& name, const Line& line)
    {
        if (auto it = index_.find(name); it != index_.end())
            return it->second;
        if (declared_)
            throw ParseError(line.number, "unknown state '" + name + "'");
        auto id = static_cast<StateId>(names_.size());
        index_.emplace(name, id);
        names_.push_back(name);
        return id;
    }

    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }

private:
    bool declared_ = false;
    std::vector<std::string> names_;
    std::map<std::string, StateId> index_;
};

void append_joined(std::string& out, std::string_view keyword, const std::vector<std::string>& items)
{
    out += keyword;
    for (const auto& it : items) {
        out += ' ';
        out += it;
    }
    out += '\n';
}

} // namespace

Fsrs parse_fsrs(std::string_view text)
{
    auto lines = tokenize(text);
    expect_header(lines, "fsrs");

    std::optional<Alphabet> cont, env, out;
    std::optional<StateId> init;
    StateTable states;
    struct Pending {
        StateId src, dst;
        Symbol c, e, o;
        std::size_t line;
    };
    std::vector<Pending> trans;

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const Line& l = lines[i];
        const std::string& kw = l.tokens[0];
        auto declare_once = [&](std::optional<Alphabet>& slot) {
            if (slot)
                throw ParseError(l.number, "duplicate '" + kw + "' declaration");
            slot = make_alphabet(l);
        };
        if (kw == "cont") {
            declare_once(cont);
        } else if (kw == "env") {
            declare_once(env);
        } else if (kw == "out") {
            declare_once(out);
        } else if (kw == "states") {
            states.declare(l);
        } else if (kw == "init") {
            expect_arity(l, 2);
            if (init)
                throw ParseError(l.number, "duplicate 'init'");
            init = states.get(l.tokens[1], l);
        } else if (kw == "t") {
            expect_arity(l, 6);
            if (!cont || !env || !out)
                throw ParseError(l.number, "transition before 'cont', 'env' and 'out' are declared");
            Pending p{states.get(l.tokens[1], l),
                      states.get(l.tokens[4], l),
                      lookup(*cont, l.tokens[2], l, "cont action"),
                      lookup(*env, l.tokens[3], l, "env action"),
                      lookup(*out, l.tokens[5], l, "output symbol"),
                      l.number};
            trans.push_back(p);
        } else {
            throw ParseError(l.number, "unknown keyword '" + kw + "'");
        }
    }
    std::size_t last = lines.back().number;
    if (!cont || !env || !out)
        throw ParseError(last, "missing 'cont', 'env' or 'out' declaration");
    if (!init)
        throw ParseError(last, "missing 'init'");

    Fsrs m(*cont, *env, *out, states.names(), *init);
    for (const auto& p : trans) {
        try {
            m.set_transition(p.src, p.c, p.e, p.dst, p.o);
        } catch (const ValidationError& e) {
            throw ParseError(p.line, e.what());
        }
    }
    return m;
}

std::string serialize_fsrs(const Fsrs& m)
{
    std::string s = "fsrs v1\n";
    append_joined(s, "cont", m.cont().names());
    append_joined(s, "env", m.env().names());
    append_joined(s, "out", m.out().names());
    append_joined(s, "states", m.state_names());
    s += "init " + m.state_name(m.initial()) + "\n";
    const auto& mm = m.machine();
    for (StateId q = 0; q < m.num_states(); ++q) {
        for (InputSymbol a = 0; a < mm.num_inputs(); ++a) {
            const auto& c = mm.cell(q, a);
            if (c.target == kNoState)
                continue;
            s += "t " + m.state_name(q) + ' ' + m.cont().name(m.cont_of(a)) + ' ' + m.env().name(m.env_of(a)) + ' ' +
                 m.state_name(c.target) + ' ' + m.out().name(c.output) + '\n';
        }
    }
    return s;
}

SafetyAutomaton parse_spec(std::string_view text)
{
    auto lines = tokenize(text);
    expect_header(lines, "spec");

    std::optional<Alphabet> sigma;
    std::optional<StateId> init;
    std::size_t init_line = 0;
    StateTable states;
    std::vector<std::pair<StateId, std::size_t>> unsafe; // state, line
    struct Pending {
        StateId src;
        Symbol a;
        StateId dst;
        std::size_t line;
    };
    std::vector<Pending> trans;

    for (std::size_t i = 1; i < lines.size(); ++i) {
        const Line& l = lines[i];
        const std::string& kw = l.tokens[0];
        if (kw == "sigma") {
            if (sigma)
                throw ParseError(l.number, "duplicate 'sigma' declaration");
            sigma = make_alphabet(l);
        } else if (kw == "states") {
            states.declare(l);
        } else if (kw == "init") {
            expect_arity(l, 2);
            if (init)
                throw ParseError(l.number, "duplicate 'init'");
            init = states.get(l.tokens[1], l);
            init_line = l.number;
        } else if (kw == "unsafe") {
            for (std::size_t k = 1; k < l.tokens.size(); ++k)
                unsafe.emplace_back(states.get(l.tokens[k], l), l.number);
        } else if (kw == "t") {
            expect_arity(l, 4);
            if (!sigma)
                throw ParseError(l.number, "transition before 'sigma' is declared");
            trans.push_back({states.get(l.tokens[1], l), lookup(*sigma, l.tokens[2], l, "symbol"),
                             states.get(l.tokens[3], l), l.number});
        } else {
            throw ParseError(l.number, "unknown keyword '" + kw + "'");
        }
    }
    std::size_t last = lines.back().number;
    if (!sigma)
        throw ParseError(last, "missing 'sigma' declaration");
    if (!init)
        throw ParseError(last, "missing 'init'");

    const std::size_t n = states.names().size();
    const std::size_t k = sigma->size();
    std::vector<bool> safe(n, true);
    for (auto [q, line] : unsafe)
        safe[q] = false;
    std::vector<StateId> next(n * k, kNoState);
    for (const auto& p : trans) {
        auto& cell = next[p.src * k + p.a];
        if (cell != kNoState)
            throw ParseError(p.line, "nondeterministic transition");
        if (!safe[p.src] && safe[p.dst])
            throw ParseError(p.line, "unsafe region not absorbing");
        cell = p.dst;
    }
    if (!safe[*init])
        throw ParseError(init_line, "initial state is unsafe");
    for (std::size_t i = 0; i < next.size(); ++i) {
        if (next[i] == kNoState)
            throw ParseError(last, "transition map not total: state '" + states.names()[i / k] + "', symbol '" +
                                       sigma->name(static_cast<Symbol>(i % k)) + "'");
    }
    try {
        return SafetyAutomaton(*sigma, states.names(), *init, std::move(safe), std::move(next));
    } catch (const ValidationError& e) {
        throw ParseError(last, e.what());
    }
}

std::string serialize_spec(const SafetyAutomaton& spec)
{
    std::string s = "spec v1\n";
    append_joined(s, "sigma", spec.sigma().names());
    append_joined(s, "states", spec.state_names());
    s += "init " + spec.state_name(spec.initial()) + "\n";
    std::vector<std::string> unsafe;
    for (StateId q = 0; q < spec.num_states(); ++q) {
        if (!spec.is_safe(q))
            unsafe.push_back(spec.state_name(q));
    }
    if (!unsafe.empty())
        append_joined(s, "unsafe", unsafe);
    for (StateId q = 0; q < spec.num_states(); ++q) {
        for (OutputSymbol a = 0; a < spec.sigma().size(); ++a)
            s += "t " + spec.state_name(q) + ' ' + spec.sigma().name(a) + ' ' + spec.state_name(spec.next(q, a)) +
                 '\n';
    }
    return s;
}

namespace {

/// Collects an alphabet either from a declaration or from first use.
class AlphabetCollector {
public:
    void declare(const Line& l)
    {
        if (declared_ || !names_.empty())
            throw ParseError(l.number, "'" + l.tokens[0] + "' must be declared once, before any step");
        declared_ = true;
        Alphabet a = make_alphabet(l);
        names_ = a.names();
        for (Symbol i = 0; i < names_.size(); ++i)
            index_.emplace(names_[i], i);
    }

    Symbol get(const std::string& name, const Line& l, std::string_view what)
    {
        if (auto it = index_.find(name); it != index_.end())
            return it->second;
        if (declared_)
            throw ParseError(l.number, "unknown " + std::string(what) + " '" + name + "'");
        if (!is_valid_name(name))
            throw ParseError(l.number, "invalid symbol '" + name + "'");
        auto id = static_cast<Symbol>(names_.size());
        index_.emplace(name, id);
        names_.push_back(name);
        return id;
    }

    [[nodiscard]] Alphabet build() const { return names_.empty() ? Alphabet() : Alphabet(names_); }

private:
    bool declared_ = false;
    std::vector<std::string> names_;
    std::map<std::string, Symbol> index_;
};

} // namespace

TraceFile parse_trace(std::string_view text)
{
    auto lines = tokenize(text);
    AlphabetCollector cont, env, out;
    TraceFile file;
    bool open = false;
    for (const auto& l : lines) {
        const std::string& kw = l.tokens[0];
        if (kw == "cont") {
            cont.declare(l);
        } else if (kw == "env") {
            env.declare(l);
        } else if (kw == "out") {
            out.declare(l);
        } else if (kw == "ep") {
            expect_arity(l, 1);
            file.episodes.emplace_back();
            open = true;
        } else if (kw == "s") {
            expect_arity(l, 4);
            if (!open)
                throw ParseError(l.number, "step outside an 'ep' block");
            file.episodes.back().push_back({cont.get(l.tokens[1], l, "cont action"),
                                            env.get(l.tokens[2], l, "env action"),
                                            out.get(l.tokens[3], l, "output symbol")});
        } else {
            throw ParseError(l.number, "unknown keyword '" + kw + "'");
        }
    }
    file.cont = cont.build();
    file.env = env.build();
    file.out = out.build();
    return file;
}

std::string serialize_trace(const Alphabet& cont, const Alphabet& env, const Alphabet& out,
                            const std::vector<Episode>& episodes)
{
    std::string s;
    append_joined(s, "cont", cont.names());
    append_joined(s, "env", env.names());
    append_joined(s, "out", out.names());
    for (const auto& ep : episodes) {
        s += "ep\n";
        for (const auto& st : ep)
            s += "s " + cont.name(st.cont) + ' ' + env.name(st.env) + ' ' + out.name(st.out) + '\n';
    }
    return s;
}

std::string dot_quote(std::string_view s)
{
    std::string q = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\')
            q += '\\';
        q += c;
    }
    q += '"';
    return q;
}

std::string to_dot(const Fsrs& m)
{
    std::ostringstream os;
    os << "digraph fsrs {\n  rankdir=LR;\n  __start [shape=point];\n";
    for (StateId q = 0; q < m.num_states(); ++q)
        os << "  " << dot_quote(m.state_name(q)) << " [shape=circle];\n";
    os << "  __start -> " << dot_quote(m.state_name(m.initial())) << ";\n";
    const auto& mm = m.machine();
    for (StateId q = 0; q < m.num_states(); ++q) {
        for (InputSymbol a = 0; a < mm.num_inputs(); ++a) {
            const auto& c = mm.cell(q, a);
            if (c.target == kNoState)
                continue;
            os << "  " << dot_quote(m.state_name(q)) << " -> " << dot_quote(m.state_name(c.target)) << " [label="
               << dot_quote(m.cont().name(m.cont_of(a)) + "," + m.env().name(m.env_of(a)) + "/" +
                            m.out().name(c.output))
               << "];\n";
        }
    }
    os << "}\n";
    return os.str();
}

std::string to_dot(const SafetyAutomaton& spec)
{
    std::ostringstream os;
    os << "digraph spec {\n  rankdir=LR;\n  __start [shape=point];\n";
    for (StateId q = 0; q < spec.num_states(); ++q)
        os << "  " << dot_quote(spec.state_name(q)) << " [shape=" << (spec.is_safe(q) ? "circle" : "doublecircle")
           << "];\n";
    os << "  __start -> " << dot_quote(spec.state_name(spec.initial())) << ";\n";
    for (StateId q = 0; q < spec.num_states(); ++q) {
        for (OutputSymbol a = 0; a < spec.sigma().size(); ++a)
            os << "  " << dot_quote(spec.state_name(q)) << " -> " << dot_quote(spec.state_name(spec.next(q, a)))
               << " [label=" << dot_quote(spec.sigma().name(a)) << "];\n";
    }
    os << "}\n";
    return os.str();
}

std::string serialize_shield(const ShieldListing& l)
{
    std::string s = "shield v1\n";
    append_joined(s, "cont", l.cont.names());
    s += "init " + l.init + "\n";
    for (const auto& [state, set] : l.allow) {
        s += "allow " + state + " ";
        if (set == 0) {
            s += "-";
        } else {
            bool first = true;
            for (ContAction c : action_list(set)) {
                if (!first)
                    s += "+";
                s += l.cont.name(c);
                first = false;
            }
        }
        s += "\n";
    }
    return s;
}

ShieldListing parse_shield(std::string_view text)
{
    auto lines = tokenize(text);
    expect_header(lines, "shield");
    ShieldListing l;
    bool have_cont = false, have_init = false;
    std::map<std::string, bool> states;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        const Line& line = lines[i];
        const std::string& kw = line.tokens[0];
        if (kw == "cont") {
            if (have_cont)
                throw ParseError(line.number, "duplicate 'cont' line");
            l.cont = make_alphabet(line);
            if (l.cont.size() > kMaxContActions)
                throw ParseError(line.number, "too many cont actions");
            have_cont = true;
        } else if (kw == "init") {
            expect_arity(line, 2);
            if (have_init)
                throw ParseError(line.number, "duplicate 'init' line");
            l.init = line.tokens[1];
            have_init = true;
        } else if (kw == "allow") {
            expect_arity(line, 3);
            if (!have_cont)
                throw ParseError(line.number, "'allow' before 'cont'");
            if (!states.emplace(line.tokens[1], true).second)
                throw ParseError(line.number, "duplicate state '" + line.tokens[1] + "'");
            ActionSet set = 0;
            const std::string& spec = line.tokens[2];
            if (spec != "-") {
                std::size_t pos = 0;
                while (pos <= spec.size()) {
                    std::size_t end = spec.find('+', pos);
                    if (end == std::string::npos)
                        end = spec.size();
                    Symbol c = lookup(l.cont, spec.substr(pos, end - pos), line, "cont action");
                    if (has_action(set, c))
                        throw ParseError(line.number, "action listed twice");
                    set |= ActionSet{1} << c;
                    pos = end + 1;
                }
            }
            l.allow.emplace_back(line.tokens[1], set);
        } else {
            throw ParseError(line.number, "unknown keyword '" + kw + "'");
        }
    }
    std::size_t last = lines.empty() ? 1 : lines.back().number;
    if (!have_cont)
        throw ParseError(last, "missing 'cont' line");
    if (!have_init)
        throw ParseError(last, "missing 'init' line");
    if (!states.count(l.init))
        throw ParseError(last, "initial state '" + l.init + "' has no 'allow' line");
    return l;
}

std::string read_text_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write '" + path.string() + "'");
    out << text;
}

} // namespace dynshield
