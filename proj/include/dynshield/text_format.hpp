#pragma once

#include "dynshield/fsrs.hpp"
#include "dynshield/safety_automaton.hpp"
#include "dynshield/trace.hpp"

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dynshield {

// Line-based UTF-8 formats; '#' starts a comment, tokens are separated by
// whitespace. Every parser throws ParseError carrying the offending line.
//
//   fsrs v1                      spec v1                 ep
//   cont a b ...                 sigma o p ...           s <cont> <env> <out>
//   env x y ...                  [states s0 s1 ...]      ...
//   out o p ...                  init s0                 ep
//   [states l0 l1 ...]           unsafe bad ...          ...
//   init l0                      t <src> <sym> <dst>
//   t <src> <cont> <env> <dst> <out>
//
// The optional `states` line fixes state order; without it states are
// numbered by first appearance. A trace file may start with `cont`/`env`/`out`
// declarations; otherwise alphabets are collected in order of first use.

Fsrs parse_fsrs(std::string_view text);
std::string serialize_fsrs(const Fsrs& m);

SafetyAutomaton parse_spec(std::string_view text);
std::string serialize_spec(const SafetyAutomaton& spec);

struct TraceFile {
    Alphabet cont; // empty (size 0) when the file declares and uses no symbols
    Alphabet env;
    Alphabet out;
    std::vector<Episode> episodes;
};

TraceFile parse_trace(std::string_view text);
std::string serialize_trace(const Alphabet& cont, const Alphabet& env, const Alphabet& out,
                            const std::vector<Episode>& episodes);

/// Graphviz output with states and edges in index order.
std::string to_dot(const Fsrs& m);
/// Unsafe states are drawn double-circled.
std::string to_dot(const SafetyAutomaton& spec);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Quotes a name for use as a DOT identifier.
std::string dot_quote(std::string_view s);

} // namespace dynshield
