#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dynshield {

using Symbol = std::uint32_t;
using StateId = std::uint32_t;

// Symbols are positions in their alphabet; the declaration order is the
// canonical order used for every tie-break.
using ContAction = Symbol;
using EnvAction = Symbol;
using OutputSymbol = Symbol;
using InputSymbol = Symbol;

inline constexpr StateId kNoState = std::numeric_limits<StateId>::max();
inline constexpr Symbol kNoSymbol = std::numeric_limits<Symbol>::max();

/// A finite, non-empty, duplicate-free set of interned names.
class Alphabet {
public:
    Alphabet() = default;
    explicit Alphabet(std::vector<std::string> names);

    [[nodiscard]] std::size_t size() const { return names_.size(); }
    [[nodiscard]] bool contains(Symbol s) const { return s < names_.size(); }
    [[nodiscard]] const std::string& name(Symbol s) const;
    [[nodiscard]] Symbol index(std::string_view name) const;
    [[nodiscard]] std::optional<Symbol> find(std::string_view name) const;
    [[nodiscard]] const std::vector<std::string>& names() const { return names_; }

    friend bool operator==(const Alphabet& a, const Alphabet& b) { return a.names_ == b.names_; }

private:
    std::vector<std::string> names_;
    std::map<std::string, Symbol, std::less<>> index_;
};

/// True for non-empty names free of whitespace and '#', i.e. names that survive the text formats.
bool is_valid_name(std::string_view name);

} // namespace dynshield
