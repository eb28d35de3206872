#include "dynshield/alphabet.hpp"

#include "dynshield/errors.hpp"

#include <cctype>

namespace dynshield {

bool is_valid_name(std::string_view name)
{
    if (name.empty())
        return false;
    for (char c : name) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == '#')
            return false;
    }
    return true;
}

Alphabet::Alphabet(std::vector<std::string> names) : names_(std::move(names))
{
    if (names_.empty())
        throw AlphabetError("alphabet must not be empty");
    for (Symbol i = 0; i < names_.size(); ++i) {
        if (!is_valid_name(names_[i]))
            throw AlphabetError("invalid symbol name '" + names_[i] + "'");
        if (!index_.emplace(names_[i], i).second)
            throw AlphabetError("duplicate symbol '" + names_[i] + "'");
    }
}

const std::string& Alphabet::name(Symbol s) const
{
    if (!contains(s))
        throw AlphabetError("symbol index " + std::to_string(s) + " out of range");
    return names_[s];
}

Symbol Alphabet::index(std::string_view name) const
{
    auto it = index_.find(name);
    if (it == index_.end())
        throw AlphabetError("unknown symbol '" + std::string(name) + "'");
    return it->second;
}

std::optional<Symbol> Alphabet::find(std::string_view name) const
{
    auto it = index_.find(name);
    if (it == index_.end())
        return std::nullopt;
    return it->second;
}

} // namespace dynshield
