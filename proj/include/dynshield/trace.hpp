#pragma once

#include "dynshield/alphabet.hpp"

#include <vector>

namespace dynshield {

struct TraceStep {
    ContAction cont;
    EnvAction env;
    OutputSymbol out;

    friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

using Episode = std::vector<TraceStep>;

} // namespace dynshield
