#include "dynshield/envs/gridworld.hpp"

namespace dynshield {

namespace {

constexpr int kCells = GridWorld::kSize * GridWorld::kSize;
// N, S, E, W, stay
constexpr int kDr[] = {-1, 1, 0, 0, 0};
constexpr int kDc[] = {0, 0, 1, -1, 0};

int find_cell(char ch)
{
    for (int r = 0; r < GridWorld::kSize; ++r)
        for (int c = 0; c < GridWorld::kSize; ++c)
            if (GridWorld::kMap[r][c] == ch)
                return r * GridWorld::kSize + c;
    return -1;
}

int moved(int cell, unsigned dir)
{
    return cell + kDr[dir] * GridWorld::kSize + kDc[dir];
}

bool wall(int cell)
{
    return GridWorld::is_wall(cell / GridWorld::kSize, cell % GridWorld::kSize);
}

std::string cell_name(int cell)
{
    return std::to_string(cell / GridWorld::kSize) + std::to_string(cell % GridWorld::kSize);
}

Alphabet out_alphabet()
{
    return Alphabet({"ok", "wall", "crash", "wall_crash", "goal"});
}

} // namespace

GridWorld::GridWorld()
    : Environment(Alphabet({"N", "S", "E", "W"}), Alphabet({"n", "s", "e", "w", "stay"}), out_alphabet())
{
}

SafetyAutomaton GridWorld::spec() const
{
    return gridworld_spec();
}

Environment::Key GridWorld::start_key() const
{
    return encode(find_cell('S'), find_cell('E'));
}

std::size_t GridWorld::reset(Rng&)
{
    begin(start_key());
    return rl_state();
}

std::optional<Environment::Outcome> GridWorld::apply(Key k, ContAction a, EnvAction e) const
{
    const int ego = static_cast<int>(k / kCells);
    const int other = static_cast<int>(k % kCells);
    const int other_next = moved(other, e);
    if (wall(other_next))
        return std::nullopt;
    int ego_next = moved(ego, a);
    const bool hit_wall = wall(ego_next);
    if (hit_wall)
        ego_next = ego;
    const bool crash = ego_next == other_next;
    Out o = Ok;
    if (hit_wall && crash)
        o = WallCrash;
    else if (hit_wall)
        o = Wall;
    else if (crash)
        o = Crash;
    else if (ego_next == find_cell('G'))
        o = Goal;
    const bool undesired = hit_wall || crash;
    double reward = undesired ? -1.0 : (o == Goal ? 1.0 : -0.01);
    return Outcome{encode(ego_next, other_next), o, reward, undesired || o == Goal, undesired};
}

std::string GridWorld::key_name(Key k) const
{
    return "g" + cell_name(static_cast<int>(k / kCells)) + "_" + cell_name(static_cast<int>(k % kCells));
}

std::size_t GridWorld::rl_state() const
{
    auto inner = [](int cell) { return static_cast<std::size_t>((cell / kSize - 1) * 5 + (cell % kSize - 1)); };
    return inner(static_cast<int>(key_ / kCells)) * 25 + inner(static_cast<int>(key_ % kCells));
}

EnvAction GridWorld::sample_env(ContAction, Rng& rng)
{
    const int other = static_cast<int>(key_ % kCells);
    EnvAction legal[5];
    int n = 0;
    for (EnvAction d = 0; d < 5; ++d)
        if (!wall(moved(other, d)))
            legal[n++] = d;
    return legal[std::uniform_int_distribution<int>(0, n - 1)(rng)];
}

SafetyAutomaton gridworld_spec()
{
    return never_spec(out_alphabet(), [](const std::string& o) { return o != "ok" && o != "goal"; });
}

} // namespace dynshield
