#include "dynshield/harness.hpp"

#include "dynshield/errors.hpp"
#include "dynshield/text_format.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <regex>
#include <set>
#include <sstream>

namespace dynshield {

namespace {

std::string trim(std::string_view s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& v)
{
    T out{};
    auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || end != v.data() + v.size())
        throw ValidationError(key + ": '" + v + "' is not a valid number");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v)
{
    if (v == "true" || v == "1" || v == "yes" || v == "on")
        return true;
    if (v == "false" || v == "0" || v == "no" || v == "off")
        return false;
    throw ValidationError(key + ": '" + v + "' is not a boolean");
}

std::string format_double(double v)
{
    std::array<char, 64> buf{};
    auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), end);
}

} // namespace

std::size_t default_steps(const std::string& env)
{
    return env == "gridworld" ? 100000 : 50000;
}

std::size_t ExperimentConfig::steps() const
{
    return total_steps != 0 ? total_steps : default_steps(env);
}

TrainConfig ExperimentConfig::train_config() const
{
    TrainConfig t;
    t.total_steps = steps();
    t.eval_interval = eval_interval;
    t.eval_episodes = eval_episodes;
    t.q = q;
    t.policy = policy;
    t.shielded_eval = shielded_eval;
    t.masked_target = masked_target;
    return t;
}

void ExperimentConfig::validate() const
{
    make_environment(env);
    if (modes.empty())
        throw ValidationError("no mode selected");
    if (seeds.empty())
        throw ValidationError("no seeds given");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
        throw ValidationError("seeds must be distinct");
    if (jobs < 1)
        throw ValidationError("jobs must be at least 1");
    train_config().validate();
    for (const auto* p : {&truth, &spec, &model}) {
        if (*p && !std::filesystem::exists(**p))
            throw ValidationError("no such file: " + (*p)->string());
    }
}

std::vector<std::uint64_t> parse_seeds(const std::string& s)
{
    std::vector<std::uint64_t> out;
    std::stringstream ss(s);
    std::string piece;
    while (std::getline(ss, piece, ',')) {
        piece = trim(piece);
        if (piece.empty())
            throw ValidationError("seeds: empty entry in '" + s + "'");
        auto dash = piece.find('-');
        if (dash == std::string::npos) {
            out.push_back(parse_number<std::uint64_t>("seeds", piece));
            continue;
        }
        auto lo = parse_number<std::uint64_t>("seeds", trim(piece.substr(0, dash)));
        auto hi = parse_number<std::uint64_t>("seeds", trim(piece.substr(dash + 1)));
        if (hi < lo)
            throw ValidationError("seeds: empty range '" + piece + "'");
        for (auto k = lo; k <= hi; ++k)
            out.push_back(k);
    }
    if (out.empty())
        throw ValidationError("seeds: nothing given");
    return out;
}

std::vector<Mode> parse_modes(const std::string& s)
{
    if (s == "both")
        return {Mode::Plain, Mode::Shielded};
    return {parse_mode(s)};
}

void apply_setting(ExperimentConfig& cfg, const std::string& key, const std::string& value)
{
    if (key == "env")
        cfg.env = value;
    else if (key == "mode")
        cfg.modes = parse_modes(value);
    else if (key == "steps")
        cfg.total_steps = parse_number<std::size_t>(key, value);
    else if (key == "eval-interval")
        cfg.eval_interval = parse_number<std::size_t>(key, value);
    else if (key == "eval-episodes")
        cfg.eval_episodes = parse_number<std::size_t>(key, value);
    else if (key == "seeds")
        cfg.seeds = parse_seeds(value);
    else if (key == "alpha")
        cfg.q.alpha = parse_number<double>(key, value);
    else if (key == "gamma")
        cfg.q.gamma = parse_number<double>(key, value);
    else if (key == "epsilon-start")
        cfg.q.epsilon_start = parse_number<double>(key, value);
    else if (key == "epsilon-end")
        cfg.q.epsilon_end = parse_number<double>(key, value);
    else if (key == "epsilon-decay")
        cfg.q.decay_fraction = parse_number<double>(key, value);
    else if (key == "min-new-steps")
        cfg.policy.min_new_steps = parse_number<std::size_t>(key, value);
    else if (key == "rebuild-on-undesired")
        cfg.policy.rebuild_on_undesired = parse_bool(key, value);
    else if (key == "min-depth-cap")
        cfg.policy.min_depth_cap = parse_number<std::size_t>(key, value);
    else if (key == "shielded-eval")
        cfg.shielded_eval = parse_bool(key, value);
    else if (key == "masked-target")
        cfg.masked_target = parse_bool(key, value);
    else if (key == "out")
        cfg.out_dir = value;
    else if (key == "truth")
        cfg.truth = value;
    else if (key == "spec")
        cfg.spec = value;
    else if (key == "model")
        cfg.model = value;
    else if (key == "jobs")
        cfg.jobs = parse_number<int>(key, value);
    else
        throw ValidationError("unknown setting '" + key + "'");
}

ExperimentConfig parse_config(std::string_view text, ExperimentConfig base)
{
    std::size_t lineno = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++lineno;
        if (auto hash = raw.find('#'); hash != std::string_view::npos)
            raw = raw.substr(0, hash);
        std::string line = trim(raw);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError(lineno, "expected key=value");
        std::string key = trim(std::string_view(line).substr(0, eq));
        std::string value = trim(std::string_view(line).substr(eq + 1));
        try {
            apply_setting(base, key, value);
        } catch (const ValidationError& e) {
            throw ParseError(lineno, e.what());
        }
    }
    return base;
}

ExperimentConfig load_config(const std::filesystem::path& path, ExperimentConfig base)
{
    return parse_config(read_text_file(path), std::move(base));
}

std::string run_file_name(const std::string& env, Mode mode, std::uint64_t seed)
{
    return env + "_" + mode_name(mode) + "_seed" + std::to_string(seed) + ".csv";
}

RunSummary summarize_rows(const std::vector<MetricsRow>& rows)
{
    RunSummary s;
    s.episodes = rows.size();
    if (!rows.empty()) {
        s.seed = rows.back().seed;
        s.undesired_episodes = rows.back().undesired_cum;
        s.rebuilds = rows.back().rebuild_count;
    }
    for (const auto& r : rows) {
        if (!r.eval_mean_reward)
            continue;
        if (!s.best_mean_reward || *r.eval_mean_reward > *s.best_mean_reward) {
            s.best_mean_reward = r.eval_mean_reward;
            s.best_safe_rate = r.eval_safe_rate;
        }
    }
    return s;
}

RunSummary summarize_run(const std::filesystem::path& csv)
{
    static const std::regex name_re(R"(([a-z]+)_([a-z]+)_seed([0-9]+)\.csv)");
    std::smatch m;
    const std::string file = csv.filename().string();
    if (!std::regex_match(file, m, name_re))
        throw ValidationError("cannot read env/mode/seed from file name '" + file + "'");
    std::ifstream in(csv);
    if (!in)
        throw ValidationError("cannot open " + csv.string());
    RunSummary s = summarize_rows(read_metrics_csv(in));
    s.env = m[1];
    s.mode = parse_mode(m[2]);
    s.seed = std::stoull(m[3]);
    return s;
}

std::vector<RunSummary> run_matrix(const ExperimentConfig& cfg, const std::function<void(const RunSummary&)>& on_done)
{
    cfg.validate();
    std::filesystem::create_directories(cfg.out_dir);
    const TrainConfig tc = cfg.train_config();

    std::vector<std::pair<Mode, std::uint64_t>> jobs;
    for (Mode mode : cfg.modes) {
        for (auto seed : cfg.seeds)
            jobs.emplace_back(mode, seed);
    }
    std::vector<RunSummary> out(jobs.size());
    std::exception_ptr error;

    const auto n = static_cast<long>(jobs.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(cfg.jobs)
    for (long i = 0; i < n; ++i) {
        try {
            auto [mode, seed] = jobs[static_cast<std::size_t>(i)];
            auto env = make_environment(cfg.env);
            Metrics m = train(*env, mode, tc, seed);
            {
                std::ofstream csv(cfg.out_dir / run_file_name(cfg.env, mode, seed));
                write_metrics_csv(csv, m.rows);
                if (!csv)
                    throw ValidationError("failed writing into " + cfg.out_dir.string());
            }
            RunSummary s = summarize_rows(m.rows);
            s.env = cfg.env;
            s.mode = mode;
            s.seed = seed;
            s.containment_violations = m.containment_violations;
            out[static_cast<std::size_t>(i)] = s;
            if (on_done) {
#pragma omp critical(dynshield_run_matrix_report)
                on_done(s);
            }
        } catch (...) {
#pragma omp critical(dynshield_run_matrix_error)
            if (!error)
                error = std::current_exception();
        }
    }
    if (error)
        std::rethrow_exception(error);
    return out;
}

std::vector<ReportRow> aggregate(const std::vector<RunSummary>& runs)
{
    struct Acc {
        std::size_t runs = 0, evaluated = 0;
        double undesired = 0, reward = 0, safe = 0;
    };
    std::map<std::pair<std::string, int>, Acc> groups;
    for (const auto& r : runs) {
        Acc& a = groups[{r.env, static_cast<int>(r.mode)}];
        ++a.runs;
        a.undesired += static_cast<double>(r.undesired_episodes);
        if (r.best_mean_reward) {
            ++a.evaluated;
            a.reward += *r.best_mean_reward;
            a.safe += r.best_safe_rate.value_or(0.0);
        }
    }
    std::vector<ReportRow> out;
    for (const auto& [key, a] : groups) {
        ReportRow row;
        row.env = key.first;
        row.mode = static_cast<Mode>(key.second);
        row.runs = a.runs;
        row.mean_undesired = a.undesired / static_cast<double>(a.runs);
        if (a.evaluated > 0) {
            row.mean_best_reward = a.reward / static_cast<double>(a.evaluated);
            row.mean_safe_rate = a.safe / static_cast<double>(a.evaluated);
        }
        out.push_back(row);
    }
    return out;
}

void write_report_table(std::ostream& os, const std::vector<ReportRow>& rows)
{
    os << std::left << std::setw(11) << "env" << std::setw(10) << "mode" << std::right << std::setw(5) << "runs"
       << std::setw(20) << "undesired episodes" << std::setw(14) << "best reward" << std::setw(11) << "safe rate"
       << '\n';
    for (const auto& r : rows) {
        os << std::left << std::setw(11) << r.env << std::setw(10) << mode_name(r.mode) << std::right << std::setw(5)
           << r.runs << std::fixed << std::setprecision(2) << std::setw(20) << r.mean_undesired << std::setw(14)
           << r.mean_best_reward << std::setw(11) << r.mean_safe_rate << '\n';
    }
    os.unsetf(std::ios::floatfield);
}

void write_report_csv(std::ostream& os, const std::vector<ReportRow>& rows)
{
    os << "env,mode,runs,mean_undesired_episodes,mean_best_reward,mean_safe_rate\n";
    for (const auto& r : rows) {
        os << r.env << ',' << mode_name(r.mode) << ',' << r.runs << ',' << format_double(r.mean_undesired) << ','
           << format_double(r.mean_best_reward) << ',' << format_double(r.mean_safe_rate) << '\n';
    }
}

} // namespace dynshield
