// Command-line front end: training runs, offline learning, shield synthesis,
// verification and reporting.

#include "dynshield/envs/environment.hpp"
#include "dynshield/errors.hpp"
#include "dynshield/game.hpp"
#include "dynshield/harness.hpp"
#include "dynshield/learner.hpp"
#include "dynshield/shield.hpp"
#include "dynshield/text_format.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using namespace dynshield;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInvalid = 1;
constexpr int kExitViolations = 2;

// Flags shared by train and dump-model; they mirror the config file keys.
struct ExperimentFlags {
    std::string config;
    std::map<std::string, std::string> values;
    std::map<std::string, bool> switches;
    std::vector<std::pair<std::string, CLI::Option*>> given;

    void add(CLI::App& app, bool with_out_dir)
    {
        app.add_option("--config", config, "key=value file; flags given on the command line win")
            ->check(CLI::ExistingFile);
        static const std::pair<const char*, const char*> kValued[] = {
            {"env", "watertank|gridworld|cliffwalk|taxi"},
            {"mode", "plain|shielded|both"},
            {"steps", "training steps per run (default 50000, gridworld 100000)"},
            {"eval-interval", "steps between evaluations"},
            {"eval-episodes", "episodes per evaluation"},
            {"seeds", "e.g. 1-10 or 1,3,5"},
            {"alpha", "learning rate"},
            {"gamma", "discount"},
            {"epsilon-start", "initial exploration rate"},
            {"epsilon-end", "final exploration rate"},
            {"epsilon-decay", "fraction of the budget over which epsilon decays"},
            {"min-new-steps", "rebuild after this many new steps"},
            {"min-depth-cap", "upper bound of the adaptive MinDepth"},
            {"out", "output directory"},
            {"jobs", "parallel runs"},
        };
        for (const auto& [key, help] : kValued) {
            if (std::string(key) == "out" && !with_out_dir)
                continue;
            given.emplace_back(key, app.add_option(std::string("--") + key, values[key], help));
        }
        static const std::pair<const char*, const char*> kSwitches[] = {
            {"rebuild-on-undesired", "rebuild after any episode with an undesired output"},
            {"shielded-eval", "evaluate controllers behind the current shield"},
            {"masked-target", "bootstrap over the next state's allowed actions"},
        };
        for (const auto& [key, help] : kSwitches) {
            std::string k = key;
            given.emplace_back(k, app.add_flag("--" + k + ",!--no-" + k, switches[k], help));
        }
    }

    [[nodiscard]] ExperimentConfig resolve() const
    {
        ExperimentConfig cfg = config.empty() ? ExperimentConfig{} : load_config(config);
        for (const auto& [key, opt] : given) {
            if (opt->count() == 0)
                continue;
            auto sw = switches.find(key);
            apply_setting(cfg, key, sw != switches.end() ? (sw->second ? "true" : "false") : values.at(key));
        }
        return cfg;
    }
};

std::string describe(const Episode& ep, const Fsrs& truth)
{
    std::string s;
    for (const auto& st : ep) {
        if (!s.empty())
            s += ' ';
        s += truth.cont().name(st.cont) + "/" + truth.env().name(st.env) + "/" + truth.out().name(st.out);
    }
    return s;
}

int report_violations(const std::vector<Episode>& violations, const Fsrs& truth)
{
    if (violations.empty()) {
        std::cout << "OK\n";
        return kExitOk;
    }
    for (const auto& ep : violations)
        std::cout << "violation: " << describe(ep, truth) << '\n';
    std::cout << violations.size() << " unsafe run(s) allowed by the shield\n";
    return kExitViolations;
}

Alphabet or_placeholder(const Alphabet& a, const char* name)
{
    return a.size() > 0 ? a : Alphabet({name});
}

int cmd_train(const ExperimentFlags& flags)
{
    ExperimentConfig cfg = flags.resolve();
    cfg.validate();
    auto runs = run_matrix(cfg, [](const RunSummary& s) {
        std::cout << s.env << ' ' << mode_name(s.mode) << " seed " << s.seed << ": " << s.undesired_episodes << '/'
                  << s.episodes << " undesired episodes";
        if (s.best_mean_reward)
            std::cout << ", best reward " << *s.best_mean_reward << ", safe rate " << *s.best_safe_rate;
        if (s.mode == Mode::Shielded)
            std::cout << ", " << s.rebuilds << " rebuilds";
        std::cout << std::endl;
    });
    std::size_t violations = 0;
    for (const auto& r : runs)
        violations += r.containment_violations;
    auto rows = aggregate(runs);
    std::cout << '\n';
    write_report_table(std::cout, rows);
    std::ofstream csv(cfg.out_dir / "report.csv");
    write_report_csv(csv, rows);
    if (violations > 0) {
        std::cerr << "error: " << violations << " executed action(s) outside the allowed set\n";
        return kExitViolations;
    }
    return kExitOk;
}

int cmd_learn(const fs::path& traces, std::size_t min_depth, const fs::path& out, const std::string& dot)
{
    TraceFile tf = parse_trace(read_text_file(traces));
    const Alphabet cont = or_placeholder(tf.cont, "none");
    const Alphabet env = or_placeholder(tf.env, "none");
    const Alphabet outs = or_placeholder(tf.out, "none");
    if (tf.episodes.empty())
        std::cerr << "warning: " << traces.string() << " holds no episodes; writing a single-state model\n";
    SampleSet d(cont.size() * env.size(), outs.size());
    for (const auto& ep : tf.episodes) {
        Word in;
        std::vector<OutputSymbol> o;
        for (const auto& st : ep) {
            in.push_back(static_cast<InputSymbol>(st.cont * env.size() + st.env));
            o.push_back(st.out);
        }
        d.add_trace(in, o);
    }
    Fsrs model = learn_fsrs(d, min_depth, cont, env, outs);
    write_text_file(out, serialize_fsrs(model));
    if (!dot.empty())
        write_text_file(dot, to_dot(model));
    std::cout << model.num_states() << " states learned from " << d.size() << " samples\n";
    return kExitOk;
}

int cmd_shield(const fs::path& model_path, const fs::path& spec_path, const fs::path& out, const std::string& dot)
{
    Fsrs model = parse_fsrs(read_text_file(model_path));
    SafetyAutomaton spec = parse_spec(read_text_file(spec_path));
    SafetyGame game = compose(model, spec);
    WinningRegion win = winning_region(game);
    if (!dot.empty())
        write_text_file(dot, to_dot(game, &win));
    PreemptiveShield shield = synthesize_preemptive(std::move(game), std::move(win));
    write_text_file(out, serialize_shield(listing(shield.tables())));
    const auto& t = shield.tables();
    std::cout << t.game.num_states() << " game states, " << t.win.size() << " winning\n";
    return kExitOk;
}

int cmd_verify(const fs::path& truth_path, const fs::path& model_path, const std::string& spec_path)
{
    Fsrs truth = parse_fsrs(read_text_file(truth_path));
    Fsrs model = parse_fsrs(read_text_file(model_path));
    if (!spec_path.empty()) {
        SafetyAutomaton spec = parse_spec(read_text_file(spec_path));
        return report_violations(verify_shield(truth, spec, build_shield(model, spec)), truth);
    }
    if (!(truth.cont() == model.cont()) || !(truth.env() == model.env()) || !(truth.out() == model.out()))
        throw AlphabetError("model and truth use different alphabets");
    if (abstracts(model.machine(), truth.machine())) {
        std::cout << "OK\n";
        return kExitOk;
    }
    std::cout << "model does not abstract the truth\n";
    return kExitViolations;
}

std::vector<fs::path> collect_csvs(const std::vector<std::string>& inputs)
{
    std::vector<fs::path> out;
    for (const auto& in : inputs) {
        if (!fs::is_directory(in)) {
            out.emplace_back(in);
            continue;
        }
        for (const auto& e : fs::directory_iterator(in)) {
            const auto name = e.path().filename().string();
            if (e.is_regular_file() && name.find("_seed") != std::string::npos && e.path().extension() == ".csv")
                out.push_back(e.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

int cmd_report(const std::vector<std::string>& inputs, const std::string& csv_path)
{
    auto files = collect_csvs(inputs);
    if (files.empty())
        throw ValidationError("no run files found");
    std::vector<RunSummary> runs;
    for (const auto& f : files)
        runs.push_back(summarize_run(f));
    auto rows = aggregate(runs);
    write_report_table(std::cout, rows);
    if (csv_path.empty()) {
        std::cout << '\n';
        write_report_csv(std::cout, rows);
    } else {
        std::ostringstream os;
        write_report_csv(os, rows);
        write_text_file(csv_path, os.str());
    }
    return kExitOk;
}

int cmd_dump_model(const ExperimentFlags& flags, const fs::path& out, const std::string& traces_out)
{
    ExperimentConfig cfg = flags.resolve();
    cfg.validate();
    auto env = make_environment(cfg.env);
    Metrics m = train(*env, Mode::Shielded, cfg.train_config(), cfg.seeds.front());
    write_text_file(out, serialize_fsrs(m.final_snapshot->model));
    if (!traces_out.empty())
        write_text_file(traces_out, serialize_trace(env->cont(), env->env(), env->out(), m.traces));
    std::cout << m.final_snapshot->model_states << " states after " << m.rebuilds << " rebuilds\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dynamic shielding for reinforcement learning"};
    app.require_subcommand(1);

    auto* train = app.add_subcommand("train", "train plain and/or shielded agents over a seed matrix");
    ExperimentFlags train_flags;
    train_flags.add(*train, true);

    std::string traces, out, dot, model, spec, truth, csv_out, env_name = "watertank", traces_out;
    std::size_t min_depth = 0;
    std::vector<std::string> inputs;

    auto* learn = app.add_subcommand("learn", "learn a model from a trace file");
    learn->add_option("--traces", traces, "trace file")->required()->check(CLI::ExistingFile);
    learn->add_option("--min-depth", min_depth, "merge gate depth");
    learn->add_option("--out", out, "model file")->required();
    learn->add_option("--dot", dot, "also write the model as DOT");

    auto* shield = app.add_subcommand("shield", "synthesize a shield from a model and a spec");
    shield->add_option("--model", model)->required()->check(CLI::ExistingFile);
    shield->add_option("--spec", spec)->required()->check(CLI::ExistingFile);
    shield->add_option("--out", out, "shield listing")->required();
    shield->add_option("--dot", dot, "also write the game as DOT");

    auto* verify = app.add_subcommand("verify", "check abstraction, or the shield when --spec is given");
    verify->add_option("--truth", truth)->required()->check(CLI::ExistingFile);
    verify->add_option("--model", model)->required()->check(CLI::ExistingFile);
    verify->add_option("--spec", spec)->check(CLI::ExistingFile);

    auto* verify_shield_cmd = app.add_subcommand("verify-shield", "search the truth for unsafe runs the shield allows");
    verify_shield_cmd->add_option("--truth", truth)->required()->check(CLI::ExistingFile);
    verify_shield_cmd->add_option("--spec", spec)->required()->check(CLI::ExistingFile);
    verify_shield_cmd->add_option("--model", model)->required()->check(CLI::ExistingFile);

    auto* report = app.add_subcommand("report", "aggregate run CSVs");
    report->add_option("inputs", inputs, "CSV files or directories")->required();
    report->add_option("--csv", csv_out, "write the machine-readable table here instead of stdout");

    auto* dump_truth = app.add_subcommand("dump-truth", "write an environment's ground-truth FSRS");
    auto* dump_spec = app.add_subcommand("dump-spec", "write an environment's safety spec");
    for (auto* cmd : {dump_truth, dump_spec}) {
        cmd->add_option("--env", env_name)->required();
        cmd->add_option("--out", out)->required();
        cmd->add_option("--dot", dot);
    }

    auto* dump_model = app.add_subcommand("dump-model", "train one shielded run and write its last model");
    ExperimentFlags model_flags;
    model_flags.add(*dump_model, false);
    std::string model_out;
    dump_model->add_option("--out", model_out, "model file")->required();
    dump_model->add_option("--traces-out", traces_out, "also write the collected traces");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (train->parsed())
            return cmd_train(train_flags);
        if (learn->parsed())
            return cmd_learn(traces, min_depth, out, dot);
        if (shield->parsed())
            return cmd_shield(model, spec, out, dot);
        if (verify->parsed())
            return cmd_verify(truth, model, spec);
        if (verify_shield_cmd->parsed())
            return cmd_verify(truth, model, spec);
        if (report->parsed())
            return cmd_report(inputs, csv_out);
        if (dump_truth->parsed()) {
            Fsrs t = ground_truth(*make_environment(env_name));
            write_text_file(out, serialize_fsrs(t));
            if (!dot.empty())
                write_text_file(dot, to_dot(t));
            std::cout << t.num_states() << " states\n";
            return kExitOk;
        }
        if (dump_spec->parsed()) {
            auto s = make_environment(env_name)->spec();
            write_text_file(out, serialize_spec(s));
            if (!dot.empty())
                write_text_file(dot, to_dot(s));
            return kExitOk;
        }
        if (dump_model->parsed())
            return cmd_dump_model(model_flags, model_out, traces_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
    return kExitInvalid;
}
