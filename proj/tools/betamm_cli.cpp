// betamm: sweeps, single-episode traces, synthetic data and replay checks.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "betamm/errors.hpp"
#include "betamm/harness.hpp"

namespace {

enum ExitCode : int { kOk = 0, kConfigError = 1, kDataError = 2, kPartialFailure = 3 };

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<unsigned> jobs;
    std::optional<std::size_t> episodes;
    std::optional<double> length;
    std::optional<double> step;
};

void add_common(CLI::App* cmd, std::string& config_path, Overrides& o) {
    cmd->add_option("--config", config_path, "YAML run configuration")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "Master seed");
    cmd->add_option("--out", o.out, "Output directory");
    cmd->add_option("--jobs", o.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--episodes", o.episodes, "Episodes per data group")->check(CLI::PositiveNumber);
    cmd->add_option("--length", o.length, "Episode length in seconds of market time");
    cmd->add_option("--step", o.step, "Seconds of market time between agent actions");
}

betamm::RunConfig resolve(const std::string& path, const Overrides& o) {
    betamm::RunConfig c = betamm::load_config(path);
    if (o.seed) c.seed = *o.seed;
    if (o.out) c.out_dir = *o.out;
    if (o.jobs) c.jobs = *o.jobs;
    if (o.episodes) c.episodes = *o.episodes;
    if (o.length) c.length_s = *o.length;
    if (o.step) c.step_interval_s = *o.step;
    c.validate();
    return c;
}

int cmd_sweep(const std::string& path, const Overrides& o) {
    const auto config = resolve(path, o);
    const auto result = betamm::run_sweep(config);
    betamm::write_sweep(config, result);
    betamm::write_summary_csv(std::cout, result, config.return_scale);
    if (const auto failed = result.n_failed()) {
        std::cerr << failed << " episode(s) failed; see " << (config.out_dir / "episodes_*.csv").string() << "\n";
        return kPartialFailure;
    }
    return kOk;
}

int cmd_trace(const std::string& path, const Overrides& o, const std::string& group_name, std::size_t grid_index,
              std::size_t episode) {
    const auto config = resolve(path, o);
    if (grid_index >= config.grid.size())
        throw betamm::ConfigError("--grid-index " + std::to_string(grid_index) + " out of range (grid has " +
                                  std::to_string(config.grid.size()) + " points)");
    const auto groups = betamm::load_groups(config);
    std::size_t g = 0;
    if (!group_name.empty()) {
        while (g < groups.size() && groups[g].day.name != group_name) ++g;
        if (g == groups.size()) throw betamm::ConfigError("--group '" + group_name + "' not found");
    }
    const auto result = betamm::run_episode_trace(config, groups[g], g, config.grid[grid_index], episode);
    std::filesystem::create_directories(config.out_dir);
    std::ofstream steps(config.out_dir / "steps.csv");
    betamm::write_steps_csv(steps, result);
    std::ofstream fills(config.out_dir / "fills.csv");
    betamm::write_fills_csv(fills, result);
    std::cout << "episode " << groups[g].day.name << "#" << episode << " start " << betamm::format_time(result.start)
              << " steps " << result.steps.size() << " fills " << result.fills.size() << " final_pnl "
              << result.final_pnl << " final_inventory " << result.final_account.inventory << "\n";
    return kOk;
}

struct GenArgs {
    std::string config;
    std::string out = ".";
    std::string name = "SYN";
    std::uint64_t seed = 42;
    std::size_t max_messages = 0;
    std::size_t levels = 50;
    double drift = 0.0;
    double session_length = 23'400.0;
};

void write_day(const std::filesystem::path& dir, const std::string& name, betamm::SyntheticFlowParams p) {
    std::filesystem::create_directories(dir);
    const std::string suffix = "_" + std::to_string(p.snapshot_levels) + ".csv";
    std::ofstream msgs(dir / (name + "_message" + suffix));
    std::ofstream book(dir / (name + "_orderbook" + suffix));
    if (!msgs || !book) throw betamm::DataError("cannot write into " + dir.string());
    betamm::SyntheticFlow flow(p);
    betamm::MarketMessage m;
    betamm::BookSnapshot snap;
    while (flow.next(m, &snap)) {
        betamm::write_message(msgs, m);
        betamm::write_snapshot(book, snap);
    }
    std::cout << name << ": " << flow.messages_emitted() << " messages -> " << (dir / (name + "_message" + suffix)).string()
              << "\n";
}

int cmd_gen_data(const GenArgs& a) {
    if (!a.config.empty()) {
        const auto config = betamm::load_config(a.config);
        if (config.synthetic.empty()) throw betamm::ConfigError("config has no data.synthetic groups");
        for (const auto& g : config.synthetic) write_day(a.out, g.name, g.params);
        return kOk;
    }
    betamm::SyntheticFlowParams p;
    p.seed = a.seed;
    p.max_messages = a.max_messages;
    p.snapshot_levels = a.levels;
    p.drift_ticks_per_hour = a.drift;
    p.session_length_s = a.session_length;
    write_day(a.out, a.name, p);
    return kOk;
}

int cmd_validate(const std::string& messages, const std::string& orderbook, std::size_t levels,
                 std::size_t compare_levels) {
    std::ifstream m(messages);
    if (!m) throw betamm::DataError("cannot open " + messages);
    std::ifstream b(orderbook);
    if (!b) throw betamm::DataError("cannot open " + orderbook);
    const auto rep = betamm::validate_data(m, b, levels, compare_levels ? compare_levels : levels);
    std::cout << "rows_checked " << rep.rows_checked << " mismatches " << rep.mismatches << " unknown_messages "
              << rep.unknown_messages;
    if (rep.first_mismatch_row) std::cout << " first_mismatch_row " << *rep.first_mismatch_row;
    std::cout << "\n";
    return rep.mismatches == 0 ? kOk : kDataError;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Market-replay backtester for beta volume-profile market making"};
    app.require_subcommand(1);

    std::string config_path;
    Overrides overrides;

    auto* sweep = app.add_subcommand("sweep", "Run every grid point over sampled episodes");
    add_common(sweep, config_path, overrides);

    auto* trace = app.add_subcommand("trace", "Write step and fill traces for one episode");
    add_common(trace, config_path, overrides);
    std::string group_name;
    std::size_t grid_index = 0;
    std::size_t episode = 0;
    trace->add_option("--group", group_name, "Data group name (default: first)");
    trace->add_option("--grid-index", grid_index, "Grid point to trace");
    trace->add_option("--episode", episode, "Episode index within the group");

    GenArgs gen;
    auto* gen_data = app.add_subcommand("gen-data", "Emit a synthetic day in LOBSTER format");
    gen_data->add_option("--config", gen.config, "Generate every data.synthetic group of this config")
        ->check(CLI::ExistingFile);
    gen_data->add_option("--out", gen.out, "Output directory");
    gen_data->add_option("--name", gen.name, "File name prefix");
    gen_data->add_option("--seed", gen.seed, "Generator seed");
    gen_data->add_option("--max-messages", gen.max_messages, "Stop after this many messages (0: full session)");
    gen_data->add_option("--levels", gen.levels, "Orderbook depth")->check(CLI::PositiveNumber);
    gen_data->add_option("--drift", gen.drift, "Fundamental drift in ticks per hour");
    gen_data->add_option("--session-length", gen.session_length, "Session length in seconds");

    std::string val_messages, val_orderbook;
    std::size_t val_levels = 50, val_compare = 0;
    auto* validate = app.add_subcommand("validate-data", "Check that replay reproduces an orderbook file");
    validate->add_option("--messages", val_messages, "LOBSTER message file")->required()->check(CLI::ExistingFile);
    validate->add_option("--orderbook", val_orderbook, "LOBSTER orderbook file")->required()->check(CLI::ExistingFile);
    validate->add_option("--levels", val_levels, "Levels in the orderbook file")->check(CLI::PositiveNumber);
    validate->add_option("--compare-levels", val_compare, "Compare only the top K levels (default: all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kConfigError;
    }

    try {
        if (*sweep) return cmd_sweep(config_path, overrides);
        if (*trace) return cmd_trace(config_path, overrides, group_name, grid_index, episode);
        if (*gen_data) return cmd_gen_data(gen);
        if (*validate) return cmd_validate(val_messages, val_orderbook, val_levels, val_compare);
    } catch (const betamm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const betamm::DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const betamm::Error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kDataError;
    }
    return kOk;
}
