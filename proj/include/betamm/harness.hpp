#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "betamm/accounting.hpp"
#include "betamm/policies.hpp"
#include "betamm/replay.hpp"
#include "betamm/synthetic.hpp"

namespace betamm {

struct SyntheticGroup {
    std::string name;
    SyntheticFlowParams params;
};

struct LobsterGroup {
    std::string name;
    std::string messages;
    std::string orderbook;
    std::size_t levels = 50;
};

enum class PolicyFamily { Null, Fixed, Inventory };

std::string_view to_string(PolicyFamily f) noexcept;

// One concrete policy from the sweep grid.
struct GridPoint {
    PolicyFamily family = PolicyFamily::Fixed;
    Action4 action;
    std::optional<Volume> max_inv;  // set: market-order clearing (Action6)
    double frac_inv = 1.0;
    InventoryPolicyParams inventory;
    ProfileSpec spec;

    Policy make_policy() const;
};

struct RunConfig {
    std::vector<SyntheticGroup> synthetic;
    std::vector<LobsterGroup> lobster;

    std::size_t episodes = 60;
    double length_s = 3600.0;
    double step_interval_s = 1.0;
    std::size_t levels = 50;
    Price tick = 100;

    std::vector<GridPoint> grid;

    std::filesystem::path out_dir = "out";
    std::uint64_t seed = 1;
    unsigned jobs = 1;
    double return_scale = 1.0;  // presentation multiplier on returns

    void validate() const;
};

// Human-readable YAML; list-valued policy keys expand into a cartesian grid.
RunConfig parse_config(const std::string& yaml_text);
RunConfig load_config(const std::filesystem::path& path);

struct GroupData {
    DayData day;
    double first_price = 0.0;  // first two-sided midprice of the day, in price ticks
};

DayData load_lobster_day(const std::string& messages_path, const std::string& orderbook_path, std::size_t levels,
                         const std::string& name);
double first_midprice(const DayData& day);
std::vector<GroupData> load_groups(const RunConfig& config);

struct EpisodeRow {
    std::string group;
    std::size_t episode = 0;
    Time start = 0;
    bool ok = false;
    std::string error;
    double pnl = 0.0;
    double ret = 0.0;
    Volume final_inventory = 0;
    std::size_t n_fills = 0;
    std::size_t unknown_messages = 0;
};

struct SweepRow {
    GridPoint point;
    std::vector<EpisodeRow> episodes;
    std::optional<ReturnSummary> summary;  // absent when every episode failed
    std::size_t n_failed = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::size_t n_failed() const;
};

// Runs every grid point over the same episode windows. Deterministic in the
// master seed regardless of `jobs`.
SweepResult run_sweep(const RunConfig& config, const std::vector<GroupData>& groups);
SweepResult run_sweep(const RunConfig& config);

void write_summary_csv(std::ostream& out, const SweepResult& result, double return_scale);
void write_episodes_csv(std::ostream& out, const SweepRow& row, double return_scale);
void write_sweep(const RunConfig& config, const SweepResult& result);

// Per-step and per-fill traces of a single episode.
void write_steps_csv(std::ostream& out, const EpisodeResult& result);
void write_fills_csv(std::ostream& out, const EpisodeResult& result);

// Episode start for (group, episode) under the master seed.
std::uint64_t episode_seed(std::uint64_t master, std::size_t group, std::size_t episode);

// Same window as episode `episode` of group `group_index` in a sweep.
EpisodeResult run_episode_trace(const RunConfig& config, const GroupData& group, std::size_t group_index,
                                const GridPoint& point, std::size_t episode);

struct ValidationReport {
    std::size_t rows_checked = 0;
    std::size_t mismatches = 0;
    std::optional<std::size_t> first_mismatch_row;
    std::size_t unknown_messages = 0;
};

// Initialises from orderbook row 1, replays messages 2.. and compares the
// top `compare_levels` after each one.
ValidationReport validate_data(std::istream& messages, std::istream& orderbook, std::size_t levels,
                               std::size_t compare_levels);

}  // namespace betamm
