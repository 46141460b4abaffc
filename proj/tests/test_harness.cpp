#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "betamm/errors.hpp"
#include "betamm/harness.hpp"
#include "betamm/synthetic.hpp"

using namespace betamm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) out[e.path().filename().string()] = slurp(e.path());
    return out;
}

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("betamm_test_harness_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

const char* kSmall = R"(
seed: 5
out: unused
jobs: 1
episodes:
  count: 3
  length: 600
data:
  synthetic:
    - name: A
      seed: 1
      session_length: 3600
    - name: B
      seed: 2
      session_length: 3600
policy:
  family: fixed
  alpha: 1
  beta: 2
)";

}  // namespace

TEST_CASE("config parsing and grid expansion") {
    SECTION("ladder over min_quote") {
        const auto c = parse_config(R"(
data:
  synthetic:
    - name: S
policy:
  family: ladder
  min_quote: [-2, -1, 0, 1, 2, 3, 4, 5, 6, 7]
)");
        REQUIRE(c.grid.size() == 10);
        for (std::size_t i = 0; i < 10; ++i) {
            REQUIRE(c.grid[i].family == PolicyFamily::Fixed);
            REQUIRE(c.grid[i].action.alpha_bid == 1.0);
            REQUIRE(c.grid[i].action.beta_ask == 1.0);
            REQUIRE(c.grid[i].spec.min_quote == static_cast<int>(i) - 2);
        }
        REQUIRE(c.episodes == 60);
        REQUIRE(c.length_s == 3600);
        REQUIRE(c.step_interval_s == 1);
        REQUIRE(c.synthetic.size() == 1);
    }
    SECTION("fixed 3x3") {
        const auto c = parse_config(R"(
data: {synthetic: [{name: S, seed: 3, drift_ticks_per_hour: 2.5}]}
policy: {family: fixed, alpha: [1, 2, 5], beta: [1, 2, 5]}
)");
        REQUIRE(c.grid.size() == 9);
        REQUIRE(c.synthetic[0].params.seed == 3);
        REQUIRE(c.synthetic[0].params.drift_ticks_per_hour == 2.5);
    }
    SECTION("six-tuple and inventory families") {
        const auto six = parse_config(R"(
data: {synthetic: [{name: S}]}
policy: {family: fixed, alpha_bid: 1, beta_bid: 2, alpha_ask: 1, beta_ask: 2, max_inv: [250, 1000], frac_inv: [0.5, 1]}
)");
        REQUIRE(six.grid.size() == 4);
        REQUIRE(six.grid[0].max_inv.has_value());
        const auto inv = parse_config(R"(
data: {synthetic: [{name: S}]}
policy: {family: inventory, omega_0: 0.2, kappa_0: 5, kappa_max: [20, 30], p: 2, max_inv: 250}
)");
        REQUIRE(inv.grid.size() == 2);
        REQUIRE(inv.grid[1].inventory.kappa_max == 30);
        REQUIRE(inv.grid[0].inventory.max_inv == 250);
    }
    SECTION("errors") {
        REQUIRE_THROWS_AS(parse_config("data: {synthetic: [{name: S}]}\nbogus: 1\n"), ConfigError);
        REQUIRE_THROWS_AS(parse_config("data: {synthetic: [{name: S, colour: red}]}\n"), ConfigError);
        REQUIRE_THROWS_AS(parse_config("policy: {family: fixed}\n"), ConfigError);
        REQUIRE_THROWS_AS(parse_config("data: {synthetic: [{name: S}]}\npolicy: {family: magic}\n"), ConfigError);
        REQUIRE_THROWS_AS(parse_config("data: {synthetic: [{name: S}]}\npolicy: {alpha: -1}\n"), ConfigError);
        REQUIRE_THROWS_AS(parse_config("data: {synthetic: [{name: S}]}\nepisodes: {count: abc}\n"), ConfigError);
        REQUIRE_THROWS_AS(parse_config("data: [\n"), ConfigError);
        REQUIRE_THROWS_AS(load_config("/nonexistent/config.yaml"), ConfigError);
    }
}

TEST_CASE("sweeps are deterministic and independent of thread count") {
    auto c = parse_config(kSmall);
    const auto groups = load_groups(c);
    REQUIRE(groups.size() == 2);
    REQUIRE(groups[0].first_price > 0);

    const auto r1 = run_sweep(c, groups);
    c.jobs = 3;
    const auto r3 = run_sweep(c, groups);
    REQUIRE(r1.rows.size() == 1);
    REQUIRE(r1.n_failed() == 0);
    REQUIRE(r1.rows[0].episodes.size() == 6);

    std::ostringstream a, b;
    write_summary_csv(a, r1, 1.0);
    write_summary_csv(b, r3, 1.0);
    REQUIRE(a.str() == b.str());
    for (std::size_t i = 0; i < 6; ++i) {
        REQUIRE(r1.rows[0].episodes[i].pnl == r3.rows[0].episodes[i].pnl);
        REQUIRE(r1.rows[0].episodes[i].start == r3.rows[0].episodes[i].start);
    }

    // byte-identical output directories
    const auto d1 = scratch("det1"), d2 = scratch("det2");
    c.out_dir = d1;
    write_sweep(c, run_sweep(c));
    c.out_dir = d2;
    c.jobs = 1;
    write_sweep(c, run_sweep(c));
    REQUIRE(dir_contents(d1) == dir_contents(d2));
    REQUIRE(dir_contents(d1).size() == 2);
    fs::remove_all(d1);
    fs::remove_all(d2);
}

TEST_CASE("grid points share episode windows") {
    auto c = parse_config(std::string(kSmall) + "");
    c.grid.push_back(c.grid[0]);
    c.grid[1].family = PolicyFamily::Null;
    const auto r = run_sweep(c);
    REQUIRE(r.rows.size() == 2);
    for (std::size_t i = 0; i < r.rows[0].episodes.size(); ++i)
        REQUIRE(r.rows[0].episodes[i].start == r.rows[1].episodes[i].start);
    for (const auto& e : r.rows[1].episodes) REQUIRE(e.pnl == 0.0);
    REQUIRE(r.rows[1].summary->n_profitable_groups == 0);
}

TEST_CASE("failing episodes are recorded without aborting the sweep") {
    auto c = parse_config(kSmall);
    c.synthetic[1].params.session_length_s = 300;  // too short for a 600 s episode
    const auto r = run_sweep(c);
    REQUIRE(r.n_failed() == 3);
    REQUIRE(r.rows[0].summary);
    REQUIRE(r.rows[0].summary->n_groups == 1);
    for (const auto& e : r.rows[0].episodes) {
        if (e.group == "B") {
            REQUIRE_FALSE(e.ok);
            REQUIRE_FALSE(e.error.empty());
        }
    }
    std::ostringstream out;
    write_episodes_csv(out, r.rows[0], 1.0);
    REQUIRE(out.str().find("failed") != std::string::npos);
}

TEST_CASE("summary table layout") {
    auto c = parse_config(R"(
seed: 2
episodes: {count: 2, length: 300}
data: {synthetic: [{name: S, seed: 4, session_length: 1800}]}
policy: {family: ladder, min_quote: [0, 1]}
)");
    const auto r = run_sweep(c);
    std::ostringstream out;
    write_summary_csv(out, r, 10'000.0);
    std::istringstream in(out.str());
    std::string header, line;
    std::getline(in, header);
    REQUIRE(header.find("min_quote") != std::string::npos);
    REQUIRE(header.find("n_profitable") != std::string::npos);
    REQUIRE(header.find("mean_return") != std::string::npos);
    REQUIRE(header.find("std_return") != std::string::npos);
    std::size_t rows = 0;
    while (std::getline(in, line)) ++rows;
    REQUIRE(rows == 2);
}

TEST_CASE("traces replay the sweep's episode") {
    auto c = parse_config(kSmall);
    const auto groups = load_groups(c);
    const auto r = run_sweep(c, groups);
    const auto tr = run_episode_trace(c, groups[1], 1, c.grid[0], 2);
    const auto& row = r.rows[0].episodes[5];
    REQUIRE(row.group == "B");
    REQUIRE(row.episode == 2);
    REQUIRE(tr.start == row.start);
    REQUIRE(tr.final_pnl == row.pnl);

    std::ostringstream steps, fills;
    write_steps_csv(steps, tr);
    write_fills_csv(fills, tr);
    REQUIRE(steps.str().rfind("time,cash,inventory,midprice,pnl,quoted_offset\n", 0) == 0);
    REQUIRE(fills.str().rfind("time,side,price,volume,aggressive\n", 0) == 0);
    const std::string text = steps.str();
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 601);
}

TEST_CASE("LOBSTER files round-trip through validation and loading") {
    const auto dir = scratch("lobster");
    SyntheticFlowParams p;
    p.seed = 21;
    p.max_messages = 5000;
    p.snapshot_levels = 10;
    const auto day = generate_synthetic_day(p);
    {
        std::ofstream m(dir / "X_message_10.csv"), o(dir / "X_orderbook_10.csv");
        for (std::size_t i = 0; i < day.messages.size(); ++i) {
            write_message(m, day.messages[i]);
            write_snapshot(o, day.snapshots[i]);
        }
    }
    {
        std::ifstream m(dir / "X_message_10.csv"), o(dir / "X_orderbook_10.csv");
        const auto rep = validate_data(m, o, 10, 10);
        REQUIRE(rep.rows_checked == day.messages.size() - 1);
        REQUIRE(rep.mismatches == 0);
        REQUIRE_FALSE(rep.first_mismatch_row);
    }
    {
        // corrupt one size in the orderbook file
        std::string book = slurp(dir / "X_orderbook_10.csv");
        auto pos = book.find('\n', book.size() / 2);
        auto comma = book.find(',', book.find(',', pos + 1) + 1);  // after ask_size_1
        book.insert(comma, "7");
        std::ofstream(dir / "bad.csv") << book;
        std::ifstream m(dir / "X_message_10.csv"), o(dir / "bad.csv");
        const auto rep = validate_data(m, o, 10, 10);
        REQUIRE(rep.mismatches >= 1);
        REQUIRE(rep.first_mismatch_row);
    }

    const auto loaded =
        load_lobster_day((dir / "X_message_10.csv").string(), (dir / "X_orderbook_10.csv").string(), 10, "X");
    REQUIRE(loaded.messages.size() == day.messages.size() - 1);
    REQUIRE(loaded.initial == day.snapshots[0]);
    REQUIRE(first_midprice(loaded) > 0);
    REQUIRE_THROWS_AS(load_lobster_day((dir / "nope.csv").string(), (dir / "X_orderbook_10.csv").string(), 10, "X"),
                      DataError);
    fs::remove_all(dir);
}
