#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <thread>

#include "betamm/errors.hpp"
#include "betamm/harness.hpp"

namespace betamm {

namespace {

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

void write_params_header(std::ostream& out, PolicyFamily family) {
    out << "family,";
    if (family == PolicyFamily::Fixed) out << "alpha_bid,beta_bid,alpha_ask,beta_ask,max_inv,frac_inv,";
    if (family == PolicyFamily::Inventory) out << "omega_0,kappa_0,kappa_max,p,max_inv,";
    out << "n_levels,total_volume,min_quote";
}

void write_params(std::ostream& out, const GridPoint& g) {
    out << to_string(g.family) << ',';
    if (g.family == PolicyFamily::Fixed) {
        out << num(g.action.alpha_bid) << ',' << num(g.action.beta_bid) << ',' << num(g.action.alpha_ask) << ','
            << num(g.action.beta_ask) << ',';
        if (g.max_inv) out << *g.max_inv << ',' << num(g.frac_inv) << ',';
        else out << ",,";
    }
    if (g.family == PolicyFamily::Inventory) {
        const auto& p = g.inventory;
        out << num(p.omega_0) << ',' << num(p.kappa_0) << ',' << num(p.kappa_max) << ',' << num(p.p) << ','
            << p.max_inv << ',';
    }
    out << g.spec.n_levels << ',' << g.spec.total_volume << ',' << g.spec.min_quote;
}

EpisodeConfig episode_config(const RunConfig& c, Time start) {
    EpisodeConfig ec;
    ec.start = start;
    ec.length_s = c.length_s;
    ec.step_interval_s = c.step_interval_s;
    ec.levels = c.levels;
    ec.tick = c.tick;
    return ec;
}

}  // namespace

std::size_t SweepResult::n_failed() const {
    std::size_t n = 0;
    for (const auto& r : rows) n += r.n_failed;
    return n;
}

DayData load_lobster_day(const std::string& messages_path, const std::string& orderbook_path, std::size_t levels,
                         const std::string& name) {
    std::ifstream msgs(messages_path);
    if (!msgs) throw DataError("cannot open message file " + messages_path);
    std::ifstream book(orderbook_path);
    if (!book) throw DataError("cannot open orderbook file " + orderbook_path);

    DayData day;
    day.name = name;
    try {
        SnapshotReader snaps(book, levels);
        auto first = snaps.next();
        if (!first) throw DataError("orderbook file " + orderbook_path + " is empty");
        day.initial = *first;
        MessageReader reader(msgs);
        if (!reader.next()) throw DataError("message file " + messages_path + " is empty");
        while (auto m = reader.next()) day.messages.push_back(*m);
    } catch (const MalformedRow& e) {
        throw DataError(name + ": " + e.what());
    } catch (const TimeRegression& e) {
        throw DataError(name + ": " + e.what());
    }
    if (day.messages.empty()) throw DataError(name + ": need at least two messages");
    return day;
}

double first_midprice(const DayData& day) {
    OrderBook book = snapshot_to_book(day.initial);
    for (std::size_t i = 0;; ++i) {
        auto b = book.best(Side::Bid);
        auto a = book.best(Side::Ask);
        if (a && b) return static_cast<double>(*a + *b) / 2.0;
        if (i == day.messages.size()) break;
        apply_historical_message(book, day.messages[i]);
    }
    throw DataError(day.name + ": book never becomes two-sided");
}

std::vector<GroupData> load_groups(const RunConfig& config) {
    std::vector<GroupData> out;
    for (const auto& s : config.synthetic) {
        auto gen = generate_synthetic_day(s.params, false);
        GroupData g;
        g.day.name = s.name;
        g.day.initial = gen.initial;
        g.day.messages = std::move(gen.messages);
        if (g.day.messages.empty()) throw DataError(s.name + ": synthetic day produced no messages");
        g.first_price = first_midprice(g.day);
        out.push_back(std::move(g));
    }
    for (const auto& l : config.lobster) {
        GroupData g;
        g.day = load_lobster_day(l.messages, l.orderbook, l.levels, l.name);
        g.first_price = first_midprice(g.day);
        out.push_back(std::move(g));
    }
    return out;
}

std::uint64_t episode_seed(std::uint64_t master, std::size_t group, std::size_t episode) {
    return mix_seed(mix_seed(master, group), episode);
}

SweepResult run_sweep(const RunConfig& config, const std::vector<GroupData>& groups) {
    config.validate();
    if (groups.empty()) throw DataError("no data groups");

    // Episode windows are drawn once and shared by every grid point.
    struct Window {
        std::size_t group;
        std::size_t episode;
        std::optional<Time> start;
        std::string error;
    };
    std::vector<Window> windows;
    const Time length = seconds_to_time(config.length_s);
    for (std::size_t g = 0; g < groups.size(); ++g) {
        for (std::size_t e = 0; e < config.episodes; ++e) {
            Window w{g, e, std::nullopt, {}};
            try {
                w.start = episode_start_sampler(groups[g].day.open(), groups[g].day.close(), length,
                                                episode_seed(config.seed, g, e));
            } catch (const Error& ex) {
                w.error = ex.what();
            }
            windows.push_back(std::move(w));
        }
    }

    SweepResult result;
    result.rows.resize(config.grid.size());
    for (std::size_t k = 0; k < config.grid.size(); ++k) {
        result.rows[k].point = config.grid[k];
        result.rows[k].episodes.resize(windows.size());
    }

    const std::size_t n_tasks = config.grid.size() * windows.size();
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t task = next++; task < n_tasks; task = next++) {
            const std::size_t k = task / windows.size();
            const Window& w = windows[task % windows.size()];
            const GroupData& gd = groups[w.group];
            EpisodeRow& row = result.rows[k].episodes[task % windows.size()];
            row.group = gd.day.name;
            row.episode = w.episode;
            if (!w.start) {
                row.error = w.error;
                continue;
            }
            row.start = *w.start;
            try {
                const EpisodeResult er =
                    run_episode(gd.day, episode_config(config, *w.start), config.grid[k].make_policy());
                row.ok = true;
                row.pnl = er.final_pnl;
                row.ret = episode_return(er.final_pnl, gd.first_price);
                row.final_inventory = er.final_account.inventory;
                row.n_fills = er.fills.size();
                row.unknown_messages = er.unknown_messages;
            } catch (const std::exception& ex) {
                row.error = ex.what();
            }
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(config.jobs, static_cast<unsigned>(n_tasks)));
    std::vector<std::thread> pool;
    for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    for (auto& row : result.rows) {
        std::vector<EpisodeOutcome> ok;
        for (const auto& e : row.episodes) {
            if (e.ok) ok.push_back(EpisodeOutcome{e.group, e.pnl, e.ret});
            else ++row.n_failed;
        }
        if (!ok.empty()) row.summary = summarize(ok);
    }
    return result;
}

SweepResult run_sweep(const RunConfig& config) {
    config.validate();
    return run_sweep(config, load_groups(config));
}

void write_summary_csv(std::ostream& out, const SweepResult& result, double return_scale) {
    if (result.rows.empty()) return;
    write_params_header(out, result.rows.front().point.family);
    out << ",n_profitable,mean_return,std_return,n_groups,n_episodes,n_failed\n";
    for (const auto& row : result.rows) {
        write_params(out, row.point);
        if (row.summary) {
            out << ',' << row.summary->n_profitable_groups << ',' << num(row.summary->mean * return_scale) << ','
                << num(row.summary->std * return_scale) << ',' << row.summary->n_groups;
        } else {
            out << ",0,nan,nan,0";
        }
        out << ',' << row.episodes.size() << ',' << row.n_failed << '\n';
    }
}

void write_episodes_csv(std::ostream& out, const SweepRow& row, double return_scale) {
    out << "group,episode,start,status,pnl,return,final_inventory,n_fills,unknown_messages,error\n";
    for (const auto& e : row.episodes) {
        out << e.group << ',' << e.episode << ',' << format_time(e.start) << ',' << (e.ok ? "ok" : "failed") << ','
            << num(e.pnl) << ',' << num(e.ret * return_scale) << ',' << e.final_inventory << ',' << e.n_fills
            << ',' << e.unknown_messages << ',' << sanitize(e.error) << '\n';
    }
}

void write_sweep(const RunConfig& config, const SweepResult& result) {
    std::filesystem::create_directories(config.out_dir);
    {
        std::ofstream out(config.out_dir / "summary.csv");
        write_summary_csv(out, result, config.return_scale);
    }
    for (std::size_t k = 0; k < result.rows.size(); ++k) {
        std::ostringstream name;
        name << "episodes_" << std::setw(3) << std::setfill('0') << k << ".csv";
        std::ofstream out(config.out_dir / name.str());
        write_episodes_csv(out, result.rows[k], config.return_scale);
    }
}

void write_steps_csv(std::ostream& out, const EpisodeResult& r) {
    out << "time,cash,inventory,midprice,pnl,quoted_offset\n";
    for (const auto& s : r.steps) {
        out << format_time(s.time) << ',' << s.cash << ',' << s.inventory << ',' << num(s.mid.ticks()) << ','
            << num(s.pnl) << ',' << num(s.quoted_offset) << '\n';
    }
}

void write_fills_csv(std::ostream& out, const EpisodeResult& r) {
    out << "time,side,price,volume,aggressive\n";
    for (const auto& f : r.fills) {
        out << format_time(f.time) << ',' << (f.side == Side::Bid ? "buy" : "sell") << ',' << f.price << ','
            << f.volume << ',' << (f.aggressive ? 1 : 0) << '\n';
    }
}

EpisodeResult run_episode_trace(const RunConfig& config, const GroupData& group, std::size_t group_index,
                                const GridPoint& point, std::size_t episode) {
    EpisodeConfig ec = episode_config(config, 0);
    ec.start = RandomStart{episode_seed(config.seed, group_index, episode)};
    return run_episode(group.day, ec, point.make_policy());
}

ValidationReport validate_data(std::istream& messages, std::istream& orderbook, std::size_t levels,
                               std::size_t compare_levels) {
    if (compare_levels < 1 || compare_levels > levels)
        throw ConfigError("compare levels must lie in [1, levels]");
    MessageReader msgs(messages);
    SnapshotReader snaps(orderbook, levels);
    ValidationReport rep;

    auto first_row = snaps.next();
    if (!first_row || !msgs.next()) throw DataError("empty message or orderbook file");
    OrderBook book = snapshot_to_book(*first_row);

    auto truncate = [compare_levels](BookSnapshot s) {
        s.asks.resize(compare_levels);
        s.bids.resize(compare_levels);
        return s;
    };
    while (auto m = msgs.next()) {
        auto expected = snaps.next();
        if (!expected) throw DataError("orderbook file has fewer rows than the message file");
        if (m->type != EventType::Halt) {
            if (apply_historical_message(book, *m).unknown) ++rep.unknown_messages;
        }
        ++rep.rows_checked;
        if (book_to_snapshot(book, compare_levels) != truncate(*expected)) {
            ++rep.mismatches;
            if (!rep.first_mismatch_row) rep.first_mismatch_row = msgs.rows_read();
        }
    }
    if (snaps.next()) throw DataError("orderbook file has more rows than the message file");
    return rep;
}

}  // namespace betamm
