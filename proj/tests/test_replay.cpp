#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "betamm/accounting.hpp"
#include "betamm/errors.hpp"
#include "betamm/replay.hpp"
#include "betamm/synthetic.hpp"

using namespace betamm;

namespace {

constexpr Price kTick = 100;

MarketMessage msg(double t, EventType type, std::int64_t id, Volume size, Price px, int dir) {
    return MarketMessage{seconds_to_time(t), type, id, size, px, dir};
}

BookSnapshot two_sided(Price bid, Volume bid_size, Price ask, Volume ask_size, std::size_t levels = 5) {
    BookSnapshot s = BookSnapshot::empty(levels);
    s.bids[0] = {bid, bid_size};
    s.asks[0] = {ask, ask_size};
    return s;
}

DayData synthetic_day(std::uint64_t seed, double hours = 1.5, double reversion = 0.5) {
    SyntheticFlowParams p;
    p.seed = seed;
    p.session_length_s = hours * 3600;
    p.reversion = reversion;
    auto day = generate_synthetic_day(p, false);
    return DayData{"SYN" + std::to_string(seed), day.initial, std::move(day.messages)};
}

}  // namespace

TEST_CASE("visible executions fill agent orders with priority first") {
    SECTION("agent at the front absorbs the execution") {
        OrderBook book;
        const auto agent = book.insert_limit(Side::Bid, 990'000, 6, Owner::Agent);
        book.insert_with_id(OrderId{5}, Side::Bid, 990'000, 20, Owner::Historical);
        const auto eff = apply_historical_message(book, msg(1, EventType::ExecuteVisible, 5, 10, 990'000, 1));
        REQUIRE(eff.agent_fills.size() == 1);
        REQUIRE(eff.agent_fills[0].order_id == agent);
        REQUIRE(eff.agent_fills[0].volume == 6);
        REQUIRE(eff.agent_fills[0].aggressor_side == Side::Ask);
        REQUIRE_FALSE(book.contains(agent));
        REQUIRE(book.find(OrderId{5})->remaining == 16);
    }
    SECTION("agent further back than the execution is untouched") {
        OrderBook book;
        book.insert_with_id(OrderId{4}, Side::Ask, 1'000'100, 15, Owner::Historical);
        const auto agent = book.insert_limit(Side::Ask, 1'000'100, 6, Owner::Agent);
        const auto eff = apply_historical_message(book, msg(1, EventType::ExecuteVisible, 4, 10, 1'000'100, -1));
        REQUIRE(eff.agent_fills.empty());
        REQUIRE(book.find(OrderId{4})->remaining == 5);
        REQUIRE(book.volume_ahead(agent) == 5);
    }
    SECTION("agent at a better price goes first") {
        OrderBook book;
        book.insert_with_id(OrderId{4}, Side::Ask, 1'000'200, 15, Owner::Historical);
        const auto agent = book.insert_limit(Side::Ask, 1'000'100, 3, Owner::Agent);
        const auto eff = apply_historical_message(book, msg(1, EventType::ExecuteVisible, 4, 10, 1'000'200, -1));
        REQUIRE(eff.agent_fills.size() == 1);
        REQUIRE(eff.agent_fills[0].order_id == agent);
        REQUIRE(eff.agent_fills[0].price == 1'000'100);
        REQUIRE(book.find(OrderId{4})->remaining == 8);
    }
    SECTION("deleting an order ahead moves the agent up") {
        OrderBook book;
        book.insert_with_id(OrderId{1}, Side::Bid, 990'000, 7, Owner::Historical);
        book.insert_with_id(OrderId{2}, Side::Bid, 990'000, 4, Owner::Historical);
        const auto agent = book.insert_limit(Side::Bid, 990'000, 6, Owner::Agent);
        REQUIRE(book.volume_ahead(agent) == 11);
        apply_historical_message(book, msg(1, EventType::Delete, 1, 7, 990'000, 1));
        REQUIRE(book.volume_ahead(agent) == 4);
    }
}

TEST_CASE("other historical message types") {
    OrderBook book = snapshot_to_book(two_sided(990'000, 50, 1'000'100, 40));
    SECTION("hidden executions change nothing") {
        const auto agent = book.insert_limit(Side::Bid, 990'100, 5, Owner::Agent);
        const auto eff = apply_historical_message(book, msg(1, EventType::ExecuteHidden, 0, 30, 990'100, 1));
        REQUIRE(eff.agent_fills.empty());
        REQUIRE(book.find(agent)->remaining == 5);
        REQUIRE(book.total_volume(Side::Bid) == 55);
    }
    SECTION("unknown ids fall back to the seed at that price") {
        auto eff = apply_historical_message(book, msg(1, EventType::PartialCancel, 999, 10, 990'000, 1));
        REQUIRE(eff.used_seed);
        REQUIRE(book.level_volume(Side::Bid, 990'000) == 40);
        eff = apply_historical_message(book, msg(1, EventType::ExecuteVisible, 998, 15, 1'000'100, -1));
        REQUIRE(eff.used_seed);
        REQUIRE(book.level_volume(Side::Ask, 1'000'100) == 25);
        eff = apply_historical_message(book, msg(1, EventType::Delete, 997, 5, 1'000'100, -1));
        REQUIRE(eff.used_seed);
        REQUIRE(book.level_volume(Side::Ask, 1'000'100) == 20);
    }
    SECTION("unresolvable messages are flagged and skipped") {
        const auto before = book_to_snapshot(book, 5);
        auto eff = apply_historical_message(book, msg(1, EventType::Delete, 999, 10, 980'000, 1));
        REQUIRE(eff.unknown);
        eff = apply_historical_message(book, msg(1, EventType::ExecuteVisible, 999, 10, 1'000'300, -1));
        REQUIRE(eff.unknown);
        REQUIRE(book_to_snapshot(book, 5) == before);
    }
    SECTION("a crossing submit trades against agent liquidity, the rest rests") {
        const auto agent = book.insert_limit(Side::Ask, 990'100, 5, Owner::Agent);
        const auto eff = apply_historical_message(book, msg(1, EventType::Submit, 11, 8, 990'100, 1));
        REQUIRE(eff.agent_fills.size() == 1);
        REQUIRE(eff.agent_fills[0].volume == 5);
        REQUIRE_FALSE(book.contains(agent));
        REQUIRE(book.find(OrderId{11})->remaining == 3);
        REQUIRE(book.best_bid() == 990'100);
    }
}

TEST_CASE("quote anchors") {
    // one-tick spread
    REQUIRE(quote_anchors(1000, 1100, 0, kTick) == std::pair<Price, Price>{1000, 1100});
    REQUIRE(quote_anchors(1000, 1100, 2, kTick) == std::pair<Price, Price>{800, 1300});
    REQUIRE(quote_anchors(1000, 1100, -1, kTick) == std::pair<Price, Price>{1000, 1100});
    // wide spread: inside quoting, never meeting
    REQUIRE(quote_anchors(1000, 1600, -1, kTick) == std::pair<Price, Price>{1100, 1500});
    REQUIRE(quote_anchors(1000, 1600, -2, kTick) == std::pair<Price, Price>{1200, 1400});
    REQUIRE(quote_anchors(1000, 1600, -3, kTick) == std::pair<Price, Price>{1200, 1300});
    REQUIRE(quote_anchors(1000, 1200, -2, kTick) == std::pair<Price, Price>{1000, 1100});
    for (Price spread = 1; spread <= 12; ++spread)
        for (int mq = -8; mq <= 3; ++mq) {
            const auto [b, a] = quote_anchors(10'000, 10'000 + spread * kTick, mq, kTick);
            REQUIRE(b < a);
            REQUIRE(b < 10'000 + spread * kTick);
            REQUIRE(a > 10'000);
        }
}

TEST_CASE("materialising actions") {
    OrderBook book = snapshot_to_book(two_sided(990'000, 50, 1'000'100, 40));
    const ProfileSpec spec{5, 20, 0};
    const auto want_bid = quantise(spec, {1, 1}, Side::Bid, 990'000, kTick);
    const auto want_ask = quantise(spec, {1, 1}, Side::Ask, 1'000'100, kTick);

    const auto first = materialise_action(book, want_bid, want_ask, std::nullopt, 0);
    REQUIRE(first.instructions.size() == 10);
    REQUIRE(first.rejected == 0);
    REQUIRE(agent_profile(book, Side::Bid, 990'000, kTick, 5) == want_bid);
    REQUIRE(agent_profile(book, Side::Ask, 1'000'100, kTick, 5) == want_ask);

    SECTION("a fixed point emits nothing") {
        REQUIRE(materialise_action(book, want_bid, want_ask, std::nullopt, 0).instructions.empty());
    }
    SECTION("re-anchoring cancels orders that fall off the lattice") {
        const auto moved = quantise(spec, {1, 1}, Side::Bid, 990'200, kTick);
        const auto r = materialise_action(book, moved, want_ask, std::nullopt, 0);
        REQUIRE(agent_profile(book, Side::Bid, 990'200, kTick, 5) == moved);
        REQUIRE(book.orders_of(Side::Bid, Owner::Agent).size() == 5);
        REQUIRE(book.best_bid() == 990'200);
        std::size_t cancels = 0;
        for (const auto& i : r.instructions) cancels += i.kind == Instruction::Kind::Cancel;
        REQUIRE(cancels == 2);
    }
    SECTION("a missing side cancels everything on it") {
        materialise_action(book, std::nullopt, want_ask, std::nullopt, 0);
        REQUIRE(book.orders_of(Side::Bid, Owner::Agent).empty());
        REQUIRE(book.orders_of(Side::Ask, Owner::Agent).size() == 5);
    }
    SECTION("market orders go first and skip the agent's own quotes") {
        const auto r = materialise_action(book, want_bid, want_ask, MarketOrder{Side::Bid, 10}, 0);
        REQUIRE(r.market_fills.size() == 1);
        REQUIRE(r.market_fills[0].passive_owner == Owner::Historical);
        REQUIRE(r.market_fills[0].price == 1'000'100);
        REQUIRE(r.instructions.empty());
    }
    SECTION("a market order into an empty side is reported and diffing continues") {
        OrderBook thin = snapshot_to_book(two_sided(990'000, 50, 1'000'100, 40));
        thin.execute_market(Side::Bid, 40);
        const auto r = materialise_action(thin, want_bid, std::nullopt, MarketOrder{Side::Bid, 5}, 0);
        REQUIRE(r.market_empty_side);
        REQUIRE(r.market_shortfall == 5);
        REQUIRE(agent_profile(thin, Side::Bid, 990'000, kTick, 5) == want_bid);
    }
    SECTION("inserts that would cross are rejected and counted") {
        const auto crossing = quantise(spec, {1, 1}, Side::Bid, 1'000'200, kTick);
        const auto r = materialise_action(book, crossing, want_ask, std::nullopt, 0);
        REQUIRE(r.rejected > 0);
        REQUIRE(book.check_integrity());
    }
}

TEST_CASE("retained volume keeps its queue position when the mode shifts") {
    OrderBook book = snapshot_to_book(two_sided(990'000, 50, 1'000'100, 40, 10));
    for (int i = 1; i < 10; ++i) book.insert_limit(Side::Bid, 990'000 - i * kTick, 30, Owner::Historical);
    const ProfileSpec spec{10, 100, 0};
    const auto cur = quantise(spec, from_mode_concentration({0.4, 10}), Side::Bid, 990'000, kTick);
    const auto want = quantise(spec, from_mode_concentration({0.6, 10}), Side::Bid, 990'000, kTick);
    materialise_action(book, cur, std::nullopt, std::nullopt, 0);
    // later historical arrivals queue behind the agent
    for (int i = 0; i < 10; ++i) book.insert_limit(Side::Bid, 990'000 - i * kTick, 11, Owner::Historical);

    struct Seen {
        std::uint64_t seq;
        Volume ahead;
        Volume remaining;
    };
    std::map<std::int64_t, Seen> before;
    for (const auto& [px, orders] : book.orders_of(Side::Bid, Owner::Agent))
        for (const Order* o : orders) before[o->id.value] = {o->arrival_seq, book.volume_ahead(o->id), o->remaining};

    const auto r = materialise_action(book, want, std::nullopt, std::nullopt, 0);
    for (const auto& ins : r.instructions) REQUIRE(cur.volumes[ins.level] != want.volumes[ins.level]);
    REQUIRE(agent_profile(book, Side::Bid, 990'000, kTick, 10) == want);

    auto after = book.orders_of(Side::Bid, Owner::Agent);
    for (std::size_t lvl = 0; lvl < 10; ++lvl) {
        const Price px = cur.price_at(lvl);
        const Volume keep = std::min(cur.volumes[lvl], want.volumes[lvl]);
        Volume retained = 0;
        for (const Order* o : after[px]) {
            auto it = before.find(o->id.value);
            if (it == before.end()) continue;
            REQUIRE(o->arrival_seq == it->second.seq);
            REQUIRE(book.volume_ahead(o->id) == it->second.ahead);
            retained += o->remaining;
        }
        REQUIRE(retained == keep);
    }
}

TEST_CASE("a hand-built stream gives exactly one agent fill") {
    DayData day{"HAND", two_sided(990'000, 10, 1'000'100, 10), {}};
    day.messages = {
        msg(34200.0, EventType::Submit, 1, 5, 1'000'200, -1),
        msg(34201.5, EventType::ExecuteVisible, 77, 7, 990'000, 1),
        msg(34203.0, EventType::ExecuteHidden, 0, 3, 1'000'100, -1),
    };
    // One bid of 5 one tick inside the spread, nothing on the ask.
    const Policy pol = [](const StepObservation&) {
        return PolicyDecision{BetaParams{1, 1}, std::nullopt, ProfileSpec{1, 5, -1}, std::nullopt};
    };
    EpisodeConfig cfg;
    cfg.start = seconds_to_time(34200.0);
    cfg.length_s = 3;
    cfg.step_interval_s = 1;
    cfg.levels = 5;
    const auto res = run_episode(day, cfg, pol);
    REQUIRE(res.fills.size() == 1);
    REQUIRE(res.fills[0].price == 990'100);
    REQUIRE(res.fills[0].volume == 5);
    REQUIRE(res.fills[0].side == Side::Bid);
    REQUIRE_FALSE(res.fills[0].aggressive);
    REQUIRE(res.fills[0].step == 1);
    REQUIRE(res.final_account == AccountState{-990'100 * 5, 5});
    REQUIRE(res.steps.size() == 3);
    REQUIRE(res.steps[0].inventory == 0);
    REQUIRE(res.steps[1].inventory == 5);
    REQUIRE(res.seed_resolved_messages == 1);
}

TEST_CASE("the null policy leaves the market untouched") {
    const auto day = synthetic_day(3);
    EpisodeConfig cfg;
    cfg.start = RandomStart{17};
    cfg.length_s = 1800;

    // Independent pure replay from the same starting book, compared at every step.
    std::size_t cursor = 0;
    const Time start = episode_start_sampler(day.open(), day.close(), seconds_to_time(cfg.length_s), 17);
    OrderBook shadow = initial_book(day, start, cfg.levels, &cursor);
    std::size_t compared = 0;
    const Policy observer = [&](const StepObservation& obs) {
        for (; cursor < day.messages.size() && day.messages[cursor].time <= obs.time; ++cursor)
            apply_historical_message(shadow, day.messages[cursor]);
        REQUIRE(book_to_snapshot(*obs.book, 50) == book_to_snapshot(shadow, 50));
        REQUIRE(obs.book->total_volume(Side::Bid) == shadow.total_volume(Side::Bid));
        REQUIRE(obs.book->total_volume(Side::Ask) == shadow.total_volume(Side::Ask));
        ++compared;
        return PolicyDecision{};
    };
    const auto res = run_episode(day, cfg, observer);
    REQUIRE(compared == 1800);
    REQUIRE(res.fills.empty());
    REQUIRE(res.final_account == AccountState{});
    for (const auto& s : res.steps) {
        REQUIRE(s.pnl == 0.0);
        REQUIRE(s.inventory == 0);
        REQUIRE(std::isnan(s.quoted_offset));
    }
}

TEST_CASE("episodes are deterministic and close their accounts") {
    const auto day = synthetic_day(4);
    EpisodeConfig cfg;
    cfg.start = RandomStart{99};
    cfg.length_s = 1800;
    cfg.record_instructions = true;
    const auto pol = fixed_beta_policy(Action6{Action4{1, 2, 1, 2}, 300, 0.5}, ProfileSpec{});
    const auto a = run_episode(day, cfg, pol);
    const auto b = run_episode(day, cfg, pol);
    REQUIRE(a == b);
    REQUIRE(a.fills.size() > 10);
    REQUIRE(a.instructions.size() == a.steps.size());

    AccountState acc;
    std::size_t k = 0;
    for (std::size_t step = 0; step < a.steps.size(); ++step) {
        for (; k < a.fills.size() && a.fills[k].step == step; ++k) {
            Fill f;
            f.price = a.fills[k].price;
            f.volume = a.fills[k].volume;
            acc = apply_fill(acc, f, a.fills[k].side);
        }
        REQUIRE(acc.cash == a.steps[step].cash);
        REQUIRE(acc.inventory == a.steps[step].inventory);
        REQUIRE(a.steps[step].pnl == mark_to_market(acc, a.steps[step].mid));
    }
    REQUIRE(acc == a.final_account);
}

TEST_CASE("episode windows") {
    const auto day = synthetic_day(5, 0.5);
    EpisodeConfig cfg;
    cfg.length_s = 600;
    cfg.start = day.close() - seconds_to_time(300);
    REQUIRE_THROWS_AS(run_episode(day, cfg, null_policy()), DataExhausted);
    cfg.start = RandomStart{1};
    cfg.length_s = 7200;
    REQUIRE_THROWS_AS(run_episode(day, cfg, null_policy()), EpisodeTooLong);
    cfg.length_s = 0;
    REQUIRE_THROWS_AS(run_episode(day, cfg, null_policy()), ConfigError);
}

TEST_CASE("start sampler") {
    REQUIRE(episode_start_sampler(100, 200, 100, 7) == 100);
    REQUIRE_THROWS_AS(episode_start_sampler(100, 200, 101, 7), EpisodeTooLong);
    REQUIRE(episode_start_sampler(0, 1000, 10, 3) == episode_start_sampler(0, 1000, 10, 3));

    // Kolmogorov-Smirnov against uniform at alpha = 0.01.
    const Time open = seconds_to_time(34200), close = seconds_to_time(57600), len = seconds_to_time(3600);
    const double span = static_cast<double>(close - len - open);
    std::vector<double> u;
    for (std::uint64_t s = 0; s < 10'000; ++s) {
        const Time t = episode_start_sampler(open, close, len, s * 7919 + 1);
        REQUIRE(t >= open);
        REQUIRE(t + len <= close);
        u.push_back(static_cast<double>(t - open) / span);
    }
    std::sort(u.begin(), u.end());
    double d = 0;
    const double n = static_cast<double>(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
        d = std::max({d, (i + 1) / n - u[i], u[i] - i / n});
    REQUIRE(d < 1.628 / std::sqrt(n));
}

TEST_CASE("halts pause the agent") {
    DayData day{"HALT", two_sided(990'000, 10, 1'000'100, 10), {}};
    day.messages = {
        msg(34200.0, EventType::Submit, 1, 5, 1'000'200, -1),
        msg(34201.5, EventType::Halt, 0, 0, -1, -1),
        msg(34204.5, EventType::Halt, 0, 0, 1, -1),
        msg(34210.0, EventType::Submit, 2, 5, 1'000'300, -1),
    };
    int calls = 0;
    const Policy pol = [&](const StepObservation&) {
        ++calls;
        return PolicyDecision{};
    };
    EpisodeConfig cfg;
    cfg.start = seconds_to_time(34200.0);
    cfg.length_s = 10;
    cfg.levels = 5;
    run_episode(day, cfg, pol);
    // steps start at 0..9; halted while starting at 2, 3, 4
    REQUIRE(calls == 7);
}
