#include "betamm/replay.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "betamm/errors.hpp"
#include "betamm/random.hpp"

namespace betamm {

namespace {

constexpr std::size_t kOffLattice = std::numeric_limits<std::size_t>::max();

std::optional<OrderId> seed_order_at(const OrderBook& book, Side side, Price price) {
    const auto* lvl = book.level(side, price);
    if (!lvl) return std::nullopt;
    for (const auto& o : lvl->orders)
        if (o.owner == Owner::Historical && o.id.value < 0) return o.id;
    return std::nullopt;
}

// Resolves the book order a message refers to.
std::optional<OrderId> resolve_target(const OrderBook& book, const MarketMessage& msg, HistoricalEffect& eff) {
    if (msg.order_id >= 0 && book.contains(OrderId{msg.order_id})) return OrderId{msg.order_id};
    if (auto seed = seed_order_at(book, msg.side(), msg.price)) {
        eff.used_seed = true;
        return seed;
    }
    eff.unknown = true;
    return std::nullopt;
}

void execute_against(OrderBook& book, OrderId target, Volume size, Time ts, HistoricalEffect& eff) {
    const Order* t = book.find(target);
    const Side side = t->side;
    const Price target_px = t->price;
    const std::uint64_t target_seq = t->arrival_seq;

    // Agent orders with priority over the target absorb the execution first.
    std::vector<std::pair<OrderId, Volume>> plan;
    Volume budget = size;
    book.for_each_level(side, [&](Price px, const OrderBook::Level& lvl) {
        for (const auto& o : lvl.orders) {
            if (budget == 0 || (px == target_px && o.arrival_seq >= target_seq)) return false;
            if (o.owner != Owner::Agent) continue;
            const Volume v = std::min(budget, o.remaining);
            plan.emplace_back(o.id, v);
            budget -= v;
        }
        return px != target_px;
    });
    if (budget > 0) plan.emplace_back(target, std::min(budget, t->remaining));

    for (const auto& [id, v] : plan) {
        Fill f = book.fill_order(id, v, ts);
        if (f.passive_owner == Owner::Agent) eff.agent_fills.push_back(f);
    }
}

}  // namespace

Time DayData::open() const {
    if (messages.empty()) throw DataExhausted("day '" + name + "' has no messages");
    return messages.front().time;
}

Time DayData::close() const {
    if (messages.empty()) throw DataExhausted("day '" + name + "' has no messages");
    return messages.back().time;
}

HistoricalEffect apply_historical_message(OrderBook& book, const MarketMessage& msg) {
    HistoricalEffect eff;
    const Side side = msg.side();

    switch (msg.type) {
        case EventType::Submit: {
            if (msg.order_id < 0 || book.contains(OrderId{msg.order_id}) || msg.size < 1 || msg.price <= 0) {
                eff.unknown = true;
                break;
            }
            Volume residual = msg.size;
            auto opp = book.best(opposite(side));
            if (opp && (side == Side::Bid ? msg.price >= *opp : msg.price <= *opp)) {
                // Only reachable when agent orders (or volume they preempted)
                // sit where history had none: match like the exchange would.
                auto ex = book.execute_limit(side, msg.price, msg.size, msg.time);
                for (const auto& f : ex.fills)
                    if (f.passive_owner == Owner::Agent) eff.agent_fills.push_back(f);
                residual = ex.shortfall;
            }
            if (residual > 0) book.insert_with_id(OrderId{msg.order_id}, side, msg.price, residual, Owner::Historical);
            break;
        }
        case EventType::PartialCancel: {
            if (msg.size < 1) break;
            if (auto t = resolve_target(book, msg, eff)) book.cancel_volume(*t, msg.size);
            break;
        }
        case EventType::Delete: {
            auto t = resolve_target(book, msg, eff);
            if (!t) break;
            if (eff.used_seed) {
                if (msg.size >= 1) book.cancel_volume(*t, msg.size);
            } else {
                book.remove(*t);
            }
            break;
        }
        case EventType::ExecuteVisible: {
            if (msg.size < 1) break;
            if (auto t = resolve_target(book, msg, eff)) execute_against(book, *t, msg.size, msg.time, eff);
            break;
        }
        case EventType::ExecuteHidden:
        case EventType::Cross:
        case EventType::Halt:
            break;
    }
    return eff;
}

std::pair<Price, Price> quote_anchors(Price touch_bid, Price touch_ask, int min_quote, Price tick) {
    Price bid = touch_bid - static_cast<Price>(min_quote) * tick;
    Price ask = touch_ask + static_cast<Price>(min_quote) * tick;
    bid = std::min(bid, touch_ask - tick);
    ask = std::max(ask, touch_bid + tick);
    if (bid >= ask) {
        const Price spread_ticks = (touch_ask - touch_bid) / tick;
        bid = touch_bid + ((spread_ticks - 1) / 2) * tick;
        ask = bid + tick;
    }
    return {bid, ask};
}

VolumeProfile agent_profile(const OrderBook& book, Side side, Price anchor, Price tick, int n_levels) {
    VolumeProfile prof{side, anchor, tick, std::vector<Volume>(static_cast<std::size_t>(n_levels), 0)};
    for (const auto& [px, orders] : book.orders_of(side, Owner::Agent)) {
        if (auto lvl = prof.level_of(px))
            for (const Order* o : orders) prof.volumes[*lvl] += o->remaining;
    }
    return prof;
}

MaterialiseResult materialise_action(OrderBook& book, const std::optional<VolumeProfile>& desired_bid,
                                     const std::optional<VolumeProfile>& desired_ask,
                                     const std::optional<MarketOrder>& market_order, Time now) {
    MaterialiseResult res;
    if (market_order && market_order->volume >= 1) {
        try {
            auto ex = book.execute_market(market_order->side, market_order->volume, now, Owner::Agent);
            res.market_fills = std::move(ex.fills);
            res.market_shortfall = ex.shortfall;
        } catch (const EmptySide&) {
            res.market_empty_side = true;
            res.market_shortfall = market_order->volume;
        }
    }

    std::vector<Instruction> cancels;
    std::vector<Instruction> inserts;
    for (Side side : {Side::Bid, Side::Ask}) {
        const auto& desired = side == Side::Bid ? desired_bid : desired_ask;
        const auto agent_orders = book.orders_of(side, Owner::Agent);

        auto cancel_all_at = [&](Price px, const std::vector<const Order*>& orders) {
            for (auto it = orders.rbegin(); it != orders.rend(); ++it)
                cancels.push_back(
                    Instruction{Instruction::Kind::Cancel, side, kOffLattice, px, (*it)->remaining, (*it)->id});
        };

        if (!desired) {
            for (const auto& [px, orders] : agent_orders) cancel_all_at(px, orders);
            continue;
        }

        VolumeProfile current{side, desired->anchor, desired->tick, std::vector<Volume>(desired->volumes.size(), 0)};
        std::vector<LevelQueue> queues(desired->volumes.size());
        for (const auto& [px, orders] : agent_orders) {
            auto lvl = current.level_of(px);
            if (!lvl) {
                cancel_all_at(px, orders);
                continue;
            }
            for (const Order* o : orders) {
                queues[*lvl].push_back(AgentQueueEntry{o->id, o->remaining, o->arrival_seq});
                current.volumes[*lvl] += o->remaining;
            }
        }
        for (auto& ins : diff_to_instructions(current, *desired, queues))
            (ins.kind == Instruction::Kind::Cancel ? cancels : inserts).push_back(ins);
    }

    for (auto& c : cancels) {
        book.cancel_volume(c.order_id, c.volume);
        res.instructions.push_back(c);
    }
    for (auto& ins : inserts) {
        try {
            ins.order_id = book.insert_limit(ins.side, ins.price, ins.volume, Owner::Agent);
            res.instructions.push_back(ins);
        } catch (const CrossingOrder&) {
            ++res.rejected;
        } catch (const InvalidPrice&) {
            ++res.rejected;
        }
    }
    return res;
}

void EpisodeConfig::validate() const {
    if (!(length_s > 0.0)) throw ConfigError("episode length must be > 0");
    if (!(step_interval_s > 0.0)) throw ConfigError("step interval must be > 0");
    if (levels < 1) throw ConfigError("levels must be >= 1");
    if (tick < 1) throw ConfigError("tick must be >= 1");
}

bool StepRecord::operator==(const StepRecord& o) const {
    const bool offsets_equal =
        (std::isnan(quoted_offset) && std::isnan(o.quoted_offset)) || quoted_offset == o.quoted_offset;
    return time == o.time && cash == o.cash && inventory == o.inventory && mid == o.mid && pnl == o.pnl &&
           offsets_equal;
}

Time episode_start_sampler(Time open, Time close, Time length, std::uint64_t seed) {
    if (length <= 0) throw ConfigError("episode length must be > 0");
    if (close - open < length) throw EpisodeTooLong("episode does not fit inside the trading day");
    const auto span = static_cast<std::uint64_t>(close - length - open);
    if (span == 0) return open;
    Rng rng(seed);
    return open + static_cast<Time>(rng.below(span + 1));
}

OrderBook initial_book(const DayData& day, Time start, std::size_t levels, std::size_t* cursor) {
    OrderBook full = snapshot_to_book(day.initial);
    std::size_t i = 0;
    for (; i < day.messages.size() && day.messages[i].time <= start; ++i) apply_historical_message(full, day.messages[i]);
    if (cursor) *cursor = i;
    return snapshot_to_book(book_to_snapshot(full, levels));
}

EpisodeResult run_episode(const DayData& day, const EpisodeConfig& config, const Policy& policy,
                          AccountState account) {
    config.validate();
    const Time length = seconds_to_time(config.length_s);
    const Time interval = seconds_to_time(config.step_interval_s);
    const Time open = day.open();
    const Time close = day.close();

    Time start = 0;
    if (const Time* explicit_start = std::get_if<Time>(&config.start)) {
        start = *explicit_start;
    } else {
        start = episode_start_sampler(open, close, length, std::get<RandomStart>(config.start).seed);
    }
    const Time end = start + length;
    if (end > close)
        throw DataExhausted("episode [" + format_time(start) + ", " + format_time(end) + "] runs past the last message at " +
                            format_time(close));

    std::size_t cursor = 0;
    OrderBook book = initial_book(day, start, config.levels, &cursor);
    bool halted = false;
    for (std::size_t i = 0; i < cursor; ++i)
        if (day.messages[i].type == EventType::Halt) halted = day.messages[i].price == -1 ? true : day.messages[i].price == 1 ? false : halted;

    auto touch = [&]() -> std::optional<std::pair<Price, Price>> {
        auto b = book.best_excluding(Side::Bid, Owner::Agent);
        auto a = book.best_excluding(Side::Ask, Owner::Agent);
        if (!b || !a) return std::nullopt;
        return std::make_pair(*b, *a);
    };

    EpisodeResult res;
    res.start = start;
    res.end = end;
    res.initial_account = account;
    const auto first_touch = touch();
    if (!first_touch) throw DataError("book is not two-sided at episode start " + format_time(start));
    res.first_mid = HalfTicks{first_touch->first + first_touch->second};
    HalfTicks last_mid = res.first_mid;
    ProfileSpec last_spec;

    for (Time t = start; t < end; ) {
        const Time step_end = std::min(t + interval, end);
        const std::size_t step = res.steps.size();
        double offset = std::numeric_limits<double>::quiet_NaN();
        std::vector<Instruction> step_instructions;
        std::optional<MarketOrder> step_market;

        if (auto tp = touch(); tp && !halted) {
            auto [bid_anchor, ask_anchor] = quote_anchors(tp->first, tp->second, last_spec.min_quote, config.tick);
            StepObservation obs{&book,
                                t,
                                account.cash,
                                account.inventory,
                                tp->first,
                                tp->second,
                                agent_profile(book, Side::Bid, bid_anchor, config.tick, last_spec.n_levels),
                                agent_profile(book, Side::Ask, ask_anchor, config.tick, last_spec.n_levels)};
            PolicyDecision d = policy(obs);
            if (d.bid || d.ask) {
                d.spec.validate();
                last_spec = d.spec;
            }
            std::tie(bid_anchor, ask_anchor) = quote_anchors(tp->first, tp->second, d.spec.min_quote, config.tick);
            std::optional<VolumeProfile> want_bid, want_ask;
            if (d.bid) want_bid = quantise(d.spec, *d.bid, Side::Bid, bid_anchor, config.tick);
            if (d.ask) want_ask = quantise(d.spec, *d.ask, Side::Ask, ask_anchor, config.tick);

            MaterialiseResult mr = materialise_action(book, want_bid, want_ask, d.market_order, t);
            for (const Fill& f : mr.market_fills) {
                account = apply_fill(account, f, f.aggressor_side);
                res.fills.push_back(AgentFill{step, t, f.aggressor_side, f.price, f.volume, true});
            }
            res.rejected_orders += mr.rejected;
            if (mr.market_empty_side) ++res.empty_side_market_orders;
            step_market = d.market_order;
            step_instructions = std::move(mr.instructions);

            const HalfTicks mid{tp->first + tp->second};
            const auto vb = volume_weighted_price(agent_profile(book, Side::Bid, bid_anchor, config.tick, d.spec.n_levels));
            const auto va = volume_weighted_price(agent_profile(book, Side::Ask, ask_anchor, config.tick, d.spec.n_levels));
            if (vb && va) offset = ((*vb + *va) / 2.0 - mid.ticks()) / static_cast<double>(config.tick);
        }
        if (config.record_instructions) {
            res.instructions.push_back(std::move(step_instructions));
            res.market_orders.push_back(step_market);
        }

        for (; cursor < day.messages.size() && day.messages[cursor].time <= step_end; ++cursor) {
            const MarketMessage& msg = day.messages[cursor];
            if (msg.type == EventType::Halt) {
                if (msg.price == -1) halted = true;
                else if (msg.price == 1) halted = false;
                continue;
            }
            HistoricalEffect eff = apply_historical_message(book, msg);
            if (eff.unknown) ++res.unknown_messages;
            if (eff.used_seed) ++res.seed_resolved_messages;
            for (const Fill& f : eff.agent_fills) {
                const Side agent_side = opposite(f.aggressor_side);
                account = apply_fill(account, f, agent_side);
                res.fills.push_back(AgentFill{step, msg.time, agent_side, f.price, f.volume, false});
            }
        }

        if (auto tp = touch()) last_mid = HalfTicks{tp->first + tp->second};
        res.steps.push_back(
            StepRecord{step_end, account.cash, account.inventory, last_mid, mark_to_market(account, last_mid), offset});
        t = step_end;
    }

    res.final_account = account;
    res.final_pnl = res.steps.empty() ? 0.0 : res.steps.back().pnl;
    return res;
}

}  // namespace betamm
