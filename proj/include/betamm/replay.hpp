#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "betamm/accounting.hpp"
#include "betamm/beta_profile.hpp"
#include "betamm/lobster.hpp"
#include "betamm/order_book.hpp"
#include "betamm/policies.hpp"

namespace betamm {

// One trading day: the book state before the first message plus the message
// stream. For LOBSTER files `initial` is the first orderbook row and
// `messages` starts at the second message.
struct DayData {
    std::string name;
    BookSnapshot initial;
    std::vector<MarketMessage> messages;

    Time open() const;   // first message time
    Time close() const;  // last message time
};

// Effect of one historical message on the book.
struct HistoricalEffect {
    std::vector<Fill> agent_fills;  // fills against agent-owned resting orders
    bool unknown = false;           // referenced an order that is not in the book
    bool used_seed = false;         // resolved against snapshot seed volume
};

// Applies one historical message. Executions fill agent orders that sit ahead
// of the referenced order (better price, or same price and earlier arrival)
// before touching the referenced order, which keeps whatever volume the agent
// absorbed. Messages for ids missing from the book fall back to the seed order
// at that price, if any, else they are flagged unknown and skipped.
HistoricalEffect apply_historical_message(OrderBook& book, const MarketMessage& msg);

// Level-1 prices for the agent's bid and ask lattices given the historical
// touch and min_quote. Inside-spread quotes stop one tick short of the
// opposite touch and never meet each other.
std::pair<Price, Price> quote_anchors(Price touch_bid, Price touch_ask, int min_quote, Price tick);

// The agent's resting orders on `side` projected onto a lattice.
VolumeProfile agent_profile(const OrderBook& book, Side side, Price anchor, Price tick, int n_levels);

struct MaterialiseResult {
    std::vector<Instruction> instructions;  // executed, with assigned ids for inserts
    std::vector<Fill> market_fills;
    Volume market_shortfall = 0;
    bool market_empty_side = false;
    std::size_t rejected = 0;  // inserts refused by the book
};

// Market order first (skipping the agent's own orders), then the per-side
// diffs: every cancel on both sides before any insert. Agent orders that fall
// outside the desired lattice are cancelled. A missing desired profile cancels
// the whole side.
MaterialiseResult materialise_action(OrderBook& book, const std::optional<VolumeProfile>& desired_bid,
                                     const std::optional<VolumeProfile>& desired_ask,
                                     const std::optional<MarketOrder>& market_order, Time now = 0);

struct RandomStart {
    std::uint64_t seed = 0;
};

struct EpisodeConfig {
    std::variant<Time, RandomStart> start = RandomStart{};
    double length_s = 3600.0;
    double step_interval_s = 1.0;
    std::size_t levels = 50;  // snapshot depth used to initialise the book
    Price tick = 100;
    bool record_instructions = false;

    void validate() const;
};

struct AgentFill {
    std::size_t step = 0;
    Time time = 0;
    Side side = Side::Bid;  // Bid: agent bought
    Price price = 0;
    Volume volume = 0;
    bool aggressive = false;  // agent market order

    bool operator==(const AgentFill&) const = default;
};

struct StepRecord {
    Time time = 0;
    std::int64_t cash = 0;
    Volume inventory = 0;
    HalfTicks mid;
    double pnl = 0.0;
    double quoted_offset = 0.0;  // ticks; NaN when either side has no agent volume

    bool operator==(const StepRecord& o) const;
};

struct EpisodeResult {
    Time start = 0;
    Time end = 0;
    HalfTicks first_mid;
    std::vector<StepRecord> steps;
    std::vector<AgentFill> fills;
    std::vector<std::vector<Instruction>> instructions;  // per step, when recorded
    std::vector<std::optional<MarketOrder>> market_orders;  // per step, when recorded
    AccountState initial_account;
    AccountState final_account;
    double final_pnl = 0.0;
    std::size_t unknown_messages = 0;
    std::size_t seed_resolved_messages = 0;
    std::size_t rejected_orders = 0;
    std::size_t empty_side_market_orders = 0;

    bool operator==(const EpisodeResult&) const = default;
};

// Uniform over [open, close - length], in whole nanoseconds.
Time episode_start_sampler(Time open, Time close, Time length, std::uint64_t seed);

// Builds the start-of-episode book: replays the day up to `start`, then keeps
// only the top `levels` of each side as seed orders.
OrderBook initial_book(const DayData& day, Time start, std::size_t levels, std::size_t* cursor);

EpisodeResult run_episode(const DayData& day, const EpisodeConfig& config, const Policy& policy,
                          AccountState account = {});

}  // namespace betamm
