#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <unordered_map>
#include <vector>

#include "betamm/lobster.hpp"
#include "betamm/random.hpp"
#include "betamm/types.hpp"

namespace betamm {

// Poisson order flow around a fundamental price. Submissions land on levels
// with intensity decaying geometrically away from the touch, resting orders
// cancel at a per-order rate, and marketable orders hit the best level with a
// side bias that pulls the midprice toward the fundamental. A non-zero drift
// moves the fundamental linearly, which produces trending days.
struct SyntheticFlowParams {
    std::uint64_t seed = 42;
    Price base_price = 1'000'000;  // 100.00
    Price tick = 100;              // 0.01
    double session_start_s = 34'200.0;
    double session_length_s = 23'400.0;

    double submit_rate = 1.5;  // per side, per second
    double level_decay = 0.7;  // intensity ratio between adjacent levels
    int submit_depth = 15;
    double improve_prob = 0.2;  // chance a submit steps inside a wide spread
    double cancel_rate = 0.01;  // per resting order, per second
    double partial_cancel_prob = 0.25;
    double execute_rate = 0.4;  // marketable orders per second, both sides
    double hidden_rate = 0.02;
    double mean_order_size = 100.0;
    double mean_execution_size = 120.0;

    double reversion = 0.5;  // logistic slope per tick of (fundamental - mid)
    double drift_ticks_per_hour = 0.0;

    int opening_levels = 10;
    int opening_orders_per_level = 2;
    std::size_t snapshot_levels = 50;
    std::size_t max_messages = 0;  // 0: run to the end of the session

    void validate() const;
};

// Streaming generator. Keeps its own array-indexed book, independent of
// OrderBook, so that its snapshots are a genuine second implementation.
class SyntheticFlow {
public:
    explicit SyntheticFlow(const SyntheticFlowParams& params);

    // Produces the next message and, when `snapshot` is non-null, the top
    // `snapshot_levels` of the book after it. Returns false at session end.
    bool next(MarketMessage& msg, BookSnapshot* snapshot = nullptr);

    BookSnapshot snapshot() const;
    std::size_t messages_emitted() const noexcept { return emitted_; }

private:
    struct RestingOrder {
        std::int64_t id;
        Volume size;
    };
    struct Live {
        Side side;
        std::size_t slot;
        std::size_t pos;  // index into live_ids_
    };
    struct PendingExecution {
        Side passive;
        std::size_t slot;
        Volume remaining;
    };

    std::vector<RestingOrder>& slot(Side s, std::size_t i) { return s == Side::Bid ? bids_[i] : asks_[i]; }
    const std::vector<RestingOrder>& slot(Side s, std::size_t i) const {
        return s == Side::Bid ? bids_[i] : asks_[i];
    }
    Price price_of(std::size_t i) const noexcept { return lo_ + static_cast<Price>(i) * p_.tick; }
    bool has_best(Side s) const noexcept { return nonempty_[s == Side::Bid ? 0 : 1] > 0; }
    std::size_t best_slot(Side s) const noexcept { return s == Side::Bid ? best_bid_ : best_ask_; }
    std::size_t side_orders(Side s) const noexcept { return orders_per_side_[s == Side::Bid ? 0 : 1]; }

    void queue_opening();
    bool draw_event(MarketMessage& msg);
    bool emit_submit(Side s, MarketMessage& msg);
    bool emit_cancel(MarketMessage& msg);
    bool emit_execution_start();
    void emit_pending_execution(MarketMessage& msg);

    void add_order(std::int64_t id, Side s, std::size_t slot_idx, Volume size);
    void reduce_order(std::int64_t id, Volume amount);
    void refresh_best(Side s);

    SyntheticFlowParams p_;
    Rng rng_;
    Price lo_ = 0;
    std::size_t slots_ = 0;
    std::vector<std::vector<RestingOrder>> bids_;
    std::vector<std::vector<RestingOrder>> asks_;
    std::vector<Volume> bid_totals_;
    std::vector<Volume> ask_totals_;
    std::size_t best_bid_ = 0;
    std::size_t best_ask_ = 0;
    std::size_t nonempty_[2] = {0, 0};
    std::size_t orders_per_side_[2] = {0, 0};
    std::unordered_map<std::int64_t, Live> live_;
    std::vector<std::int64_t> live_ids_;
    std::vector<double> level_weights_;

    std::deque<MarketMessage> opening_;
    std::deque<PendingExecution> pending_;
    Time now_ = 0;
    Time end_ = 0;
    std::int64_t next_id_ = 1;
    std::size_t emitted_ = 0;
};

struct SyntheticDay {
    BookSnapshot initial;
    std::vector<MarketMessage> messages;
    std::vector<BookSnapshot> snapshots;  // row i: state after messages[i]; empty unless requested
};

SyntheticDay generate_synthetic_day(const SyntheticFlowParams& params, bool with_snapshots = true);

}  // namespace betamm
