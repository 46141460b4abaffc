#pragma once

#include <cstdint>
#include <list>
#include <map>
#include <optional>
#include <unordered_map>
#include <vector>

#include "betamm/types.hpp"

namespace betamm {

struct Order {
    OrderId id;
    Side side = Side::Bid;
    Price price = 0;
    Volume remaining = 0;
    Owner owner = Owner::Historical;
    std::uint64_t arrival_seq = 0;
};

struct Fill {
    OrderId order_id;  // the passive (resting) order
    Price price = 0;
    Volume volume = 0;
    Side aggressor_side = Side::Bid;
    Owner passive_owner = Owner::Historical;
    Time timestamp = 0;
};

struct MarketExecution {
    std::vector<Fill> fills;
    Volume filled = 0;
    Volume shortfall = 0;
};

// Two half-books of FIFO queues with price-time priority. Historical and agent
// orders share the queues; arrival_seq is a single book-wide counter so that
// priority within a level is total.
//
// The book never crosses: any insert that would lock or cross the opposite
// best is rejected with CrossingOrder. Marketable flow goes through
// execute_market / execute_limit instead.
class OrderBook {
public:
    using Queue = std::list<Order>;

    struct Level {
        Queue orders;
        Volume total = 0;
    };

    // Inserts with a freshly allocated internal id (negative, never collides
    // with exchange ids, which are non-negative).
    OrderId insert_limit(Side side, Price price, Volume volume, Owner owner);

    // Inserts with a caller-supplied id (historical messages).
    void insert_with_id(OrderId id, Side side, Price price, Volume volume, Owner owner);

    // Reduces remaining by min(volume, remaining); removes the order at zero.
    Volume cancel_volume(OrderId id, Volume volume);

    // Removes the order entirely, returning what was resting.
    Volume remove(OrderId id);

    // Aggressor `side` walks the opposite half-book in price-time priority.
    // Orders owned by `skip_owner` are stepped over (self-trade prevention).
    MarketExecution execute_market(Side side, Volume volume, Time ts = 0,
                                   std::optional<Owner> skip_owner = std::nullopt);

    // Like execute_market but never trades through `limit_price`.
    MarketExecution execute_limit(Side side, Price limit_price, Volume volume, Time ts = 0,
                                  std::optional<Owner> skip_owner = std::nullopt);

    // Executes `volume` (clamped to remaining) against one resting order.
    Fill fill_order(OrderId id, Volume volume, Time ts = 0);

    Volume volume_ahead(OrderId id) const;

    Price best_bid() const;
    Price best_ask() const;
    HalfTicks midprice() const;
    std::optional<Price> best(Side side) const noexcept;
    // Best price on `side` among levels holding at least one order not owned by `owner`.
    std::optional<Price> best_excluding(Side side, Owner owner) const noexcept;

    const Order* find(OrderId id) const noexcept;
    bool contains(OrderId id) const noexcept { return index_.contains(id); }
    const Level* level(Side side, Price price) const noexcept;
    Volume level_volume(Side side, Price price) const noexcept;

    bool empty(Side side) const noexcept { return half(side).empty(); }
    std::size_t level_count(Side side) const noexcept { return half(side).size(); }
    std::size_t order_count() const noexcept { return index_.size(); }
    Volume total_volume(Side side) const noexcept;
    std::uint64_t last_arrival_seq() const noexcept { return next_seq_ - 1; }

    // Visits levels best-first until `fn` returns false.
    template <class Fn>
    void for_each_level(Side side, Fn&& fn) const {
        if (side == Side::Bid) {
            for (auto it = bids_.rbegin(); it != bids_.rend(); ++it)
                if (!fn(it->first, it->second)) return;
        } else {
            for (auto it = asks_.begin(); it != asks_.end(); ++it)
                if (!fn(it->first, it->second)) return;
        }
    }

    // Orders owned by `owner`, grouped by price, each group in arrival order.
    std::map<Price, std::vector<const Order*>> orders_of(Side side, Owner owner) const;

    // Iterating the book reproduces the id index exactly; used by tests.
    bool check_integrity() const;

private:
    using HalfBook = std::map<Price, Level>;

    struct Locator {
        Side side;
        Price price;
        Queue::iterator it;
    };

    HalfBook& half(Side s) noexcept { return s == Side::Bid ? bids_ : asks_; }
    const HalfBook& half(Side s) const noexcept { return s == Side::Bid ? bids_ : asks_; }

    void append(OrderId id, Side side, Price price, Volume volume, Owner owner);
    void erase(std::unordered_map<OrderId, Locator>::iterator loc);
    MarketExecution walk(Side side, std::optional<Price> limit, Volume volume, Time ts,
                         std::optional<Owner> skip_owner);

    HalfBook bids_;
    HalfBook asks_;
    std::unordered_map<OrderId, Locator> index_;
    std::uint64_t next_seq_ = 1;
    std::int64_t next_internal_id_ = -1;
};

}  // namespace betamm
