#include "betamm/order_book.hpp"

#include <algorithm>
#include <iterator>
#include <string>

#include "betamm/errors.hpp"

namespace betamm {

namespace {

std::string id_str(OrderId id) { return "order " + std::to_string(id.value); }

bool crosses(Side side, Price price, Price opposite_best) {
    return side == Side::Bid ? price >= opposite_best : price <= opposite_best;
}

}  // namespace

OrderId OrderBook::insert_limit(Side side, Price price, Volume volume, Owner owner) {
    OrderId id{next_internal_id_};
    append(id, side, price, volume, owner);
    --next_internal_id_;
    return id;
}

void OrderBook::insert_with_id(OrderId id, Side side, Price price, Volume volume, Owner owner) {
    if (index_.contains(id)) throw Error("duplicate " + id_str(id));
    append(id, side, price, volume, owner);
}

void OrderBook::append(OrderId id, Side side, Price price, Volume volume, Owner owner) {
    if (volume < 1) throw InvalidVolume("limit order volume must be >= 1, got " + std::to_string(volume));
    if (price <= 0) throw InvalidPrice("limit order price must be > 0, got " + std::to_string(price));
    if (auto opp = best(opposite(side)); opp && crosses(side, price, *opp))
        throw CrossingOrder(std::string(to_string(side)) + " at " + std::to_string(price) +
                            " would cross opposite best " + std::to_string(*opp));

    Level& lvl = half(side)[price];
    lvl.orders.push_back(Order{id, side, price, volume, owner, next_seq_++});
    lvl.total += volume;
    index_.emplace(id, Locator{side, price, std::prev(lvl.orders.end())});
}

void OrderBook::erase(std::unordered_map<OrderId, Locator>::iterator loc) {
    auto& hb = half(loc->second.side);
    auto lvl_it = hb.find(loc->second.price);
    lvl_it->second.total -= loc->second.it->remaining;
    lvl_it->second.orders.erase(loc->second.it);
    if (lvl_it->second.orders.empty()) hb.erase(lvl_it);
    index_.erase(loc);
}

Volume OrderBook::cancel_volume(OrderId id, Volume volume) {
    auto loc = index_.find(id);
    if (loc == index_.end()) throw UnknownOrder(id_str(id));
    if (volume < 1) throw InvalidVolume("cancel volume must be >= 1");
    Order& o = *loc->second.it;
    const Volume cancelled = std::min(volume, o.remaining);
    if (cancelled == o.remaining) {
        erase(loc);
    } else {
        o.remaining -= cancelled;
        half(o.side).find(o.price)->second.total -= cancelled;
    }
    return cancelled;
}

Volume OrderBook::remove(OrderId id) {
    auto loc = index_.find(id);
    if (loc == index_.end()) throw UnknownOrder(id_str(id));
    const Volume v = loc->second.it->remaining;
    erase(loc);
    return v;
}

Fill OrderBook::fill_order(OrderId id, Volume volume, Time ts) {
    auto loc = index_.find(id);
    if (loc == index_.end()) throw UnknownOrder(id_str(id));
    if (volume < 1) throw InvalidVolume("fill volume must be >= 1");
    Order& o = *loc->second.it;
    Fill f{o.id, o.price, std::min(volume, o.remaining), opposite(o.side), o.owner, ts};
    if (f.volume == o.remaining) {
        erase(loc);
    } else {
        o.remaining -= f.volume;
        half(o.side).find(o.price)->second.total -= f.volume;
    }
    return f;
}

MarketExecution OrderBook::walk(Side side, std::optional<Price> limit, Volume volume, Time ts,
                                std::optional<Owner> skip_owner) {
    if (volume < 1) throw InvalidVolume("market order volume must be >= 1");
    const Side passive = opposite(side);
    HalfBook& hb = half(passive);

    auto next_level = [&](std::optional<Price> after) {
        if (passive == Side::Ask) return after ? hb.upper_bound(*after) : hb.begin();
        auto it = after ? hb.lower_bound(*after) : hb.end();
        return it == hb.begin() ? hb.end() : std::prev(it);
    };

    MarketExecution ex;
    Volume need = volume;
    std::optional<Price> cursor;
    for (auto lvl_it = next_level(cursor); need > 0 && lvl_it != hb.end(); lvl_it = next_level(cursor)) {
        const Price px = lvl_it->first;
        if (limit && (side == Side::Bid ? px > *limit : px < *limit)) break;
        cursor = px;
        Level& lvl = lvl_it->second;
        for (auto it = lvl.orders.begin(); need > 0 && it != lvl.orders.end();) {
            if (skip_owner && it->owner == *skip_owner) {
                ++it;
                continue;
            }
            const Volume v = std::min(need, it->remaining);
            ex.fills.push_back(Fill{it->id, px, v, side, it->owner, ts});
            need -= v;
            it->remaining -= v;
            lvl.total -= v;
            if (it->remaining == 0) {
                index_.erase(it->id);
                it = lvl.orders.erase(it);
            } else {
                ++it;
            }
        }
        if (lvl.orders.empty()) hb.erase(lvl_it);
    }
    ex.filled = volume - need;
    ex.shortfall = need;
    return ex;
}

MarketExecution OrderBook::execute_market(Side side, Volume volume, Time ts,
                                          std::optional<Owner> skip_owner) {
    auto ex = walk(side, std::nullopt, volume, ts, skip_owner);
    if (ex.filled == 0)
        throw EmptySide(std::string("no resting volume on the ") + std::string(to_string(opposite(side))) +
                        " side");
    return ex;
}

MarketExecution OrderBook::execute_limit(Side side, Price limit_price, Volume volume, Time ts,
                                         std::optional<Owner> skip_owner) {
    return walk(side, limit_price, volume, ts, skip_owner);
}

Volume OrderBook::volume_ahead(OrderId id) const {
    auto loc = index_.find(id);
    if (loc == index_.end()) throw UnknownOrder(id_str(id));
    const Level& lvl = half(loc->second.side).at(loc->second.price);
    Volume ahead = 0;
    for (auto it = lvl.orders.begin(); it != loc->second.it; ++it) ahead += it->remaining;
    return ahead;
}

std::optional<Price> OrderBook::best(Side side) const noexcept {
    const auto& hb = half(side);
    if (hb.empty()) return std::nullopt;
    return side == Side::Bid ? hb.rbegin()->first : hb.begin()->first;
}

std::optional<Price> OrderBook::best_excluding(Side side, Owner owner) const noexcept {
    std::optional<Price> out;
    for_each_level(side, [&](Price px, const Level& lvl) {
        for (const auto& o : lvl.orders) {
            if (o.owner != owner) {
                out = px;
                return false;
            }
        }
        return true;
    });
    return out;
}

Price OrderBook::best_bid() const {
    auto b = best(Side::Bid);
    if (!b) throw EmptySide("bid side is empty");
    return *b;
}

Price OrderBook::best_ask() const {
    auto a = best(Side::Ask);
    if (!a) throw EmptySide("ask side is empty");
    return *a;
}

HalfTicks OrderBook::midprice() const { return HalfTicks{best_bid() + best_ask()}; }

const Order* OrderBook::find(OrderId id) const noexcept {
    auto loc = index_.find(id);
    return loc == index_.end() ? nullptr : &*loc->second.it;
}

const OrderBook::Level* OrderBook::level(Side side, Price price) const noexcept {
    const auto& hb = half(side);
    auto it = hb.find(price);
    return it == hb.end() ? nullptr : &it->second;
}

Volume OrderBook::level_volume(Side side, Price price) const noexcept {
    const Level* l = level(side, price);
    return l ? l->total : 0;
}

Volume OrderBook::total_volume(Side side) const noexcept {
    Volume v = 0;
    for (const auto& [px, lvl] : half(side)) v += lvl.total;
    return v;
}

std::map<Price, std::vector<const Order*>> OrderBook::orders_of(Side side, Owner owner) const {
    std::map<Price, std::vector<const Order*>> out;
    for (const auto& [px, lvl] : half(side))
        for (const auto& o : lvl.orders)
            if (o.owner == owner) out[px].push_back(&o);
    return out;
}

bool OrderBook::check_integrity() const {
    std::size_t seen = 0;
    for (Side s : {Side::Bid, Side::Ask}) {
        for (const auto& [px, lvl] : half(s)) {
            if (lvl.orders.empty()) return false;
            Volume total = 0;
            std::uint64_t last_seq = 0;
            for (auto it = lvl.orders.begin(); it != lvl.orders.end(); ++it) {
                if (it->remaining < 1 || it->price != px || it->side != s) return false;
                if (it->arrival_seq <= last_seq) return false;
                last_seq = it->arrival_seq;
                total += it->remaining;
                auto loc = index_.find(it->id);
                if (loc == index_.end() || loc->second.it != it || loc->second.side != s ||
                    loc->second.price != px)
                    return false;
                ++seen;
            }
            if (total != lvl.total) return false;
        }
    }
    if (seen != index_.size()) return false;
    auto b = best(Side::Bid);
    auto a = best(Side::Ask);
    return !(a && b && *b >= *a);
}

}  // namespace betamm
