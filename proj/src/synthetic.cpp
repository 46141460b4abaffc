#include "betamm/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "betamm/errors.hpp"

namespace betamm {

namespace {

constexpr std::size_t kHalfRangeTicks = 20'000;

std::size_t side_ix(Side s) { return s == Side::Bid ? 0 : 1; }

}  // namespace

void SyntheticFlowParams::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("synthetic flow: ") + what);
    };
    require(base_price > 0, "base_price must be > 0");
    require(tick > 0, "tick must be > 0");
    require(session_length_s > 0, "session_length_s must be > 0");
    require(session_start_s >= 0, "session_start_s must be >= 0");
    require(submit_rate > 0 && cancel_rate > 0 && execute_rate > 0, "intensities must be > 0");
    require(hidden_rate >= 0, "hidden_rate must be >= 0");
    require(level_decay > 0 && level_decay <= 1, "level_decay must be in (0, 1]");
    require(submit_depth >= 1, "submit_depth must be >= 1");
    require(improve_prob >= 0 && improve_prob <= 1, "improve_prob must be in [0, 1]");
    require(partial_cancel_prob >= 0 && partial_cancel_prob <= 1, "partial_cancel_prob must be in [0, 1]");
    require(mean_order_size >= 1 && mean_execution_size >= 1, "mean sizes must be >= 1");
    require(reversion >= 0, "reversion must be >= 0");
    require(opening_levels >= 1 && opening_orders_per_level >= 1, "opening book must be non-empty");
    require(snapshot_levels >= 1, "snapshot_levels must be >= 1");
}

SyntheticFlow::SyntheticFlow(const SyntheticFlowParams& params) : p_(params), rng_(params.seed) {
    p_.validate();
    const Price half_range = static_cast<Price>(kHalfRangeTicks) * p_.tick;
    lo_ = std::max(p_.tick, p_.base_price - half_range);
    slots_ = static_cast<std::size_t>((p_.base_price + half_range - lo_) / p_.tick) + 1;
    bids_.resize(slots_);
    asks_.resize(slots_);
    bid_totals_.assign(slots_, 0);
    ask_totals_.assign(slots_, 0);
    for (int d = 0; d < p_.submit_depth; ++d) level_weights_.push_back(std::pow(p_.level_decay, d));
    now_ = seconds_to_time(p_.session_start_s);
    end_ = now_ + seconds_to_time(p_.session_length_s);
    queue_opening();
}

void SyntheticFlow::queue_opening() {
    for (int k = 0; k < p_.opening_levels; ++k) {
        for (int j = 0; j < p_.opening_orders_per_level; ++j) {
            for (Side s : {Side::Bid, Side::Ask}) {
                MarketMessage m;
                m.time = now_;
                m.type = EventType::Submit;
                m.order_id = next_id_++;
                m.size = rng_.geometric(p_.mean_order_size);
                m.price = s == Side::Bid ? p_.base_price - p_.tick * (k + 1) : p_.base_price + p_.tick * (k + 1);
                m.direction = s == Side::Bid ? 1 : -1;
                opening_.push_back(m);
            }
        }
    }
}

void SyntheticFlow::add_order(std::int64_t id, Side s, std::size_t i, Volume size) {
    auto& q = slot(s, i);
    if (q.empty()) {
        ++nonempty_[side_ix(s)];
        if (nonempty_[side_ix(s)] == 1) {
            (s == Side::Bid ? best_bid_ : best_ask_) = i;
        } else if (s == Side::Bid ? i > best_bid_ : i < best_ask_) {
            (s == Side::Bid ? best_bid_ : best_ask_) = i;
        }
    }
    q.push_back(RestingOrder{id, size});
    (s == Side::Bid ? bid_totals_ : ask_totals_)[i] += size;
    ++orders_per_side_[side_ix(s)];
    live_.emplace(id, Live{s, i, live_ids_.size()});
    live_ids_.push_back(id);
}

void SyntheticFlow::reduce_order(std::int64_t id, Volume amount) {
    auto it = live_.find(id);
    const Live lv = it->second;
    auto& q = slot(lv.side, lv.slot);
    auto o = std::find_if(q.begin(), q.end(), [&](const RestingOrder& r) { return r.id == id; });
    o->size -= amount;
    (lv.side == Side::Bid ? bid_totals_ : ask_totals_)[lv.slot] -= amount;
    if (o->size > 0) return;

    q.erase(o);
    --orders_per_side_[side_ix(lv.side)];
    const std::int64_t moved = live_ids_.back();
    live_ids_[lv.pos] = moved;
    live_.at(moved).pos = lv.pos;
    live_ids_.pop_back();
    live_.erase(id);
    if (q.empty()) {
        --nonempty_[side_ix(lv.side)];
        if (lv.slot == best_slot(lv.side)) refresh_best(lv.side);
    }
}

void SyntheticFlow::refresh_best(Side s) {
    if (!has_best(s)) return;
    if (s == Side::Bid) {
        while (bids_[best_bid_].empty()) --best_bid_;
    } else {
        while (asks_[best_ask_].empty()) ++best_ask_;
    }
}

BookSnapshot SyntheticFlow::snapshot() const {
    BookSnapshot snap = BookSnapshot::empty(p_.snapshot_levels);
    for (Side s : {Side::Bid, Side::Ask}) {
        const std::size_t want = std::min(p_.snapshot_levels, nonempty_[side_ix(s)]);
        auto& out = s == Side::Bid ? snap.bids : snap.asks;
        const auto& totals = s == Side::Bid ? bid_totals_ : ask_totals_;
        std::size_t got = 0;
        std::size_t i = best_slot(s);
        while (got < want) {
            if (totals[i] > 0) out[got++] = BookLevel{price_of(i), totals[i]};
            if (s == Side::Bid) --i; else ++i;
        }
    }
    return snap;
}

bool SyntheticFlow::emit_submit(Side s, MarketMessage& msg) {
    const Side o = opposite(s);
    std::size_t ref;
    if (has_best(s)) {
        ref = best_slot(s);
    } else if (has_best(o)) {
        ref = s == Side::Bid ? best_slot(o) - 1 : best_slot(o) + 1;
    } else {
        const auto mid = static_cast<std::size_t>((p_.base_price - lo_) / p_.tick);
        ref = s == Side::Bid ? mid - 1 : mid + 1;
    }

    std::size_t target;
    const bool wide = has_best(s) && has_best(o) && best_ask_ > best_bid_ + 1;
    if (wide && rng_.bernoulli(p_.improve_prob)) {
        target = s == Side::Bid ? ref + 1 : ref - 1;
    } else {
        double total = 0;
        for (double w : level_weights_) total += w;
        double u = rng_.uniform() * total;
        std::size_t d = 0;
        while (d + 1 < level_weights_.size() && u >= level_weights_[d]) u -= level_weights_[d++];
        if (s == Side::Bid) {
            if (ref < d + 1) return false;
            target = ref - d;
        } else {
            target = ref + d;
        }
    }
    if (target == 0 || target >= slots_ - 1) return false;

    msg.type = EventType::Submit;
    msg.order_id = next_id_++;
    msg.size = rng_.geometric(p_.mean_order_size);
    msg.price = price_of(target);
    msg.direction = s == Side::Bid ? 1 : -1;
    add_order(msg.order_id, s, target, msg.size);
    return true;
}

bool SyntheticFlow::emit_cancel(MarketMessage& msg) {
    if (live_ids_.empty()) return false;
    const std::int64_t id = live_ids_[rng_.below(live_ids_.size())];
    const Live lv = live_.at(id);
    const auto& q = slot(lv.side, lv.slot);
    const Volume size = std::find_if(q.begin(), q.end(), [&](const RestingOrder& r) { return r.id == id; })->size;

    // Keep both sides populated: the last order on a side may only shrink.
    const bool last = side_orders(lv.side) == 1;
    const bool partial = size > 1 && (last || rng_.bernoulli(p_.partial_cancel_prob));
    if (last && !partial) return false;

    msg.type = partial ? EventType::PartialCancel : EventType::Delete;
    msg.order_id = id;
    msg.size = partial ? 1 + static_cast<Volume>(rng_.below(static_cast<std::uint64_t>(size - 1))) : size;
    msg.price = price_of(lv.slot);
    msg.direction = lv.side == Side::Bid ? 1 : -1;
    reduce_order(id, msg.size);
    return true;
}

bool SyntheticFlow::emit_execution_start() {
    if (!has_best(Side::Bid) || !has_best(Side::Ask)) return false;
    const double mid_slot = 0.5 * static_cast<double>(best_bid_ + best_ask_);
    const double elapsed_h = time_to_seconds(now_) / 3600.0 - p_.session_start_s / 3600.0;
    const double fundamental =
        static_cast<double>(p_.base_price - lo_) / static_cast<double>(p_.tick) + p_.drift_ticks_per_hour * elapsed_h;
    const double gap = fundamental - mid_slot;
    const double p_buy = 1.0 / (1.0 + std::exp(-p_.reversion * gap));
    const Side passive = rng_.bernoulli(p_buy) ? Side::Ask : Side::Bid;

    const std::size_t i = best_slot(passive);
    const Volume level_total = passive == Side::Bid ? bid_totals_[i] : ask_totals_[i];
    const Volume cap = level_total - (nonempty_[side_ix(passive)] == 1 ? 1 : 0);
    if (cap < 1) return false;
    pending_.push_back(PendingExecution{passive, i, std::min(rng_.geometric(p_.mean_execution_size), cap)});
    return true;
}

void SyntheticFlow::emit_pending_execution(MarketMessage& msg) {
    PendingExecution& ex = pending_.front();
    const RestingOrder front = slot(ex.passive, ex.slot).front();
    const Volume v = std::min(front.size, ex.remaining);
    msg.type = EventType::ExecuteVisible;
    msg.order_id = front.id;
    msg.size = v;
    msg.price = price_of(ex.slot);
    msg.direction = ex.passive == Side::Bid ? 1 : -1;
    reduce_order(front.id, v);
    ex.remaining -= v;
    if (ex.remaining == 0) pending_.pop_front();
}

bool SyntheticFlow::draw_event(MarketMessage& msg) {
    for (;;) {
        const double r_submit = 2.0 * p_.submit_rate;
        const double r_cancel = p_.cancel_rate * static_cast<double>(live_ids_.size());
        const double r_total = r_submit + r_cancel + p_.execute_rate + p_.hidden_rate;
        now_ += static_cast<Time>(std::llround(rng_.exponential(r_total) * static_cast<double>(kNanosPerSecond)));
        if (now_ > end_) return false;
        msg.time = now_;

        double u = rng_.uniform() * r_total;
        if (u < r_submit) {
            if (emit_submit(u < p_.submit_rate ? Side::Bid : Side::Ask, msg)) return true;
            continue;
        }
        u -= r_submit;
        if (u < r_cancel) {
            if (emit_cancel(msg)) return true;
            continue;
        }
        u -= r_cancel;
        if (u < p_.execute_rate) {
            if (emit_execution_start()) {
                emit_pending_execution(msg);
                return true;
            }
            continue;
        }
        if (!has_best(Side::Bid) || !has_best(Side::Ask)) continue;
        const bool buy = rng_.bernoulli(0.5);
        msg.type = EventType::ExecuteHidden;
        msg.order_id = 0;
        msg.size = rng_.geometric(p_.mean_order_size);
        msg.price = buy ? price_of(best_ask_) : price_of(best_bid_);
        msg.direction = buy ? -1 : 1;
        return true;
    }
}

bool SyntheticFlow::next(MarketMessage& msg, BookSnapshot* snap) {
    if (p_.max_messages != 0 && emitted_ >= p_.max_messages) return false;
    if (!opening_.empty()) {
        msg = opening_.front();
        opening_.pop_front();
        const auto i = static_cast<std::size_t>((msg.price - lo_) / p_.tick);
        add_order(msg.order_id, msg.side(), i, msg.size);
    } else if (!pending_.empty()) {
        msg.time = now_;
        emit_pending_execution(msg);
    } else if (!draw_event(msg)) {
        return false;
    }
    ++emitted_;
    if (snap) *snap = snapshot();
    return true;
}

SyntheticDay generate_synthetic_day(const SyntheticFlowParams& params, bool with_snapshots) {
    SyntheticFlow flow(params);
    SyntheticDay day;
    day.initial = BookSnapshot::empty(params.snapshot_levels);
    MarketMessage msg;
    BookSnapshot snap;
    while (flow.next(msg, with_snapshots ? &snap : nullptr)) {
        day.messages.push_back(msg);
        if (with_snapshots) day.snapshots.push_back(snap);
    }
    return day;
}

}  // namespace betamm
