#include "betamm/lobster.hpp"

#include <array>
#include <charconv>
#include <istream>
#include <ostream>

#include "betamm/errors.hpp"

namespace betamm {

namespace {

template <class T>
bool parse_int(std::string_view s, T& out) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && p == s.data() + s.size() && !s.empty();
}

std::vector<std::string_view> split_csv(std::string_view row) {
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    std::vector<std::string_view> cols;
    std::size_t start = 0;
    for (;;) {
        auto pos = row.find(',', start);
        if (pos == std::string_view::npos) {
            cols.push_back(row.substr(start));
            break;
        }
        cols.push_back(row.substr(start, pos - start));
        start = pos + 1;
    }
    return cols;
}

bool blank(std::string_view s) {
    return s.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

BookSnapshot BookSnapshot::empty(std::size_t levels) {
    BookSnapshot s;
    s.asks.assign(levels, BookLevel{kEmptyAskPrice, 0});
    s.bids.assign(levels, BookLevel{kEmptyBidPrice, 0});
    return s;
}

Time parse_time(std::string_view text) {
    while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
    while (!text.empty() && (text.back() == ' ' || text.back() == '\r')) text.remove_suffix(1);
    auto dot = text.find('.');
    std::string_view whole = text.substr(0, dot);
    std::int64_t secs = 0;
    if (!parse_int(whole, secs) || secs < 0) throw Error("bad time '" + std::string(text) + "'");
    std::int64_t frac = 0;
    if (dot != std::string_view::npos) {
        std::string_view digits = text.substr(dot + 1);
        if (digits.empty()) throw Error("bad time '" + std::string(text) + "'");
        int n = 0;
        for (char c : digits) {
            if (c < '0' || c > '9') throw Error("bad time '" + std::string(text) + "'");
            // Sub-nanosecond digits are truncated.
            if (n < 9) {
                frac = frac * 10 + (c - '0');
                ++n;
            }
        }
        for (; n < 9; ++n) frac *= 10;
    }
    return secs * kNanosPerSecond + frac;
}

std::string format_time(Time t) {
    std::array<char, 32> buf{};
    const std::int64_t secs = t / kNanosPerSecond;
    const std::int64_t frac = t % kNanosPerSecond;
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), secs);
    std::string out(buf.data(), p);
    std::string f = std::to_string(frac);
    out += '.';
    out.append(9 - f.size(), '0');
    out += f;
    return out;
}

MarketMessage parse_message_row(std::string_view row, std::size_t row_no) {
    auto cols = split_csv(row);
    if (cols.size() != 6)
        throw MalformedRow(row_no, "expected 6 columns, got " + std::to_string(cols.size()));
    MarketMessage m;
    try {
        m.time = parse_time(cols[0]);
    } catch (const Error& e) {
        throw MalformedRow(row_no, e.what());
    }
    int type = 0;
    if (!parse_int(cols[1], type) || type < 1 || type > 7)
        throw MalformedRow(row_no, "event type must be 1..7");
    m.type = static_cast<EventType>(type);
    if (!parse_int(cols[2], m.order_id)) throw MalformedRow(row_no, "bad order id");
    if (!parse_int(cols[3], m.size) || m.size < 0) throw MalformedRow(row_no, "bad size");
    if (!parse_int(cols[4], m.price)) throw MalformedRow(row_no, "bad price");
    if (!parse_int(cols[5], m.direction) || (m.direction != 1 && m.direction != -1))
        throw MalformedRow(row_no, "direction must be 1 or -1");
    return m;
}

std::optional<MarketMessage> MessageReader::next() {
    while (std::getline(in_, line_)) {
        ++row_;
        if (blank(line_)) throw MalformedRow(row_, "empty row");
        MarketMessage m = parse_message_row(line_, row_);
        if (last_time_ && m.time < *last_time_)
            throw TimeRegression(row_, "time " + format_time(m.time) + " precedes " + format_time(*last_time_));
        last_time_ = m.time;
        return m;
    }
    return std::nullopt;
}

std::vector<MarketMessage> parse_messages(std::istream& in) {
    MessageReader reader(in);
    std::vector<MarketMessage> out;
    while (auto m = reader.next()) out.push_back(*m);
    return out;
}

void validate_snapshot(const BookSnapshot& snap, std::size_t row_no) {
    if (snap.asks.size() != snap.bids.size()) throw MalformedRow(row_no, "ask/bid level count mismatch");
    for (Side s : {Side::Ask, Side::Bid}) {
        const auto& lv = s == Side::Ask ? snap.asks : snap.bids;
        bool seen_empty = false;
        for (std::size_t i = 0; i < lv.size(); ++i) {
            if (lv[i].size < 0) throw MalformedRow(row_no, "negative size");
            if (is_empty_level_price(lv[i].price)) {
                seen_empty = true;
                continue;
            }
            if (seen_empty)
                throw MalformedRow(row_no, std::string(to_string(s)) + " level " + std::to_string(i + 1) +
                                               " populated after an empty level");
            if (lv[i].size == 0)
                throw MalformedRow(row_no, std::string(to_string(s)) + " level " + std::to_string(i + 1) +
                                               " has a price but zero size");
            if (i > 0) {
                const bool ordered = s == Side::Ask ? lv[i].price > lv[i - 1].price : lv[i].price < lv[i - 1].price;
                if (!ordered)
                    throw MalformedRow(row_no, std::string(to_string(s)) + " price at level " +
                                                   std::to_string(i + 1) + " out of order");
            }
        }
    }
    if (!snap.asks.empty() && !snap.asks[0].empty() && !snap.bids[0].empty() &&
        snap.bids[0].price >= snap.asks[0].price)
        throw MalformedRow(row_no, "crossed book");
}

BookSnapshot parse_snapshot_row(std::string_view row, std::size_t levels, std::size_t row_no) {
    auto cols = split_csv(row);
    if (cols.size() != 4 * levels)
        throw MalformedRow(row_no, "expected " + std::to_string(4 * levels) + " columns, got " +
                                       std::to_string(cols.size()));
    BookSnapshot s;
    s.asks.resize(levels);
    s.bids.resize(levels);
    for (std::size_t i = 0; i < levels; ++i) {
        Price ap = 0, bp = 0;
        Volume as = 0, bs = 0;
        if (!parse_int(cols[4 * i], ap) || !parse_int(cols[4 * i + 1], as) || !parse_int(cols[4 * i + 2], bp) ||
            !parse_int(cols[4 * i + 3], bs))
            throw MalformedRow(row_no, "non-integer field at level " + std::to_string(i + 1));
        s.asks[i] = is_empty_level_price(ap) ? BookLevel{kEmptyAskPrice, 0} : BookLevel{ap, as};
        s.bids[i] = is_empty_level_price(bp) ? BookLevel{kEmptyBidPrice, 0} : BookLevel{bp, bs};
    }
    validate_snapshot(s, row_no);
    return s;
}

std::optional<BookSnapshot> SnapshotReader::next() {
    if (!std::getline(in_, line_)) return std::nullopt;
    ++row_;
    return parse_snapshot_row(line_, levels_, row_);
}

OrderBook snapshot_to_book(const BookSnapshot& snap) {
    validate_snapshot(snap);
    OrderBook book;
    for (Side s : {Side::Bid, Side::Ask}) {
        for (const auto& lvl : s == Side::Bid ? snap.bids : snap.asks) {
            if (lvl.empty()) break;
            book.insert_limit(s, lvl.price, lvl.size, Owner::Historical);
        }
    }
    return book;
}

BookSnapshot book_to_snapshot(const OrderBook& book, std::size_t levels, std::optional<Owner> only) {
    BookSnapshot snap = BookSnapshot::empty(levels);
    for (Side s : {Side::Bid, Side::Ask}) {
        auto& out = s == Side::Bid ? snap.bids : snap.asks;
        std::size_t i = 0;
        book.for_each_level(s, [&](Price px, const OrderBook::Level& lvl) {
            if (i >= levels) return false;
            Volume v = lvl.total;
            if (only) {
                v = 0;
                for (const auto& o : lvl.orders)
                    if (o.owner == *only) v += o.remaining;
                if (v == 0) return true;
            }
            out[i++] = BookLevel{px, v};
            return true;
        });
    }
    return snap;
}

void write_message(std::ostream& out, const MarketMessage& m) {
    out << format_time(m.time) << ',' << static_cast<int>(m.type) << ',' << m.order_id << ',' << m.size << ','
        << m.price << ',' << m.direction << '\n';
}

void write_snapshot(std::ostream& out, const BookSnapshot& snap) {
    for (std::size_t i = 0; i < snap.levels(); ++i) {
        if (i) out << ',';
        out << snap.asks[i].price << ',' << snap.asks[i].size << ',' << snap.bids[i].price << ','
            << snap.bids[i].size;
    }
    out << '\n';
}

}  // namespace betamm
