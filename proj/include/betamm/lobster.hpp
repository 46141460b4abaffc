#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "betamm/order_book.hpp"
#include "betamm/types.hpp"

namespace betamm {

enum class EventType : std::uint8_t {
    Submit = 1,
    PartialCancel = 2,
    Delete = 3,
    ExecuteVisible = 4,
    ExecuteHidden = 5,
    Cross = 6,
    Halt = 7,
};

// One row of a LOBSTER message file.
struct MarketMessage {
    Time time = 0;
    EventType type = EventType::Submit;
    std::int64_t order_id = 0;
    Volume size = 0;
    Price price = 0;
    int direction = 1;  // +1 buy limit order, -1 sell limit order

    Side side() const noexcept { return direction > 0 ? Side::Bid : Side::Ask; }
    bool operator==(const MarketMessage&) const = default;
};

inline constexpr Price kEmptyAskPrice = 9'999'999'999;
inline constexpr Price kEmptyBidPrice = -9'999'999'999;
inline constexpr Price kEmptyLevelThreshold = 1'000'000'000;

constexpr bool is_empty_level_price(Price p) noexcept {
    return p >= kEmptyLevelThreshold || p <= -kEmptyLevelThreshold;
}

struct BookLevel {
    Price price = 0;
    Volume size = 0;

    bool empty() const noexcept { return size == 0 && is_empty_level_price(price); }
    bool operator==(const BookLevel&) const = default;
};

// Top-L view of the book. Both vectors always hold exactly L entries; empty
// levels carry the LOBSTER sentinel prices with size 0.
struct BookSnapshot {
    std::vector<BookLevel> asks;
    std::vector<BookLevel> bids;

    static BookSnapshot empty(std::size_t levels);
    std::size_t levels() const noexcept { return asks.size(); }
    bool operator==(const BookSnapshot&) const = default;
};

// Parses "34200.000123" into nanoseconds after midnight.
Time parse_time(std::string_view text);
std::string format_time(Time t);

MarketMessage parse_message_row(std::string_view row, std::size_t row_no);

// Streams a message file, validating column count and monotone time.
class MessageReader {
public:
    explicit MessageReader(std::istream& in) : in_(in) {}

    std::optional<MarketMessage> next();
    std::size_t rows_read() const noexcept { return row_; }

private:
    std::istream& in_;
    std::string line_;
    std::size_t row_ = 0;
    std::optional<Time> last_time_;
};

std::vector<MarketMessage> parse_messages(std::istream& in);

BookSnapshot parse_snapshot_row(std::string_view row, std::size_t levels, std::size_t row_no = 1);

class SnapshotReader {
public:
    SnapshotReader(std::istream& in, std::size_t levels) : in_(in), levels_(levels) {}

    std::optional<BookSnapshot> next();
    std::size_t rows_read() const noexcept { return row_; }

private:
    std::istream& in_;
    std::size_t levels_;
    std::string line_;
    std::size_t row_ = 0;
};

// Throws MalformedRow when prices are out of order or an empty level is
// followed by a populated one.
void validate_snapshot(const BookSnapshot& snap, std::size_t row_no = 1);

// One historical order per non-empty level. These "seed" orders get internal
// (negative) ids and stand in for all pre-existing volume at their price.
OrderBook snapshot_to_book(const BookSnapshot& snap);

// Aggregates the top `levels` price levels. With `only` set, volume from other
// owners is ignored and levels holding none of `only`'s orders are skipped.
BookSnapshot book_to_snapshot(const OrderBook& book, std::size_t levels,
                              std::optional<Owner> only = std::nullopt);

void write_message(std::ostream& out, const MarketMessage& msg);
void write_snapshot(std::ostream& out, const BookSnapshot& snap);

}  // namespace betamm
