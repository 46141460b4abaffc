#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <string_view>

namespace betamm {

// Prices are integer ticks of 10^-4 currency (LOBSTER convention).
using Price = std::int64_t;
using Volume = std::int64_t;

// Market time in nanoseconds after midnight.
using Time = std::int64_t;

inline constexpr Price kPriceScale = 10'000;
inline constexpr Time kNanosPerSecond = 1'000'000'000;

enum class Side : std::uint8_t { Bid, Ask };

constexpr Side opposite(Side s) noexcept { return s == Side::Bid ? Side::Ask : Side::Bid; }

constexpr std::string_view to_string(Side s) noexcept { return s == Side::Bid ? "bid" : "ask"; }

enum class Owner : std::uint8_t { Historical, Agent };

struct OrderId {
    std::int64_t value = 0;

    constexpr auto operator<=>(const OrderId&) const = default;
};

// Midprice in half ticks, so that (bid + ask) stays an exact integer.
struct HalfTicks {
    std::int64_t value = 0;

    constexpr auto operator<=>(const HalfTicks&) const = default;
    constexpr double ticks() const noexcept { return static_cast<double>(value) / 2.0; }
};

constexpr Time seconds_to_time(double s) noexcept {
    return static_cast<Time>(s * static_cast<double>(kNanosPerSecond) + (s >= 0 ? 0.5 : -0.5));
}

constexpr double time_to_seconds(Time t) noexcept {
    return static_cast<double>(t) / static_cast<double>(kNanosPerSecond);
}

}  // namespace betamm

template <>
struct std::hash<betamm::OrderId> {
    std::size_t operator()(const betamm::OrderId& id) const noexcept {
        return std::hash<std::int64_t>{}(id.value);
    }
};
