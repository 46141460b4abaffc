#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "betamm/types.hpp"

namespace betamm {

struct BetaParams {
    double alpha = 1.0;
    double beta = 1.0;

    void validate() const;
    bool operator==(const BetaParams&) const = default;
};

// Mode as a proportion of n_levels, and concentration alpha + beta.
struct ModeConcentration {
    double omega = 0.5;
    double kappa = 2.0;

    void validate() const;
    bool operator==(const ModeConcentration&) const = default;
};

struct ProfileSpec {
    int n_levels = 10;
    Volume total_volume = 100;
    int min_quote = 0;  // ticks between the touch and level 1; negative quotes inside the spread

    void validate() const;
    bool operator==(const ProfileSpec&) const = default;
};

// Integer volume per level for one side. Level i (0-based here) sits at
// anchor - i*tick for bids and anchor + i*tick for asks.
struct VolumeProfile {
    Side side = Side::Bid;
    Price anchor = 0;
    Price tick = 1;
    std::vector<Volume> volumes;

    Price price_at(std::size_t level) const noexcept {
        const auto off = static_cast<Price>(level) * tick;
        return side == Side::Bid ? anchor - off : anchor + off;
    }
    std::optional<std::size_t> level_of(Price price) const noexcept;
    Volume total() const noexcept;
    bool operator==(const VolumeProfile&) const = default;
};

// Density of the beta distribution stretched over [0, n_levels].
double scaled_beta_pdf(double x, int n_levels, BetaParams params);

// Evaluates the scaled density at level midpoints i - 0.5, normalises, scales
// by total_volume and rounds half away from zero. The sum may differ from
// total_volume by at most n_levels / 2.
std::vector<Volume> quantise_volumes(int n_levels, Volume total_volume, BetaParams params);

VolumeProfile quantise(const ProfileSpec& spec, BetaParams params, Side side = Side::Bid, Price anchor = 0,
                       Price tick = 1);

BetaParams from_mode_concentration(ModeConcentration mc);
ModeConcentration to_mode_concentration(BetaParams params);

// Mean/variance on [0, 1]; requires 0 < mean < 1 and 0 < variance < mean (1 - mean).
BetaParams from_mean_variance(double mean, double variance);

struct AgentQueueEntry {
    OrderId id;
    Volume remaining = 0;
    std::uint64_t arrival_seq = 0;
};

// Agent orders at one level, front of the queue first.
using LevelQueue = std::vector<AgentQueueEntry>;

struct Instruction {
    enum class Kind : std::uint8_t { Insert, Cancel };

    Kind kind = Kind::Insert;
    Side side = Side::Bid;
    std::size_t level = 0;
    Price price = 0;
    Volume volume = 0;
    OrderId order_id;  // target of a cancel; the new order's id once an insert is applied

    bool operator==(const Instruction&) const = default;
};

// Per-level signed difference. Positive: one insert of the difference.
// Negative: cancels taken from the back of the agent's queue at that level.
// Throws InconsistentState if `queues` disagree with `current`.
std::vector<Instruction> diff_to_instructions(const VolumeProfile& current, const VolumeProfile& desired,
                                              std::span<const LevelQueue> queues);

// Volume-weighted average price of the profile, absent when it is empty.
std::optional<double> volume_weighted_price(const VolumeProfile& profile);

}  // namespace betamm
