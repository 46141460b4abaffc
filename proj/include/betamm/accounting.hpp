#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "betamm/order_book.hpp"
#include "betamm/types.hpp"

namespace betamm {

// Cash is in price ticks times shares, so every fill is exact.
struct AccountState {
    std::int64_t cash = 0;
    Volume inventory = 0;

    bool operator==(const AccountState&) const = default;
};

// `agent_side` is the side the agent traded on: Bid means the agent bought.
AccountState apply_fill(AccountState account, const Fill& fill, Side agent_side);

// cash + inventory * midprice, in the same units as cash.
double mark_to_market(const AccountState& account, HalfTicks midprice);

double episode_return(double final_pnl, double first_price);

struct EpisodeOutcome {
    std::string group;  // usually the ticker
    double pnl = 0.0;
    double ret = 0.0;
};

struct ReturnSummary {
    std::vector<double> returns;
    double mean = 0.0;
    double std = 0.0;  // sample (n - 1); 0 for a single episode
    std::size_t n_profitable_groups = 0;
    std::size_t n_groups = 0;
};

// Pooled mean/std over all episodes; a group is profitable when its summed
// PnL is strictly positive.
ReturnSummary summarize(const std::vector<EpisodeOutcome>& outcomes);

}  // namespace betamm
