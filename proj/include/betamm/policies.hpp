#pragma once

#include <functional>
#include <optional>

#include "betamm/beta_profile.hpp"
#include "betamm/order_book.hpp"
#include "betamm/types.hpp"

namespace betamm {

// Fixed per-side beta shapes.
struct Action4 {
    double alpha_bid = 1.0;
    double beta_bid = 1.0;
    double alpha_ask = 1.0;
    double beta_ask = 1.0;

    void validate() const;
    BetaParams bid() const noexcept { return {alpha_bid, beta_bid}; }
    BetaParams ask() const noexcept { return {alpha_ask, beta_ask}; }
};

// Action4 plus a market-order inventory limit.
struct Action6 {
    Action4 shape;
    Volume max_inv = 1000;
    double frac_inv = 1.0;

    void validate() const;
};

struct InventoryPolicyParams {
    double omega_0 = 0.2;
    double kappa_0 = 5.0;
    double kappa_max = 20.0;
    double p = 2.0;
    Volume max_inv = 1000;
    ProfileSpec spec;

    void validate() const;
};

// `side` is the aggressor side: Bid buys, Ask sells.
struct MarketOrder {
    Side side = Side::Bid;
    Volume volume = 0;

    bool operator==(const MarketOrder&) const = default;
};

// What the agent wants after this step. A missing side means "quote nothing".
struct PolicyDecision {
    std::optional<BetaParams> bid;
    std::optional<BetaParams> ask;
    ProfileSpec spec;
    std::optional<MarketOrder> market_order;
};

struct StepObservation {
    const OrderBook* book = nullptr;
    Time time = 0;
    std::int64_t cash = 0;
    Volume inventory = 0;
    std::optional<Price> touch_bid;  // best historical (non-agent) prices
    std::optional<Price> touch_ask;
    VolumeProfile bid_profile;  // agent's active orders, anchored at the current quote lattice
    VolumeProfile ask_profile;
};

using Policy = std::function<PolicyDecision(const StepObservation&)>;

Policy null_policy();
Policy fixed_beta_policy(const Action4& action, const ProfileSpec& spec);
// Market-order clearing first, then the fixed shape.
Policy fixed_beta_policy(const Action6& action, const ProfileSpec& spec);

std::optional<MarketOrder> market_clear_check(Volume inventory, Volume max_inv, double frac_inv);

struct OmegaPair {
    double bid = 0.0;
    double ask = 0.0;
};

OmegaPair omega_of_inventory(Volume inventory, const InventoryPolicyParams& params);
double kappa_of_inventory(Volume inventory, const InventoryPolicyParams& params);
PolicyDecision inventory_decision(Volume inventory, const InventoryPolicyParams& params);
Policy inventory_driven_policy(const InventoryPolicyParams& params);

}  // namespace betamm
