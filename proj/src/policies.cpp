#include "betamm/policies.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "betamm/errors.hpp"

namespace betamm {

namespace {

// |inv / max_inv| clamped to [0, 1], raised to p.
double saturation(Volume inventory, Volume max_inv, double p) {
    const double x = std::min(1.0, std::abs(static_cast<double>(inventory) / static_cast<double>(max_inv)));
    return std::pow(x, p);
}

}  // namespace

void Action4::validate() const {
    bid().validate();
    ask().validate();
}

void Action6::validate() const {
    shape.validate();
    if (max_inv < 1) throw DomainError("max_inv must be >= 1");
    if (!(frac_inv > 0.0 && frac_inv <= 1.0)) throw DomainError("frac_inv must lie in (0, 1]");
}

void InventoryPolicyParams::validate() const {
    if (!(omega_0 > 0.0 && omega_0 < 1.0)) throw DomainError("omega_0 must lie in (0, 1)");
    if (!(kappa_0 > 2.0)) throw DomainError("kappa_0 must be > 2");
    if (!(kappa_max >= kappa_0)) throw DomainError("kappa_max must be >= kappa_0");
    if (!(p >= 1.0)) throw DomainError("p must be >= 1");
    if (max_inv < 1) throw DomainError("max_inv must be >= 1");
    spec.validate();
}

Policy null_policy() {
    return [](const StepObservation&) { return PolicyDecision{}; };
}

Policy fixed_beta_policy(const Action4& action, const ProfileSpec& spec) {
    action.validate();
    spec.validate();
    return [action, spec](const StepObservation&) {
        return PolicyDecision{action.bid(), action.ask(), spec, std::nullopt};
    };
}

Policy fixed_beta_policy(const Action6& action, const ProfileSpec& spec) {
    action.validate();
    spec.validate();
    return [action, spec](const StepObservation& obs) {
        PolicyDecision d{action.shape.bid(), action.shape.ask(), spec, std::nullopt};
        d.market_order = market_clear_check(obs.inventory, action.max_inv, action.frac_inv);
        return d;
    };
}

std::optional<MarketOrder> market_clear_check(Volume inventory, Volume max_inv, double frac_inv) {
    if (max_inv < 1) throw DomainError("max_inv must be >= 1");
    const Volume abs_inv = std::abs(inventory);
    if (abs_inv <= max_inv) return std::nullopt;
    const double f = std::clamp(frac_inv, 0.0, 1.0);
    const auto v = static_cast<Volume>(std::round(f * static_cast<double>(abs_inv)));
    return MarketOrder{inventory > 0 ? Side::Ask : Side::Bid, std::clamp<Volume>(v, 1, abs_inv)};
}

// The side holding excess inventory moves its mode out toward the far end of
// the ladder, the other side pulls its mode in toward the touch:
//   s = clamp(|inv| / max_inv)^p
//   near = omega_0 (1 - s),  far = omega_0 + (1 - omega_0) s
// Long inventory: bid is far, ask is near. Short: mirrored.
OmegaPair omega_of_inventory(Volume inventory, const InventoryPolicyParams& params) {
    const double s = saturation(inventory, params.max_inv, params.p);
    const double near = params.omega_0 * (1.0 - s);
    const double far = params.omega_0 + (1.0 - params.omega_0) * s;
    if (inventory >= 0) return OmegaPair{far, near};
    return OmegaPair{near, far};
}

double kappa_of_inventory(Volume inventory, const InventoryPolicyParams& params) {
    return (params.kappa_max - params.kappa_0) * saturation(inventory, params.max_inv, params.p) + params.kappa_0;
}

PolicyDecision inventory_decision(Volume inventory, const InventoryPolicyParams& params) {
    const OmegaPair w = omega_of_inventory(inventory, params);
    const double kappa = kappa_of_inventory(inventory, params);
    return PolicyDecision{from_mode_concentration({w.bid, kappa}), from_mode_concentration({w.ask, kappa}),
                          params.spec, std::nullopt};
}

Policy inventory_driven_policy(const InventoryPolicyParams& params) {
    params.validate();
    return [params](const StepObservation& obs) { return inventory_decision(obs.inventory, params); };
}

}  // namespace betamm
