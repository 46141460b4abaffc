#include "betamm/beta_profile.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "betamm/errors.hpp"

namespace betamm {

namespace {

// glibc's lgamma writes the global signgam; lgamma_r does not.
double log_gamma(double x) {
#if defined(__GLIBC__)
    int sign = 0;
    return ::lgamma_r(x, &sign);
#else
    return std::lgamma(x);
#endif
}

double log_beta_fn(double a, double b) { return log_gamma(a) + log_gamma(b) - log_gamma(a + b); }

}  // namespace

void BetaParams::validate() const {
    if (!(alpha > 0.0) || !(beta > 0.0) || !std::isfinite(alpha) || !std::isfinite(beta))
        throw DomainError("beta parameters must be finite and > 0 (alpha=" + std::to_string(alpha) +
                          ", beta=" + std::to_string(beta) + ")");
}

void ModeConcentration::validate() const {
    if (!(omega >= 0.0 && omega <= 1.0)) throw DomainError("omega must lie in [0, 1]");
    if (!(kappa >= 2.0) || !std::isfinite(kappa)) throw DomainError("kappa must be >= 2");
}

void ProfileSpec::validate() const {
    if (n_levels < 1) throw DomainError("n_levels must be >= 1");
    if (total_volume < 1) throw DomainError("total_volume must be >= 1");
}

std::optional<std::size_t> VolumeProfile::level_of(Price price) const noexcept {
    const Price off = side == Side::Bid ? anchor - price : price - anchor;
    if (off < 0 || off % tick != 0) return std::nullopt;
    const auto lvl = static_cast<std::size_t>(off / tick);
    if (lvl >= volumes.size()) return std::nullopt;
    return lvl;
}

Volume VolumeProfile::total() const noexcept {
    Volume t = 0;
    for (Volume v : volumes) t += v;
    return t;
}

double scaled_beta_pdf(double x, int n_levels, BetaParams params) {
    params.validate();
    if (n_levels < 1) throw DomainError("n_levels must be >= 1");
    const double n = n_levels;
    if (!(x > 0.0 && x < n)) throw DomainError("x must lie in (0, n_levels)");
    const double u = x / n;
    const double log_f =
        (params.alpha - 1.0) * std::log(u) + (params.beta - 1.0) * std::log1p(-u) - log_beta_fn(params.alpha, params.beta);
    return std::exp(log_f) / n;
}

std::vector<Volume> quantise_volumes(int n_levels, Volume total_volume, BetaParams params) {
    params.validate();
    ProfileSpec{n_levels, total_volume, 0}.validate();
    const auto n = static_cast<std::size_t>(n_levels);

    // u and 1 - u are both formed from integers so that swapping (alpha, beta)
    // reverses the weights bit for bit. The normalising constant cancels, so
    // only the kernel is evaluated.
    std::vector<double> logw(n);
    const double denom = 2.0 * n;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = static_cast<double>(2 * i + 1) / denom;
        const double v = static_cast<double>(2 * (n - i) - 1) / denom;
        logw[i] = (params.alpha - 1.0) * std::log(u) + (params.beta - 1.0) * std::log(v);
    }
    const double peak = *std::max_element(logw.begin(), logw.end());
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = std::exp(logw[i] - peak);

    // Pairwise from the outside in, which is also reflection invariant.
    double sum = 0.0;
    for (std::size_t i = 0, j = n - 1; i < j; ++i, --j) sum += w[i] + w[j];
    if (n % 2 == 1) sum += w[n / 2];

    std::vector<Volume> out(n);
    const auto total = static_cast<double>(total_volume);
    for (std::size_t i = 0; i < n; ++i) out[i] = static_cast<Volume>(std::round(w[i] / sum * total));
    return out;
}

VolumeProfile quantise(const ProfileSpec& spec, BetaParams params, Side side, Price anchor, Price tick) {
    return VolumeProfile{side, anchor, tick, quantise_volumes(spec.n_levels, spec.total_volume, params)};
}

BetaParams from_mode_concentration(ModeConcentration mc) {
    mc.validate();
    const double alpha = mc.omega * (mc.kappa - 2.0) + 1.0;
    // Same as (1 - omega)(kappa - 2) + 1, but keeps alpha + beta == kappa exact.
    return BetaParams{alpha, mc.kappa - alpha};
}

ModeConcentration to_mode_concentration(BetaParams params) {
    params.validate();
    if (params.alpha < 1.0 || params.beta < 1.0)
        throw DomainError("mode is only defined here for alpha, beta >= 1");
    const double kappa = params.alpha + params.beta;
    if (kappa == 2.0) throw DegenerateMode("alpha + beta == 2 has no unique mode");
    return ModeConcentration{(params.alpha - 1.0) / (kappa - 2.0), kappa};
}

BetaParams from_mean_variance(double mean, double variance) {
    if (!(mean > 0.0 && mean < 1.0)) throw DomainError("mean must lie in (0, 1)");
    if (!(variance > 0.0 && variance < mean * (1.0 - mean)))
        throw DomainError("variance must lie in (0, mean * (1 - mean))");
    const double alpha = ((1.0 - mean) / variance - 1.0 / mean) * mean * mean;
    return BetaParams{alpha, alpha * (1.0 / mean - 1.0)};
}

std::vector<Instruction> diff_to_instructions(const VolumeProfile& current, const VolumeProfile& desired,
                                              std::span<const LevelQueue> queues) {
    if (current.side != desired.side || current.anchor != desired.anchor || current.tick != desired.tick ||
        current.volumes.size() != desired.volumes.size())
        throw InconsistentState("current and desired profiles are not on the same lattice");
    if (queues.size() != current.volumes.size())
        throw InconsistentState("agent queue count does not match n_levels");

    std::vector<Instruction> out;
    for (std::size_t i = 0; i < current.volumes.size(); ++i) {
        Volume resting = 0;
        for (const auto& e : queues[i]) resting += e.remaining;
        if (resting != current.volumes[i])
            throw InconsistentState("level " + std::to_string(i + 1) + ": profile says " +
                                    std::to_string(current.volumes[i]) + ", agent queue holds " +
                                    std::to_string(resting));

        const Volume diff = desired.volumes[i] - current.volumes[i];
        const Price px = desired.price_at(i);
        if (diff > 0) {
            out.push_back(Instruction{Instruction::Kind::Insert, desired.side, i, px, diff, OrderId{}});
        } else if (diff < 0) {
            Volume need = -diff;
            for (auto it = queues[i].rbegin(); need > 0 && it != queues[i].rend(); ++it) {
                const Volume v = std::min(need, it->remaining);
                out.push_back(Instruction{Instruction::Kind::Cancel, desired.side, i, px, v, it->id});
                need -= v;
            }
        }
    }
    return out;
}

std::optional<double> volume_weighted_price(const VolumeProfile& profile) {
    double num = 0.0;
    Volume den = 0;
    for (std::size_t i = 0; i < profile.volumes.size(); ++i) {
        num += static_cast<double>(profile.price_at(i)) * static_cast<double>(profile.volumes[i]);
        den += profile.volumes[i];
    }
    if (den == 0) return std::nullopt;
    return num / static_cast<double>(den);
}

}  // namespace betamm
