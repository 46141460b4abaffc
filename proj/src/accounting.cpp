#include "betamm/accounting.hpp"

#include <cmath>
#include <map>

#include "betamm/errors.hpp"

namespace betamm {

AccountState apply_fill(AccountState account, const Fill& fill, Side agent_side) {
    if (fill.volume < 1) throw InvalidVolume("fill volume must be >= 1");
    const std::int64_t notional = fill.price * fill.volume;
    if (agent_side == Side::Bid) {
        account.cash -= notional;
        account.inventory += fill.volume;
    } else {
        account.cash += notional;
        account.inventory -= fill.volume;
    }
    return account;
}

double mark_to_market(const AccountState& account, HalfTicks midprice) {
    const std::int64_t twice = 2 * account.cash + account.inventory * midprice.value;
    return static_cast<double>(twice) / 2.0;
}

double episode_return(double final_pnl, double first_price) {
    if (!(first_price > 0.0)) throw DomainError("first price must be > 0");
    return final_pnl / first_price;
}

ReturnSummary summarize(const std::vector<EpisodeOutcome>& outcomes) {
    if (outcomes.empty()) throw EmptyInput("no episodes to summarise");
    ReturnSummary s;
    std::map<std::string, double> group_pnl;
    // Welford
    double mean = 0.0, m2 = 0.0;
    std::size_t n = 0;
    for (const auto& o : outcomes) {
        s.returns.push_back(o.ret);
        group_pnl[o.group] += o.pnl;
        ++n;
        const double delta = o.ret - mean;
        mean += delta / static_cast<double>(n);
        m2 += delta * (o.ret - mean);
    }
    s.mean = mean;
    s.std = n > 1 ? std::sqrt(m2 / static_cast<double>(n - 1)) : 0.0;
    s.n_groups = group_pnl.size();
    for (const auto& [g, pnl] : group_pnl)
        if (pnl > 0.0) ++s.n_profitable_groups;
    return s;
}

}  // namespace betamm
