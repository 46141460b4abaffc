#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "betamm/errors.hpp"
#include "betamm/harness.hpp"

namespace betamm {

namespace {

template <class T>
T scalar(const YAML::Node& node, const std::string& where) {
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(where + ": expected a " + (std::is_same_v<T, std::string> ? "string" : "number"));
    }
}

template <class T>
T get_or(const YAML::Node& map, const std::string& key, T fallback, const std::string& where) {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    return scalar<T>(n, where + "." + key);
}

// A scalar or a list of scalars.
template <class T>
std::vector<T> list_or(const YAML::Node& map, const std::string& key, std::vector<T> fallback,
                       const std::string& where) {
    const YAML::Node n = map[key];
    if (!n) return fallback;
    std::vector<T> out;
    if (n.IsSequence()) {
        for (std::size_t i = 0; i < n.size(); ++i) out.push_back(scalar<T>(n[i], where + "." + key));
    } else {
        out.push_back(scalar<T>(n, where + "." + key));
    }
    if (out.empty()) throw ConfigError(where + "." + key + ": empty list");
    return out;
}

void reject_unknown(const YAML::Node& map, const std::set<std::string>& known, const std::string& where) {
    if (!map) return;
    if (!map.IsMap()) throw ConfigError(where + ": expected a mapping");
    for (const auto& kv : map) {
        const auto key = kv.first.as<std::string>();
        if (!known.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

using SyntheticSetter = std::function<void(SyntheticFlowParams&, const YAML::Node&, const std::string&)>;

const std::map<std::string, SyntheticSetter>& synthetic_setters() {
    static const std::map<std::string, SyntheticSetter> setters = [] {
        std::map<std::string, SyntheticSetter> m;
        auto num = [&m](const std::string& key, double SyntheticFlowParams::*field) {
            m[key] = [field](SyntheticFlowParams& p, const YAML::Node& n, const std::string& w) {
                p.*field = scalar<double>(n, w);
            };
        };
        auto integer = [&m](const std::string& key, auto field) {
            m[key] = [field](SyntheticFlowParams& p, const YAML::Node& n, const std::string& w) {
                using F = std::remove_reference_t<decltype(p.*field)>;
                p.*field = scalar<F>(n, w);
            };
        };
        integer("seed", &SyntheticFlowParams::seed);
        integer("base_price", &SyntheticFlowParams::base_price);
        integer("tick", &SyntheticFlowParams::tick);
        num("session_start", &SyntheticFlowParams::session_start_s);
        num("session_length", &SyntheticFlowParams::session_length_s);
        num("submit_rate", &SyntheticFlowParams::submit_rate);
        num("level_decay", &SyntheticFlowParams::level_decay);
        integer("submit_depth", &SyntheticFlowParams::submit_depth);
        num("improve_prob", &SyntheticFlowParams::improve_prob);
        num("cancel_rate", &SyntheticFlowParams::cancel_rate);
        num("partial_cancel_prob", &SyntheticFlowParams::partial_cancel_prob);
        num("execute_rate", &SyntheticFlowParams::execute_rate);
        num("hidden_rate", &SyntheticFlowParams::hidden_rate);
        num("mean_order_size", &SyntheticFlowParams::mean_order_size);
        num("mean_execution_size", &SyntheticFlowParams::mean_execution_size);
        num("reversion", &SyntheticFlowParams::reversion);
        num("drift_ticks_per_hour", &SyntheticFlowParams::drift_ticks_per_hour);
        integer("opening_levels", &SyntheticFlowParams::opening_levels);
        integer("opening_orders_per_level", &SyntheticFlowParams::opening_orders_per_level);
        integer("snapshot_levels", &SyntheticFlowParams::snapshot_levels);
        integer("max_messages", &SyntheticFlowParams::max_messages);
        return m;
    }();
    return setters;
}

SyntheticGroup parse_synthetic(const YAML::Node& node, std::size_t index) {
    const std::string where = "data.synthetic[" + std::to_string(index) + "]";
    if (!node.IsMap()) throw ConfigError(where + ": expected a mapping");
    SyntheticGroup g;
    g.name = "SYN" + std::to_string(index + 1);
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (key == "name") {
            g.name = scalar<std::string>(kv.second, where + ".name");
            continue;
        }
        auto it = synthetic_setters().find(key);
        if (it == synthetic_setters().end()) throw ConfigError(where + ": unknown key '" + key + "'");
        it->second(g.params, kv.second, where + "." + key);
    }
    g.params.validate();
    return g;
}

LobsterGroup parse_lobster(const YAML::Node& node, std::size_t index) {
    const std::string where = "data.lobster[" + std::to_string(index) + "]";
    reject_unknown(node, {"name", "messages", "orderbook", "levels"}, where);
    LobsterGroup g;
    g.name = get_or<std::string>(node, "name", "LOB" + std::to_string(index + 1), where);
    g.messages = get_or<std::string>(node, "messages", "", where);
    g.orderbook = get_or<std::string>(node, "orderbook", "", where);
    g.levels = get_or<std::size_t>(node, "levels", 50, where);
    if (g.messages.empty() || g.orderbook.empty())
        throw ConfigError(where + ": both 'messages' and 'orderbook' paths are required");
    return g;
}

PolicyFamily parse_family(const std::string& s) {
    if (s == "null") return PolicyFamily::Null;
    if (s == "fixed" || s == "ladder") return PolicyFamily::Fixed;
    if (s == "inventory") return PolicyFamily::Inventory;
    throw ConfigError("policy.family: expected one of null, fixed, ladder, inventory; got '" + s + "'");
}

std::vector<GridPoint> parse_grid(const YAML::Node& policy) {
    const std::string w = "policy";
    reject_unknown(policy,
                   {"family", "n_levels", "total_volume", "min_quote", "alpha", "beta", "alpha_bid", "beta_bid",
                    "alpha_ask", "beta_ask", "max_inv", "frac_inv", "omega_0", "kappa_0", "kappa_max", "p"},
                   w);
    const PolicyFamily family = parse_family(get_or<std::string>(policy, "family", "fixed", w));
    const bool ladder = policy && policy["family"] && policy["family"].as<std::string>() == "ladder";

    const auto n_levels = list_or<int>(policy, "n_levels", {10}, w);
    const auto total_volume = list_or<Volume>(policy, "total_volume", {100}, w);
    const auto min_quote = list_or<int>(policy, "min_quote", {0}, w);

    std::vector<ProfileSpec> specs;
    for (int n : n_levels)
        for (Volume tv : total_volume)
            for (int mq : min_quote) {
                ProfileSpec s{n, tv, mq};
                try {
                    s.validate();
                } catch (const DomainError& e) {
                    throw ConfigError(std::string("policy: ") + e.what());
                }
                specs.push_back(s);
            }

    std::vector<GridPoint> grid;
    if (family == PolicyFamily::Null) {
        GridPoint g;
        g.family = family;
        g.spec = specs.front();
        grid.push_back(g);
        return grid;
    }

    if (family == PolicyFamily::Fixed) {
        std::vector<Action4> shapes;
        const bool asymmetric = policy["alpha_bid"] || policy["beta_bid"] || policy["alpha_ask"] || policy["beta_ask"];
        if (ladder) {
            shapes.push_back(Action4{1, 1, 1, 1});
        } else if (asymmetric) {
            for (double ab : list_or<double>(policy, "alpha_bid", {1.0}, w))
                for (double bb : list_or<double>(policy, "beta_bid", {1.0}, w))
                    for (double aa : list_or<double>(policy, "alpha_ask", {1.0}, w))
                        for (double ba : list_or<double>(policy, "beta_ask", {1.0}, w))
                            shapes.push_back(Action4{ab, bb, aa, ba});
        } else {
            for (double a : list_or<double>(policy, "alpha", {1.0}, w))
                for (double b : list_or<double>(policy, "beta", {1.0}, w)) shapes.push_back(Action4{a, b, a, b});
        }
        std::vector<std::optional<Volume>> max_invs{std::nullopt};
        if (policy["max_inv"]) {
            max_invs.clear();
            for (Volume m : list_or<Volume>(policy, "max_inv", {}, w)) max_invs.emplace_back(m);
        }
        const auto fracs = list_or<double>(policy, "frac_inv", {1.0}, w);

        for (const auto& shape : shapes)
            for (const auto& mi : max_invs)
                for (double f : mi ? fracs : std::vector<double>{1.0})
                    for (const auto& spec : specs) {
                        GridPoint g;
                        g.family = family;
                        g.action = shape;
                        g.max_inv = mi;
                        g.frac_inv = f;
                        g.spec = spec;
                        grid.push_back(g);
                    }
    } else {
        for (double w0 : list_or<double>(policy, "omega_0", {0.2}, w))
            for (double k0 : list_or<double>(policy, "kappa_0", {5.0}, w))
                for (double km : list_or<double>(policy, "kappa_max", {20.0}, w))
                    for (double p : list_or<double>(policy, "p", {2.0}, w))
                        for (Volume mi : list_or<Volume>(policy, "max_inv", {1000}, w))
                            for (const auto& spec : specs) {
                                GridPoint g;
                                g.family = family;
                                g.inventory = InventoryPolicyParams{w0, k0, km, p, mi, spec};
                                g.spec = spec;
                                grid.push_back(g);
                            }
    }

    for (const auto& g : grid) {
        try {
            g.make_policy();
        } catch (const DomainError& e) {
            throw ConfigError(std::string("policy: ") + e.what());
        }
    }
    return grid;
}

}  // namespace

std::string_view to_string(PolicyFamily f) noexcept {
    switch (f) {
        case PolicyFamily::Null: return "null";
        case PolicyFamily::Fixed: return "fixed";
        case PolicyFamily::Inventory: return "inventory";
    }
    return "?";
}

Policy GridPoint::make_policy() const {
    switch (family) {
        case PolicyFamily::Null:
            return null_policy();
        case PolicyFamily::Fixed:
            if (max_inv) return fixed_beta_policy(Action6{action, *max_inv, frac_inv}, spec);
            return fixed_beta_policy(action, spec);
        case PolicyFamily::Inventory:
            return inventory_driven_policy(inventory);
    }
    return null_policy();
}

void RunConfig::validate() const {
    if (synthetic.empty() && lobster.empty()) throw ConfigError("data: no synthetic or lobster groups configured");
    if (episodes < 1) throw ConfigError("episodes.count must be >= 1");
    if (!(length_s > 0)) throw ConfigError("episodes.length must be > 0");
    if (!(step_interval_s > 0)) throw ConfigError("episodes.step_interval must be > 0");
    if (levels < 1) throw ConfigError("episodes.levels must be >= 1");
    if (tick < 1) throw ConfigError("episodes.tick must be >= 1");
    if (grid.empty()) throw ConfigError("policy: empty parameter grid");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

RunConfig parse_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config is not valid YAML: ") + e.what());
    }
    if (!root || root.IsNull()) throw ConfigError("config is empty");
    reject_unknown(root, {"seed", "out", "jobs", "return_scale", "episodes", "data", "policy"}, "config");

    RunConfig c;
    c.seed = get_or<std::uint64_t>(root, "seed", 1, "config");
    c.out_dir = get_or<std::string>(root, "out", "out", "config");
    c.jobs = get_or<unsigned>(root, "jobs", 1, "config");
    c.return_scale = get_or<double>(root, "return_scale", 1.0, "config");

    const YAML::Node ep = root["episodes"];
    reject_unknown(ep, {"count", "length", "step_interval", "levels", "tick"}, "episodes");
    if (ep) {
        c.episodes = get_or<std::size_t>(ep, "count", c.episodes, "episodes");
        c.length_s = get_or<double>(ep, "length", c.length_s, "episodes");
        c.step_interval_s = get_or<double>(ep, "step_interval", c.step_interval_s, "episodes");
        c.levels = get_or<std::size_t>(ep, "levels", c.levels, "episodes");
        c.tick = get_or<Price>(ep, "tick", c.tick, "episodes");
    }

    const YAML::Node data = root["data"];
    reject_unknown(data, {"synthetic", "lobster"}, "data");
    if (data) {
        if (const YAML::Node syn = data["synthetic"]) {
            if (!syn.IsSequence()) throw ConfigError("data.synthetic: expected a list");
            for (std::size_t i = 0; i < syn.size(); ++i) c.synthetic.push_back(parse_synthetic(syn[i], i));
        }
        if (const YAML::Node lob = data["lobster"]) {
            if (!lob.IsSequence()) throw ConfigError("data.lobster: expected a list");
            for (std::size_t i = 0; i < lob.size(); ++i) c.lobster.push_back(parse_lobster(lob[i], i));
        }
    }

    const YAML::Node policy = root["policy"];
    c.grid = parse_grid(policy ? policy : YAML::Node(YAML::NodeType::Map));
    c.validate();
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace betamm
