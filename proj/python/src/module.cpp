#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "betamm/beta_profile.hpp"
#include "betamm/errors.hpp"
#include "betamm/policies.hpp"
#include "betamm/replay.hpp"
#include "betamm/synthetic.hpp"

namespace py = pybind11;
using namespace betamm;

namespace {

EpisodeConfig episode_config(std::optional<double> start_s, std::uint64_t start_seed, double length_s,
                             double step_s) {
    EpisodeConfig c;
    if (start_s)
        c.start = seconds_to_time(*start_s);
    else
        c.start = RandomStart{start_seed};
    c.length_s = length_s;
    c.step_interval_s = step_s;
    return c;
}

EpisodeResult run(const DayData& day, const Policy& policy, std::optional<double> start_s, std::uint64_t seed,
                  double length_s, double step_s) {
    const auto cfg = episode_config(start_s, seed, length_s, step_s);
    py::gil_scoped_release release;
    return run_episode(day, cfg, policy);
}

ProfileSpec make_spec(int n_levels, Volume total_volume, int min_quote) {
    ProfileSpec s{n_levels, total_volume, min_quote};
    s.validate();
    return s;
}

}  // namespace

PYBIND11_MODULE(_betamm, m) {
    m.doc() = "betamm core bindings";

    static py::exception<Error> base(m, "BetammError", PyExc_ValueError);
    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const Error& e) {
            py::set_error(base, e.what());
        }
    });

    m.def("scaled_beta_pdf",
          [](double x, int n, double a, double b) { return scaled_beta_pdf(x, n, BetaParams{a, b}); },
          py::arg("x"), py::arg("n_levels"), py::arg("alpha"), py::arg("beta"));
    m.def("quantise_volumes",
          [](int n, Volume total, double a, double b) { return quantise_volumes(n, total, BetaParams{a, b}); },
          py::arg("n_levels"), py::arg("total_volume"), py::arg("alpha"), py::arg("beta"));
    m.def(
        "from_mode_concentration",
        [](double omega, double kappa) {
            const auto p = from_mode_concentration({omega, kappa});
            return py::make_tuple(p.alpha, p.beta);
        },
        py::arg("omega"), py::arg("kappa"));
    m.def(
        "to_mode_concentration",
        [](double a, double b) {
            const auto mc = to_mode_concentration({a, b});
            return py::make_tuple(mc.omega, mc.kappa);
        },
        py::arg("alpha"), py::arg("beta"));

    auto inv_params = [](double omega_0, double kappa_0, double kappa_max, double p, Volume max_inv) {
        InventoryPolicyParams ip;
        ip.omega_0 = omega_0;
        ip.kappa_0 = kappa_0;
        ip.kappa_max = kappa_max;
        ip.p = p;
        ip.max_inv = max_inv;
        ip.validate();
        return ip;
    };
    m.def(
        "omega_of_inventory",
        [inv_params](Volume inv, double omega_0, double kappa_0, double kappa_max, double p, Volume max_inv) {
            const auto w = omega_of_inventory(inv, inv_params(omega_0, kappa_0, kappa_max, p, max_inv));
            return py::make_tuple(w.bid, w.ask);
        },
        py::arg("inventory"), py::arg("omega_0") = 0.2, py::arg("kappa_0") = 5.0, py::arg("kappa_max") = 20.0,
        py::arg("p") = 2.0, py::arg("max_inv") = 1000);
    m.def(
        "kappa_of_inventory",
        [inv_params](Volume inv, double omega_0, double kappa_0, double kappa_max, double p, Volume max_inv) {
            return kappa_of_inventory(inv, inv_params(omega_0, kappa_0, kappa_max, p, max_inv));
        },
        py::arg("inventory"), py::arg("omega_0") = 0.2, py::arg("kappa_0") = 5.0, py::arg("kappa_max") = 20.0,
        py::arg("p") = 2.0, py::arg("max_inv") = 1000);

    py::class_<DayData>(m, "DayData")
        .def_readonly("name", &DayData::name)
        .def_property_readonly("n_messages", [](const DayData& d) { return d.messages.size(); })
        .def_property_readonly("open_s", [](const DayData& d) { return time_to_seconds(d.open()); })
        .def_property_readonly("close_s", [](const DayData& d) { return time_to_seconds(d.close()); })
        .def("__repr__", [](const DayData& d) {
            return "<DayData " + d.name + " messages=" + std::to_string(d.messages.size()) + ">";
        });

    m.def(
        "generate_synthetic_day",
        [](std::uint64_t seed, double session_length_s, double drift, double reversion, std::size_t max_messages,
           const std::string& name) {
            SyntheticFlowParams p;
            p.seed = seed;
            p.session_length_s = session_length_s;
            p.drift_ticks_per_hour = drift;
            p.reversion = reversion;
            p.max_messages = max_messages;
            auto d = generate_synthetic_day(p, false);
            return DayData{name, d.initial, std::move(d.messages)};
        },
        py::arg("seed") = 42, py::arg("session_length_s") = 23'400.0, py::arg("drift_ticks_per_hour") = 0.0,
        py::arg("reversion") = 0.5, py::arg("max_messages") = 0, py::arg("name") = "SYN");

    py::class_<EpisodeResult>(m, "EpisodeResult")
        .def_property_readonly("start_s", [](const EpisodeResult& r) { return time_to_seconds(r.start); })
        .def_property_readonly("end_s", [](const EpisodeResult& r) { return time_to_seconds(r.end); })
        .def_readonly("final_pnl", &EpisodeResult::final_pnl)
        .def_property_readonly("final_cash", [](const EpisodeResult& r) { return r.final_account.cash; })
        .def_property_readonly("final_inventory", [](const EpisodeResult& r) { return r.final_account.inventory; })
        .def_property_readonly("n_fills", [](const EpisodeResult& r) { return r.fills.size(); })
        .def_property_readonly("inventory",
                               [](const EpisodeResult& r) {
                                   std::vector<Volume> v;
                                   v.reserve(r.steps.size());
                                   for (const auto& s : r.steps) v.push_back(s.inventory);
                                   return v;
                               })
        .def_property_readonly("pnl",
                               [](const EpisodeResult& r) {
                                   std::vector<double> v;
                                   v.reserve(r.steps.size());
                                   for (const auto& s : r.steps) v.push_back(s.pnl);
                                   return v;
                               })
        .def_property_readonly("fills", [](const EpisodeResult& r) {
            py::list out;
            for (const auto& f : r.fills)
                out.append(py::make_tuple(time_to_seconds(f.time), std::string(to_string(f.side)), f.price, f.volume,
                                          f.aggressive));
            return out;
        });

    m.def(
        "run_fixed_episode",
        [](const DayData& day, double alpha_bid, double beta_bid, double alpha_ask, double beta_ask, int n_levels,
           Volume total_volume, int min_quote, std::optional<Volume> max_inv, double frac_inv,
           std::optional<double> start_s, std::uint64_t start_seed, double length_s, double step_s) {
            const Action4 a{alpha_bid, beta_bid, alpha_ask, beta_ask};
            const auto spec = make_spec(n_levels, total_volume, min_quote);
            const Policy policy = max_inv ? fixed_beta_policy(Action6{a, *max_inv, frac_inv}, spec)
                                          : fixed_beta_policy(a, spec);
            return run(day, policy, start_s, start_seed, length_s, step_s);
        },
        py::arg("day"), py::arg("alpha_bid") = 1.0, py::arg("beta_bid") = 1.0, py::arg("alpha_ask") = 1.0,
        py::arg("beta_ask") = 1.0, py::arg("n_levels") = 10, py::arg("total_volume") = 100, py::arg("min_quote") = 0,
        py::arg("max_inv") = py::none(), py::arg("frac_inv") = 1.0, py::arg("start_s") = py::none(),
        py::arg("start_seed") = 0, py::arg("length_s") = 3600.0, py::arg("step_s") = 1.0);

    m.def(
        "run_inventory_episode",
        [inv_params](const DayData& day, double omega_0, double kappa_0, double kappa_max, double p, Volume max_inv,
                     std::optional<double> start_s, std::uint64_t start_seed, double length_s, double step_s) {
            return run(day, inventory_driven_policy(inv_params(omega_0, kappa_0, kappa_max, p, max_inv)), start_s,
                       start_seed, length_s, step_s);
        },
        py::arg("day"), py::arg("omega_0") = 0.2, py::arg("kappa_0") = 5.0, py::arg("kappa_max") = 20.0,
        py::arg("p") = 2.0, py::arg("max_inv") = 1000, py::arg("start_s") = py::none(), py::arg("start_seed") = 0,
        py::arg("length_s") = 3600.0, py::arg("step_s") = 1.0);

    m.def(
        "run_null_episode",
        [](const DayData& day, std::optional<double> start_s, std::uint64_t start_seed, double length_s,
           double step_s) { return run(day, null_policy(), start_s, start_seed, length_s, step_s); },
        py::arg("day"), py::arg("start_s") = py::none(), py::arg("start_seed") = 0, py::arg("length_s") = 3600.0,
        py::arg("step_s") = 1.0);
}
