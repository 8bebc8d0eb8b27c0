#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <chrono>

#include "commands.hpp"
#include "hybridwind/dispatch.hpp"
#include "hybridwind/econ.hpp"
#include "hybridwind/errors.hpp"
#include "hybridwind/metrics.hpp"
#include "hybridwind/nqf.hpp"
#include "hybridwind/series.hpp"

namespace py = pybind11;
using namespace hybridwind;

namespace {

// Hourly frame starting 2001-01-01 around plain Python sequences.
series::SeriesFrame frame_from(std::vector<double> g, std::vector<double> p) {
    using namespace std::chrono;
    if (!p.empty() && p.size() != g.size()) throw AlignmentError("generation and price lengths differ");
    series::SeriesFrame f;
    const sys_days start = year{2001} / 1 / 1;
    f.time.reserve(g.size());
    for (std::size_t t = 0; t < g.size(); ++t) f.time.push_back(start + hours{static_cast<long>(t)});
    f.g = std::move(g);
    if (!p.empty()) f.p = std::move(p);
    return f;
}

py::dict frame_dict(const series::SeriesFrame& f) {
    py::dict d;
    std::vector<std::string> times;
    times.reserve(f.size());
    for (auto t : f.time) times.push_back(series::format_time(t));
    d["time"] = times;
    for (auto c : {series::Channel::WindSpeed, series::Channel::Generation, series::Channel::Price,
                   series::Channel::Load})
        if (f.has(c)) d[py::str(std::string(series::channel_name(c)))] = f.channel(c);
    return d;
}

}  // namespace

PYBIND11_MODULE(_hybridwind, m) {
    m.doc() = "Wind farm generation, storage dispatch and cost-of-valued-energy models";

    auto base = py::register_exception<Error>(m, "HybridWindError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
    py::register_exception<ContractError>(m, "ContractError", base.ptr());
    py::register_exception<DependencyError>(m, "DependencyError", base.ptr());

    py::class_<FarmSpec>(m, "FarmSpec")
        .def(py::init<>())
        .def_readwrite("capacity_mw", &FarmSpec::capacity_mw)
        .def_readwrite("capex_usd", &FarmSpec::capex_usd)
        .def_readwrite("opex_usd_per_yr", &FarmSpec::opex_usd_per_yr)
        .def_readwrite("fixed_charge_rate", &FarmSpec::fixed_charge_rate)
        .def("annual_fixed_cost", &FarmSpec::annual_fixed_cost);

    py::class_<StorageSpec>(m, "StorageSpec")
        .def(py::init<>())
        .def_readwrite("technology", &StorageSpec::technology)
        .def_readwrite("rating_mw", &StorageSpec::rating_mw)
        .def_readwrite("duration_h", &StorageSpec::duration_h)
        .def_readwrite("round_trip_efficiency", &StorageSpec::round_trip_efficiency)
        .def_readwrite("capex_usd", &StorageSpec::capex_usd)
        .def_readwrite("opex_usd_per_yr", &StorageSpec::opex_usd_per_yr)
        .def("capacity_mwh", &StorageSpec::capacity_mwh);

    py::class_<DispatchTrace>(m, "DispatchTrace")
        .def_readonly("requested", &DispatchTrace::requested)
        .def_readonly("delivered", &DispatchTrace::delivered)
        .def_readonly("stored", &DispatchTrace::stored)
        .def_readonly("curtailed", &DispatchTrace::curtailed)
        .def_readonly("clamped_requests", &DispatchTrace::clamped_requests)
        .def("__len__", &DispatchTrace::size);

    py::class_<econ::AnnualMetrics>(m, "AnnualMetrics")
        .def_readonly("year", &econ::AnnualMetrics::year)
        .def_readonly("steps", &econ::AnnualMetrics::steps)
        .def_readonly("partial", &econ::AnnualMetrics::partial)
        .def_readonly("aep_mwh", &econ::AnnualMetrics::aep_mwh)
        .def_readonly("curtailment_mwh", &econ::AnnualMetrics::curtailment_mwh)
        .def_readonly("storage_utilization", &econ::AnnualMetrics::storage_utilization)
        .def_readonly("value_factor", &econ::AnnualMetrics::value_factor)
        .def_readonly("cove", &econ::AnnualMetrics::cove);

    m.attr("COVE_DISPLAY_SCALE") = econ::kCoveDisplayScale;

    m.def(
        "synth_dataset",
        [](int years, std::uint64_t seed, const FarmSpec& farm) {
            return frame_dict(series::synth_dataset(years, seed, farm));
        },
        py::arg("years"), py::arg("seed"), py::arg("farm") = FarmSpec{},
        "Synthetic hourly dataset as a dict of lists (time, v, g, p, u).");

    m.def(
        "post_process_step",
        [](double r, double g, double s, const FarmSpec& farm, const StorageSpec& storage) {
            const auto out = dispatch::post_process_step(r, g, s, farm, storage);
            return py::make_tuple(out.delivered, out.stored_next);
        },
        py::arg("request"), py::arg("generation"), py::arg("stored"), py::arg("farm"), py::arg("storage"),
        "One storage-constrained dispatch step; returns (delivered_mw, stored_next_mwh).");

    m.def(
        "simulate_requests",
        [](const std::vector<double>& requests, std::vector<double> g, const FarmSpec& farm,
           const StorageSpec& storage, double s0) {
            if (requests.size() != g.size()) throw AlignmentError("requests and generation lengths differ");
            const auto f = frame_from(std::move(g), {});
            return dispatch::simulate([&](std::size_t t, double) { return requests[t]; }, f, farm, storage, s0);
        },
        py::arg("requests"), py::arg("generation"), py::arg("farm"), py::arg("storage"), py::arg("s0") = 0.0);

    m.def(
        "simulate_baseload",
        [](std::vector<double> g, double target_mw, const FarmSpec& farm, const StorageSpec& storage, double s0) {
            const auto f = frame_from(std::move(g), {});
            return dispatch::simulate(dispatch::baseload_policy(f, target_mw, farm), f, farm, storage, s0);
        },
        py::arg("generation"), py::arg("target_mw"), py::arg("farm"), py::arg("storage"), py::arg("s0") = 0.0);

    m.def(
        "annual_report",
        [](const DispatchTrace& trace, const std::vector<double>& g, const std::vector<double>& p,
           const FarmSpec& farm, const StorageSpec& storage) { return econ::annual_report(trace, g, p, farm, storage); },
        py::arg("trace"), py::arg("generation"), py::arg("price"), py::arg("farm"), py::arg("storage"));

    m.def(
        "cove",
        [](const std::vector<double>& r, const std::vector<double>& p, const FarmSpec& farm,
           const StorageSpec& storage, double annualization) { return econ::cove(r, p, farm, storage, annualization); },
        py::arg("delivered"), py::arg("price"), py::arg("farm"), py::arg("storage"), py::arg("annualization") = 1.0);
    m.def(
        "lcoe",
        [](const std::vector<double>& r, const FarmSpec& farm, const StorageSpec& storage, double annualization) {
            return econ::lcoe(r, farm, storage, annualization);
        },
        py::arg("delivered"), py::arg("farm"), py::arg("storage"), py::arg("annualization") = 1.0);
    m.def(
        "value_factor",
        [](const std::vector<double>& r, const std::vector<double>& p) { return econ::value_factor(r, p); },
        py::arg("dispatch"), py::arg("price"));

    m.def(
        "placeholder_storage",
        [](const std::string& tech, double rating, double duration) {
            return econ::placeholder_catalog().lookup(tech, rating, duration);
        },
        py::arg("technology"), py::arg("rating_mw"), py::arg("duration_h"),
        "Storage spec with costs from the built-in placeholder catalog.");

    m.def(
        "rmse", [](const std::vector<double>& a, const std::vector<double>& b) { return metrics::rmse(a, b); },
        py::arg("pred"), py::arg("obs"));
    m.def(
        "cross_correlation",
        [](const std::vector<double>& a, const std::vector<double>& b) { return metrics::cross_correlation(a, b); },
        py::arg("x"), py::arg("y"));
    m.def(
        "power_curve_similarity",
        [](const std::vector<double>& hw, const std::vector<double>& hp, const std::vector<double>& pw,
           const std::vector<double>& pp, std::size_t bins) {
            return metrics::power_curve_similarity(hw, hp, pw, pp, metrics::union_edges(hw, hp, pw, pp, bins, bins));
        },
        py::arg("hist_wind"), py::arg("hist_power"), py::arg("pred_wind"), py::arg("pred_power"),
        py::arg("bins") = 30);

    m.def("pinball", &nqf::pinball, py::arg("residual"), py::arg("alpha"));
    m.def("brownian_walk", &nqf::brownian_walk, py::arg("steps"), py::arg("smooth"), py::arg("drift"),
          py::arg("seed"), py::arg("alpha0") = 0.5);

    m.def(
        "run_cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "hybridwind");
            py::gil_scoped_release release;
            return cli::run(args);
        },
        py::arg("args"), "Runs the command-line tool in-process and returns its exit code.");
}
