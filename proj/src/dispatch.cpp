#include "hybridwind/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <string>

#include "hybridwind/econ.hpp"
#include "hybridwind/errors.hpp"

namespace hybridwind::dispatch {

namespace {

// d/d(request), d/d(stored) carried through the min/max chain.
struct Grad {
    double request = 0.0;
    double stored = 0.0;

    Grad operator-(const Grad& o) const { return {request - o.request, stored - o.stored}; }
    Grad operator+(const Grad& o) const { return {request + o.request, stored + o.stored}; }
    Grad operator*(double k) const { return {request * k, stored * k}; }
};

// min(a, b) with the derivative of the strictly smaller argument; 0 at ties.
double min_d(double a, const Grad& da, double b, const Grad& db, Grad& out) {
    if (a < b) {
        out = da;
        return a;
    }
    if (b < a) {
        out = db;
        return b;
    }
    out = {};
    return a;
}

double max_d(double a, const Grad& da, double b, const Grad& db, Grad& out) {
    if (a > b) {
        out = da;
        return a;
    }
    if (b > a) {
        out = db;
        return b;
    }
    out = {};
    return a;
}

}  // namespace

StepResult post_process_step(double request, double generation, double stored, const FarmSpec& farm,
                             const StorageSpec& storage, StepJacobian* jacobian) {
    const double capacity = storage.capacity_mwh();
    if (!(request >= 0.0 && request <= 1.0))
        throw ContractError("dispatch request " + std::to_string(request) + " outside [0, 1]");
    if (!(stored >= 0.0 && stored <= capacity))
        throw ContractError("stored energy " + std::to_string(stored) + " outside [0, C_S]");
    if (!(generation >= 0.0)) throw ContractError("generation must be >= 0");

    const double rating = storage.rating_mw;
    const Grad zero{};
    const Grad d_req{farm.capacity_mw, 0.0};
    const Grad d_sto{0.0, 1.0};

    Grad d_first;
    const double first = min_d(request * farm.capacity_mw, d_req, generation + stored, d_sto, d_first);

    Grad d_excess;
    const double excess = max_d(first - generation, d_first, 0.0, zero, d_excess);
    Grad d_regen;
    const double regen = min_d(excess, d_excess, rating, zero, d_regen);

    Grad d_direct;
    const double direct = max_d(first - regen, d_first - d_regen, 0.0, zero, d_direct);

    const double delivered = direct + regen * storage.round_trip_efficiency;
    const Grad d_delivered = d_direct + d_regen * storage.round_trip_efficiency;

    Grad d_flow;
    const double flow = min_d(generation - delivered, d_delivered * -1.0, rating, zero, d_flow);
    Grad d_capped;
    const double capped = min_d(stored + flow, d_sto + d_flow, capacity, zero, d_capped);
    Grad d_next;
    const double next = max_d(capped, d_capped, 0.0, zero, d_next);

    if (jacobian) {
        jacobian->delivered_d_request = d_delivered.request;
        jacobian->delivered_d_stored = d_delivered.stored;
        jacobian->next_d_request = d_next.request;
        jacobian->next_d_stored = d_next.stored;
    }
    return {delivered, next};
}

DispatchTrace simulate(const Policy& policy, const series::SeriesFrame& frame, const FarmSpec& farm,
                       const StorageSpec& storage, double initial_stored) {
    const auto& g = frame.channel(series::Channel::Generation);
    const std::size_t n = g.size();
    if (!(initial_stored >= 0.0 && initial_stored <= storage.capacity_mwh()))
        throw ContractError("initial stored energy outside [0, C_S]");

    DispatchTrace trace;
    trace.requested.resize(n);
    trace.delivered.resize(n);
    trace.curtailed.resize(n);
    trace.stored.resize(n + 1);
    trace.stored[0] = initial_stored;

    for (std::size_t t = 0; t < n; ++t) {
        double r = policy(t, trace.stored[t]);
        if (std::isnan(r)) throw NumericError("policy produced NaN at step " + std::to_string(t));
        if (r < 0.0 || r > 1.0) {
            r = std::clamp(r, 0.0, 1.0);
            ++trace.clamped_requests;
        }
        const auto step = post_process_step(r, g[t], trace.stored[t], farm, storage);
        trace.requested[t] = r;
        trace.delivered[t] = step.delivered;
        trace.stored[t + 1] = step.stored_next;
        trace.curtailed[t] = econ::curtailment_step(g[t], step.delivered, trace.stored[t], step.stored_next);
    }
    return trace;
}

Policy baseload_policy(const series::SeriesFrame& frame, double target_mw, const FarmSpec& farm) {
    if (!(target_mw > 0.0)) throw ContractError("baseload target must be > 0");
    const auto* g = &frame.channel(series::Channel::Generation);
    const double capacity = farm.capacity_mw;
    return [g, target_mw, capacity](std::size_t t, double stored) {
        // One-hour step: MWh of storage converts 1:1 to MW.
        const double available = (*g)[t] + stored;
        return std::clamp(std::min(target_mw, available) / capacity, 0.0, 1.0);
    };
}

double default_baseload_target(const series::SeriesFrame& frame) {
    const auto& g = frame.channel(series::Channel::Generation);
    return std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
}

void write_trace_csv(const DispatchTrace& trace, const series::SeriesFrame& frame,
                     const std::filesystem::path& path) {
    const auto& g = frame.channel(series::Channel::Generation);
    if (g.size() != trace.size()) throw SizeError("trace and frame lengths differ");
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "time,g,r_raw,r_prime,s,curtailed\n";
    char buf[160];
    for (std::size_t t = 0; t < trace.size(); ++t) {
        std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.17g,%.17g\n", g[t], trace.requested[t],
                      trace.delivered[t], trace.stored[t + 1], trace.curtailed[t]);
        out << series::format_time(frame.time[t]) << buf;
    }
}

}  // namespace hybridwind::dispatch
