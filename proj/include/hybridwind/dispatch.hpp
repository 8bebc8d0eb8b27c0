#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>

#include "hybridwind/series.hpp"
#include "hybridwind/specs.hpp"

namespace hybridwind::dispatch {

struct StepResult {
    double delivered = 0.0;    // r'_t, MW
    double stored_next = 0.0;  // s_{t+1}, MWh
};

/// Partial derivatives of the post-processing outputs with respect to the
/// requested capacity factor and the incoming stored energy. The map is
/// piecewise linear; at a kink every branch derivative is taken as 0.
struct StepJacobian {
    double delivered_d_request = 0.0;
    double delivered_d_stored = 0.0;
    double next_d_request = 0.0;
    double next_d_stored = 0.0;
};

/// Storage-constrained post-processing of one dispatch decision:
///   r'      = min(r C_WF, g + s)
///   regen   = min(max(r' - g, 0), R_S)
///   direct  = max(r' - regen, 0)
///   r'      = direct + regen RTE
///   s_next  = max(min(s + min(g - r', R_S), C_S), 0)
/// Preconditions are checked, never clamped: 0 <= r <= 1, 0 <= s <= C_S,
/// g >= 0 (ContractError otherwise).
StepResult post_process_step(double request, double generation, double stored, const FarmSpec& farm,
                             const StorageSpec& storage, StepJacobian* jacobian = nullptr);

/// Maps (step index, stored energy entering the step) to a requested capacity
/// factor. Stateful policies (recurrent networks) keep their state in the
/// closure and must be called with increasing t.
using Policy = std::function<double(std::size_t t, double stored)>;

/// Runs `policy` over the frame's generation channel. Requests outside [0, 1]
/// are clamped and counted in DispatchTrace::clamped_requests; NaN requests
/// throw NumericError.
DispatchTrace simulate(const Policy& policy, const series::SeriesFrame& frame, const FarmSpec& farm,
                       const StorageSpec& storage, double initial_stored = 0.0);

/// Peak-shaving baseload: request a fixed target, let the storage absorb
/// surpluses and cover deficits. The policy references `frame`, which must
/// outlive it.
Policy baseload_policy(const series::SeriesFrame& frame, double target_mw, const FarmSpec& farm);

/// Default baseload target: mean generation of the given (training) frame.
double default_baseload_target(const series::SeriesFrame& frame);

/// CSV with columns time, g, r_raw, r_prime, s, curtailed. `s` is the stored
/// energy after each step.
void write_trace_csv(const DispatchTrace& trace, const series::SeriesFrame& frame,
                     const std::filesystem::path& path);

}  // namespace hybridwind::dispatch
