#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace hybridwind {

/// Economic and physical parameters of the wind farm.
struct FarmSpec {
    double capacity_mw = 249.0;       // C_WF
    double capex_usd = 373.5e6;       // includes balance of system
    double opex_usd_per_yr = 9.96e6;
    double fixed_charge_rate = 0.07;  // FCR, 1/yr

    /// CAPEX*FCR + OPEX, the annual fixed cost in $.
    double annual_fixed_cost() const { return capex_usd * fixed_charge_rate + opex_usd_per_yr; }
    void validate() const;
};

/// Co-located storage. Costs come from the catalog and are already resolved
/// for this (rating, duration) pair.
struct StorageSpec {
    std::string technology = "custom";
    double rating_mw = 100.0;     // R_S
    double duration_h = 4.0;      // D_S
    double round_trip_efficiency = 1.0;
    double capex_usd = 0.0;
    double opex_usd_per_yr = 0.0;

    double capacity_mwh() const { return rating_mw * duration_h; }
    double annual_fixed_cost(double fixed_charge_rate) const {
        return capex_usd * fixed_charge_rate + opex_usd_per_yr;
    }
    void validate() const;
};

/// Result of running a dispatch policy through the storage post-processing.
/// `stored` has one more entry than the per-step vectors: stored[0] is s0.
struct DispatchTrace {
    std::vector<double> requested;   // r_t, capacity factor in [0, 1]
    std::vector<double> delivered;   // r'_t, MW
    std::vector<double> stored;      // s_t, MWh, length T + 1
    std::vector<double> curtailed;   // MWh per step
    std::size_t clamped_requests = 0;

    std::size_t size() const { return delivered.size(); }
};

}  // namespace hybridwind
