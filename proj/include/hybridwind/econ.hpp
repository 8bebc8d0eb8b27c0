#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hybridwind/specs.hpp"

namespace hybridwind::econ {

/// COVE is computed as a ratio of dollars to price-weighted MWh. Reports
/// multiply by this factor to present it under a per-kWh label.
inline constexpr double kCoveDisplayScale = 1000.0;

/// Levelized cost of energy. `annualization` scales the fixed-cost numerator
/// (1.0 for a full year; window_hours / 8760 for shorter spans).
double lcoe(std::span<const double> delivered, const FarmSpec& farm, const StorageSpec& storage,
            double annualization = 1.0);

/// Cost of valued energy: fixed costs over sum(r'_i * p_i).
double cove(std::span<const double> delivered, std::span<const double> price, const FarmSpec& farm,
            const StorageSpec& storage, double annualization = 1.0);

double value_factor(std::span<const double> dispatch, std::span<const double> price);

/// Energy generated but neither delivered nor charged, for one step.
double curtailment_step(double generated, double delivered, double stored_before, double stored_after);

struct AnnualMetrics {
    std::size_t year = 0;
    std::size_t steps = 0;
    bool partial = false;
    double aep_mwh = 0.0;
    double curtailment_mwh = 0.0;
    double storage_utilization = 0.0;
    double value_factor = 0.0;
    double cove = 0.0;
};

/// Splits the trace into 8760-step years (the trailing remainder is reported as
/// a partial year with annualized COVE).
std::vector<AnnualMetrics> annual_report(const DispatchTrace& trace, std::span<const double> generation,
                                         std::span<const double> price, const FarmSpec& farm,
                                         const StorageSpec& storage);

/// Mean COVE over complete years; if there is no complete year, the
/// annualized partial year stands in.
double average_annual_cove(const std::vector<AnnualMetrics>& years);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // sample standard deviation, 0 for a single value
};
MeanStd mean_std(std::span<const double> values);

/// (technology, rating, duration) -> RTE, CAPEX, OPEX. Lookup is exact; no
/// interpolation between catalog rows.
class StorageCatalog {
public:
    struct Entry {
        std::string technology;
        double rating_mw = 0.0;
        double duration_h = 0.0;
        double rte = 0.0;
        double capex_usd = 0.0;
        double opex_usd_per_yr = 0.0;
    };

    StorageCatalog() = default;
    explicit StorageCatalog(std::vector<Entry> entries);

    static StorageCatalog load(const std::filesystem::path& path);
    void save(const std::filesystem::path& path) const;

    /// Throws ConfigError naming the triple when it is not listed.
    StorageSpec lookup(const std::string& technology, double rating_mw, double duration_h) const;
    bool contains(const std::string& technology, double rating_mw, double duration_h) const;

    const std::vector<Entry>& entries() const { return entries_; }

private:
    std::vector<Entry> entries_;
};

/// Non-authoritative placeholder costs covering every technology, rating and
/// duration of the storage search grid. Replace with vendor cost tables for
/// real studies.
StorageCatalog placeholder_catalog();

}  // namespace hybridwind::econ
