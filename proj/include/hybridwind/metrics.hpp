#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace hybridwind::metrics {

double rmse(std::span<const double> pred, std::span<const double> obs);

/// Pearson correlation; throws UndefinedMetricError for a constant series.
double cross_correlation(std::span<const double> x, std::span<const double> y);

struct BinEdges {
    std::vector<double> wind;   // ascending, size = bins + 1
    std::vector<double> power;

    std::size_t wind_bins() const { return wind.empty() ? 0 : wind.size() - 1; }
    std::size_t power_bins() const { return power.empty() ? 0 : power.size() - 1; }
};

/// Equal-width edges spanning the union range of both datasets.
BinEdges union_edges(std::span<const double> wind_a, std::span<const double> power_a,
                     std::span<const double> wind_b, std::span<const double> power_b, std::size_t wind_bins = 30,
                     std::size_t power_bins = 30);

/// 2-D histogram over (wind, power), normalized to unit mass. Values on the
/// upper edge fall in the last bin; values outside the edges are clamped.
struct JointDensity {
    BinEdges edges;
    std::vector<double> mass;  // row-major [wind_bin][power_bin]

    double at(std::size_t wind_bin, std::size_t power_bin) const {
        return mass[wind_bin * edges.power_bins() + power_bin];
    }
};

JointDensity joint_density(std::span<const double> wind, std::span<const double> power, const BinEdges& edges);

/// Jensen-Shannon divergence in bits (in [0, 1]); 0 log 0 = 0.
double jensen_shannon(const JointDensity& a, const JointDensity& b);

/// 1 - JSD between historical and predicted (wind, power) joint densities.
double power_curve_similarity(std::span<const double> hist_wind, std::span<const double> hist_power,
                              std::span<const double> pred_wind, std::span<const double> pred_power,
                              const BinEdges& edges);

/// Same, with default 30x30 union-range binning.
double power_curve_similarity(std::span<const double> hist_wind, std::span<const double> hist_power,
                              std::span<const double> pred_wind, std::span<const double> pred_power);

}  // namespace hybridwind::metrics
