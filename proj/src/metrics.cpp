#include "hybridwind/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "hybridwind/errors.hpp"

namespace hybridwind::metrics {

double rmse(std::span<const double> pred, std::span<const double> obs) {
    if (pred.empty() || pred.size() != obs.size()) throw SizeError("rmse: series must be non-empty and equal length");
    double ss = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) ss += (pred[i] - obs[i]) * (pred[i] - obs[i]);
    return std::sqrt(ss / static_cast<double>(pred.size()));
}

double cross_correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) throw SizeError("cross correlation needs equal lengths >= 2");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) throw UndefinedMetricError("cross correlation undefined for a constant series");
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

std::vector<double> linspace(double lo, double hi, std::size_t bins) {
    if (hi <= lo) hi = lo + 1.0;
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i)
        edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    edges[bins] = hi;
    return edges;
}

std::size_t locate(const std::vector<double>& edges, double x) {
    const std::size_t bins = edges.size() - 1;
    if (x <= edges.front()) return 0;
    if (x >= edges.back()) return bins - 1;
    const auto it = std::upper_bound(edges.begin(), edges.end(), x);
    return std::min(static_cast<std::size_t>(it - edges.begin()) - 1, bins - 1);
}

void check_edges(const BinEdges& edges) {
    if (edges.wind_bins() <= 1 || edges.power_bins() <= 1)
        throw ConfigError("power curve binning needs more than one bin per axis");
}

}  // namespace

BinEdges union_edges(std::span<const double> wind_a, std::span<const double> power_a,
                     std::span<const double> wind_b, std::span<const double> power_b, std::size_t wind_bins,
                     std::size_t power_bins) {
    if (wind_bins <= 1 || power_bins <= 1) throw ConfigError("power curve binning needs more than one bin per axis");
    if (wind_a.empty() || wind_b.empty()) throw SizeError("power curve similarity needs non-empty datasets");
    auto range = [](std::span<const double> a, std::span<const double> b) {
        const auto [a_lo, a_hi] = std::minmax_element(a.begin(), a.end());
        const auto [b_lo, b_hi] = std::minmax_element(b.begin(), b.end());
        return std::pair{std::min(*a_lo, *b_lo), std::max(*a_hi, *b_hi)};
    };
    const auto [v_lo, v_hi] = range(wind_a, wind_b);
    const auto [p_lo, p_hi] = range(power_a, power_b);
    return {linspace(v_lo, v_hi, wind_bins), linspace(p_lo, p_hi, power_bins)};
}

JointDensity joint_density(std::span<const double> wind, std::span<const double> power, const BinEdges& edges) {
    check_edges(edges);
    if (wind.empty() || wind.size() != power.size()) throw SizeError("joint density needs paired, non-empty data");
    JointDensity d;
    d.edges = edges;
    d.mass.assign(edges.wind_bins() * edges.power_bins(), 0.0);
    const double w = 1.0 / static_cast<double>(wind.size());
    for (std::size_t i = 0; i < wind.size(); ++i)
        d.mass[locate(edges.wind, wind[i]) * edges.power_bins() + locate(edges.power, power[i])] += w;
    return d;
}

double jensen_shannon(const JointDensity& a, const JointDensity& b) {
    if (a.edges.wind != b.edges.wind || a.edges.power != b.edges.power)
        throw ConfigError("densities use different binning");
    double js = 0.0;
    for (std::size_t i = 0; i < a.mass.size(); ++i) {
        const double p = a.mass[i];
        const double q = b.mass[i];
        const double m = 0.5 * (p + q);
        if (p > 0.0) js += 0.5 * p * std::log2(p / m);
        if (q > 0.0) js += 0.5 * q * std::log2(q / m);
    }
    return std::clamp(js, 0.0, 1.0);
}

double power_curve_similarity(std::span<const double> hist_wind, std::span<const double> hist_power,
                              std::span<const double> pred_wind, std::span<const double> pred_power,
                              const BinEdges& edges) {
    return 1.0 - jensen_shannon(joint_density(hist_wind, hist_power, edges),
                                joint_density(pred_wind, pred_power, edges));
}

double power_curve_similarity(std::span<const double> hist_wind, std::span<const double> hist_power,
                              std::span<const double> pred_wind, std::span<const double> pred_power) {
    return power_curve_similarity(hist_wind, hist_power, pred_wind, pred_power,
                                  union_edges(hist_wind, hist_power, pred_wind, pred_power));
}

}  // namespace hybridwind::metrics
