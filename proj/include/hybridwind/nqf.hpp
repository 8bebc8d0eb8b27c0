#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "hybridwind/nn.hpp"
#include "hybridwind/series.hpp"
#include "hybridwind/specs.hpp"

namespace hybridwind::nqf {

enum class MonotoneMode {
    Penalty,  // hinge on adjacent-level logit crossings added to the loss
    Hard,     // non-negative weights on every path from the level input
};

struct NqfConfig {
    std::size_t hidden = 32;
    std::vector<std::size_t> ff = {32, 16};
    double learning_rate = 1e-3;
    int epochs = 32;
    std::size_t batch_size = 6;
    std::size_t seq_len = 168;
    std::vector<double> levels = {0.01, 0.05, 0.1, 0.5, 0.9, 0.99};
    double smooth_lambda = 0.01;
    double drift_gamma = 0.005;
    double bias_weight = 1.0;
    MonotoneMode monotone = MonotoneMode::Penalty;
    double monotone_weight = 1.0;
    double monotone_margin = 1e-3;  // in logit units
    std::uint64_t seed = 0;

    void validate() const;
};

nn::Architecture architecture(const NqfConfig& cfg);

/// A trained generator. Internally power is a capacity factor; wind speed is
/// divided by `wind_scale` before entering the network.
struct NqfModel {
    nn::NetParams params;
    double wind_scale = 25.0;
    double capacity_mw = 1.0;
};

/// p_t(alpha) for every step and level, capacity-factor scale.
struct QuantilePrediction {
    std::vector<double> levels;
    std::vector<std::vector<double>> values;  // [t][level]

    std::size_t steps() const { return values.size(); }
};

/// Recurrent pass driven by one quantile level per step: the LSTM reads
/// (v_t, p_{t-1}), the head reads (h_t, alpha_t), and p_t feeds back.
/// Returns p_t on the capacity-factor scale.
std::vector<double> nqf_forward(std::span<const double> wind, std::span<const double> alphas,
                                const NqfModel& model, double p0);

/// Runs the median path (alpha = 0.5 feeds back) and evaluates the quantile
/// function at every level off the same hidden state.
QuantilePrediction predict_quantiles(std::span<const double> wind, std::span<const double> levels,
                                     const NqfModel& model, double p0);

double pinball(double residual, double alpha);

/// Discretized CRPS: mean_t (2/|A|) sum_a rho_a(y_t - p_t(a)), plus
/// bias_weight * (mean p_t(0.5) - mean y_t)^2. When `grad` is given it
/// receives d loss / d p_t(a) with the same shape as preds.values.
double crps_loss(const QuantilePrediction& preds, std::span<const double> observed, double bias_weight,
                 std::vector<std::vector<double>>* grad = nullptr);

/// Quantile-level random walk
///   a_t = a_{t-1} + smooth N(0,1) + drift (0.5 - a_{t-1})
/// reflected back into (eps, 1 - eps), eps = 1e-6.
std::vector<double> brownian_walk(std::size_t steps, double smooth, double drift, std::uint64_t seed,
                                  double alpha0);

/// Training objective on one window (CRPS + bias + monotonicity penalty).
/// Gradients are accumulated into `grads` when non-null, including the path
/// through the fed-back median prediction.
double window_objective(std::span<const double> wind, std::span<const double> observed, double p0,
                        const NqfModel& model, const NqfConfig& cfg, nn::NetParams* grads);

/// Sampled generation: Brownian quantile walk from 0.5, cold-start p0 = 0,
/// output rescaled to MW.
std::vector<double> generate(const NqfModel& model, std::span<const double> wind, const NqfConfig& cfg,
                             std::uint64_t seed, double p0 = 0.0);

struct EpochMetrics {
    int epoch = 0;  // 0 is the untrained model
    double train_loss = 0.0;
    double valid_loss = 0.0;
};

struct TrainState {
    NqfModel model;
    nn::AdamState optimizer;
    int epochs_done = 0;
};

using EpochCallback = std::function<void(const EpochMetrics&, const TrainState&)>;

/// Mean CRPS objective (no monotonicity penalty) over non-overlapping
/// windows of `frame`.
double validation_loss(const series::SeriesFrame& frame, const NqfModel& model, const NqfConfig& cfg);

/// Trains on `train`, scoring `valid` after every epoch. Generation is
/// normalized by farm capacity. Pass `resume` to continue a saved run.
std::vector<EpochMetrics> train_nqf(const series::SeriesFrame& train, const series::SeriesFrame& valid,
                                    const NqfConfig& cfg, const FarmSpec& farm, TrainState& state,
                                    bool resume = false, const EpochCallback& on_epoch = {});

/// Fresh, seeded model for `train` (wind scale taken from its maximum).
TrainState initial_state(const series::SeriesFrame& train, const NqfConfig& cfg, const FarmSpec& farm);

nn::Checkpoint to_checkpoint(const TrainState& state, const NqfConfig& cfg);
TrainState from_checkpoint(const nn::Checkpoint& ckpt);

}  // namespace hybridwind::nqf
