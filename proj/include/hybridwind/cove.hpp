#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "hybridwind/dispatch.hpp"
#include "hybridwind/nn.hpp"
#include "hybridwind/series.hpp"
#include "hybridwind/specs.hpp"

namespace hybridwind::cove {

/// Tunables of the unsupervised dispatch loss. Defaults are the best values
/// reported for the Pyron study.
struct LossHyperparams {
    double gamma = 1.807;   // peaking penalty pre-factor
    double Gamma = 3.288;   // peaking penalty degree
    double omega = 2.702;   // baseload penalty pre-factor
    double Omega = 2.546;   // baseload penalty degree
    double lambda = 1.0;    // time-adaptive pre-factor
    double Lambda = 0.152;  // time-adaptive degree
    int t_a = 8;            // epochs before the adaptive decay starts

    void validate() const;
};

struct CoveConfig {
    std::size_t hidden = 16;
    std::vector<std::size_t> ff = {128, 64};
    double learning_rate = 1e-4;
    int epochs = 32;
    std::size_t batch_size = 8;
    std::size_t seq_len = 168;
    FarmSpec farm;
    StorageSpec storage;
    LossHyperparams hp;
    double initial_stored = 0.0;
    std::uint64_t seed = 0;

    void validate() const;
};

nn::Architecture architecture(const CoveConfig& cfg);

/// Network inputs are (g / C_WF, p / price_scale, s / C_S, u / C_WF).
struct CoveModel {
    nn::NetParams params;
    double price_scale = 1.0;  // training-split mean price
};

/// One recurrent dispatch pass over a window; the post-processed stored
/// energy feeds back as the next step's storage covariate.
DispatchTrace cove_forward(const series::SeriesFrame& window, const CoveModel& model, const FarmSpec& farm,
                           const StorageSpec& storage, double initial_stored);

/// Stateful policy for dispatch::simulate over an arbitrary-length frame.
/// `frame` must outlive the policy, and steps must be visited in order.
dispatch::Policy cove_policy(const CoveModel& model, const series::SeriesFrame& frame, const FarmSpec& farm,
                             const StorageSpec& storage);

/// lambda / max(t - t_a, 1)^Lambda with 1-based epoch t.
double adaptive_factor(const LossHyperparams& hp, int epoch);

/// Ratio cap on pbar / p_t inside the baseload penalty; keeps near-zero or
/// negative prices from producing unbounded or complex penalty terms.
inline constexpr double kPriceRatioCap = 10.0;

struct LossTerms {
    double cove = 0.0;
    double peak = 0.0;   // M_peak = mean_t (s_{t+1}/C_S) * p_t / pbar
    double base = 0.0;   // M_base = mean_t max(r'_t - gbar, 0)/C_WF * min(pbar/p_t, cap)
    double factor = 0.0;
    double total = 0.0;
};

/// Gradient of the loss with respect to delivered power r'_t and stored
/// energy after each step s_{t+1}.
struct LossGradient {
    std::vector<double> delivered;
    std::vector<double> stored_next;
};

/// COVE(r', p) + factor(t) ((gamma M_peak)^Gamma + (omega M_base)^Omega).
/// gbar and pbar are window means. COVE uses fixed costs scaled by
/// `annualization` (window_hours / 8760 for training windows).
LossTerms unsupervised_loss(const DispatchTrace& trace, std::span<const double> price,
                            std::span<const double> generation, const FarmSpec& farm, const StorageSpec& storage,
                            const LossHyperparams& hp, int epoch, double annualization,
                            LossGradient* grad = nullptr);

/// Loss on one window with backpropagation through Algorithm-1 subgradients
/// and the LSTM. Accumulates into `grads` when non-null.
double window_objective(const series::SeriesFrame& window, const CoveModel& model, const CoveConfig& cfg,
                        int epoch, nn::NetParams* grads);

/// Average annual COVE of a streaming simulation over `frame`.
double evaluate_cove(const CoveModel& model, const series::SeriesFrame& frame, const FarmSpec& farm,
                     const StorageSpec& storage, double initial_stored = 0.0);

struct EpochMetrics {
    int epoch = 0;  // 0 is the untrained model
    double train_loss = 0.0;
    double valid_cove = 0.0;  // average annual COVE on validation
};

struct TrainState {
    CoveModel model;
    nn::AdamState optimizer;
    int epochs_done = 0;
};

/// Return false to stop training after this epoch.
using EpochCallback = std::function<bool(const EpochMetrics&, const TrainState&)>;

TrainState initial_state(const series::SeriesFrame& train, const CoveConfig& cfg);

std::vector<EpochMetrics> train_cove(const series::SeriesFrame& train, const series::SeriesFrame& valid,
                                     const CoveConfig& cfg, TrainState& state, bool resume = false,
                                     const EpochCallback& on_epoch = {});

nn::Checkpoint to_checkpoint(const TrainState& state, const CoveConfig& cfg);
TrainState from_checkpoint(const nn::Checkpoint& ckpt);

}  // namespace hybridwind::cove
