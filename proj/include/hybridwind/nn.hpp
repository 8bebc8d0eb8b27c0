#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hybridwind::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { Linear, Sigmoid };

/// Shape of the shared recurrent architecture: an LSTM over `input_size`
/// covariates followed by a tanh feedforward stack that consumes the hidden
/// state plus `extra_inputs` side inputs and ends in one neuron.
struct Architecture {
    std::size_t input_size = 1;
    std::size_t hidden_size = 8;
    std::size_t extra_inputs = 0;
    std::vector<std::size_t> ff_widths;  // hidden feedforward layers
    Activation head = Activation::Sigmoid;

    std::size_t ff_input_size() const { return hidden_size + extra_inputs; }
    bool operator==(const Architecture&) const = default;
};

/// LSTM gates are stacked [input, forget, candidate, output] along the rows of
/// lstm_w / lstm_u / lstm_b. The same type doubles as a gradient buffer.
struct NetParams {
    Architecture arch;
    Matrix lstm_w;  // 4H x input_size
    Matrix lstm_u;  // 4H x H
    Vector lstm_b;  // 4H
    std::vector<Matrix> ff_w;  // one per layer incl. the scalar head
    std::vector<Vector> ff_b;

    static NetParams zeros(const Architecture& arch);
    void set_zero();
    std::size_t parameter_count() const;

    std::vector<std::pair<std::string, std::span<double>>> tensors();
    std::vector<std::pair<std::string, std::span<const double>>> tensors() const;

    bool operator==(const NetParams& other) const;
};

/// Seeded uniform init within +-1/sqrt(fan_in); LSTM forget-gate bias set to +1.
NetParams init_params(const Architecture& arch, std::uint64_t seed);
double init_bound(std::size_t fan_in);

/// Throws NumericError naming the first tensor holding a non-finite value.
void require_finite(const NetParams& params, std::string_view what);

struct RecurrentState {
    Vector h;
    Vector c;

    static RecurrentState zeros(std::size_t hidden);
};

struct LstmCache {
    Vector x, h_prev, c_prev;
    Vector i, f, g, o;
    Vector c, tanh_c, h;
};

/// Cell state magnitude past which a forward pass is treated as diverged.
inline constexpr double kCellStateLimit = 1e6;

void lstm_forward(const NetParams& params, const Vector& x, const RecurrentState& state, LstmCache& cache);

/// Backpropagates (dh, dc) at this step's outputs, accumulating into `grads`.
/// Writes gradients w.r.t. the step input and the incoming state.
void lstm_backward(const NetParams& params, const LstmCache& cache, const Vector& dh, const Vector& dc,
                   NetParams& grads, Vector& dx, Vector& dh_prev, Vector& dc_prev);

/// Single LSTM step returning the new state (h is the step output).
RecurrentState lstm_step(const Vector& x, const RecurrentState& state, const NetParams& params);

struct FfCache {
    std::vector<Vector> activations;  // [input, hidden_1, ..., hidden_L]
    double logit = 0.0;                // head pre-activation
    double output = 0.0;
};

/// Feedforward head over [h; extra]. Returns the activated scalar output.
double ff_forward(const NetParams& params, const Vector& h, std::span<const double> extra,
                  FfCache* cache = nullptr);

/// Backpropagates d(loss)/d(output) (or d/d(logit) when `wrt_logit`),
/// accumulating into `grads`, and returns the gradient w.r.t. [h; extra].
Vector ff_backward(const NetParams& params, const FfCache& cache, double d_out, NetParams& grads,
                   bool wrt_logit = false);

double sigmoid(double x);

struct AdamState {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t step = 0;
    NetParams m;
    NetParams v;

    static AdamState for_params(const NetParams& params);
};

/// Bias-corrected Adam update. Leaves parameters finite or throws.
void adam_step(NetParams& params, const NetParams& grads, AdamState& state, double learning_rate);

struct GradCheckReport {
    double max_relative_error = 0.0;
    std::string worst_tensor;
    std::size_t worst_index = 0;
    double analytic = 0.0;
    double numeric = 0.0;
    std::size_t checked = 0;
};

/// Central differences on every parameter. Relative error is
/// |a - n| / max(|a|, |n|, floor).
GradCheckReport gradient_check(const NetParams& params, const std::function<double(const NetParams&)>& loss,
                               const NetParams& analytic, double eps = 1e-5, double floor = 1e-6);

/// Serialized model: architecture, parameters, optional optimizer state, and
/// free-form metadata (training config, seed, epoch, input scales).
struct Checkpoint {
    std::string model;
    std::map<std::string, std::string> metadata;
    NetParams params;
    std::optional<AdamState> optimizer;

    bool operator==(const Checkpoint& other) const;
};

void save_checkpoint(const Checkpoint& checkpoint, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace hybridwind::nn
