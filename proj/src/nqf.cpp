#include "hybridwind/nqf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "hybridwind/errors.hpp"

namespace hybridwind::nqf {

namespace {

constexpr double kLevelEpsilon = 1e-6;

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::size_t median_index(std::span<const double> levels) {
    for (std::size_t k = 0; k < levels.size(); ++k)
        if (levels[k] == 0.5) return k;
    return levels.size();
}

nn::Vector lstm_input(double wind, double wind_scale, double previous) {
    nn::Vector x(2);
    x << wind / wind_scale, previous;
    return x;
}

void project_monotone(nn::NetParams& params) {
    const auto alpha_col = static_cast<Eigen::Index>(params.arch.hidden_size);
    params.ff_w[0].col(alpha_col) = params.ff_w[0].col(alpha_col).cwiseMax(0.0);
    for (std::size_t k = 1; k < params.ff_w.size(); ++k) params.ff_w[k] = params.ff_w[k].cwiseMax(0.0);
}

double observed_before(const std::vector<double>& cf, std::size_t start) {
    return start > 0 ? cf[start - 1] : cf[start];
}

}  // namespace

void NqfConfig::validate() const {
    if (hidden == 0 || seq_len == 0 || batch_size == 0) throw ConfigError("nqf sizes must be positive");
    if (epochs < 0) throw ConfigError("nqf.epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw ConfigError("nqf.lr must be > 0");
    if (levels.empty()) throw ConfigError("nqf.levels must not be empty");
    for (std::size_t k = 0; k < levels.size(); ++k) {
        if (!(levels[k] > 0.0 && levels[k] < 1.0)) throw ConfigError("quantile levels must lie in (0, 1)");
        if (k > 0 && !(levels[k] > levels[k - 1])) throw ConfigError("quantile levels must be strictly ascending");
    }
    if (median_index(levels) == levels.size()) throw ConfigError("quantile levels must include 0.5");
    if (smooth_lambda < 0.0) throw ConfigError("nqf.smooth_lambda must be >= 0");
    if (!(drift_gamma >= 0.0 && drift_gamma < 1.0)) throw ConfigError("nqf.drift_gamma must lie in [0, 1)");
    if (bias_weight < 0.0 || monotone_weight < 0.0) throw ConfigError("loss weights must be >= 0");
}

nn::Architecture architecture(const NqfConfig& cfg) {
    nn::Architecture a;
    a.input_size = 2;  // wind speed, previous prediction
    a.hidden_size = cfg.hidden;
    a.extra_inputs = 1;  // quantile level
    a.ff_widths = cfg.ff;
    a.head = nn::Activation::Sigmoid;
    return a;
}

std::vector<double> nqf_forward(std::span<const double> wind, std::span<const double> alphas,
                                const NqfModel& model, double p0) {
    if (wind.size() != alphas.size()) throw SizeError("wind and alpha series differ in length");
    std::vector<double> out(wind.size());
    auto state = nn::RecurrentState::zeros(model.params.arch.hidden_size);
    nn::LstmCache cache;
    double previous = p0;
    for (std::size_t t = 0; t < wind.size(); ++t) {
        const double alpha = alphas[t];
        if (!(alpha > 0.0 && alpha < 1.0))
            throw DomainError("quantile level " + num(alpha) + " outside (0, 1) at step " + std::to_string(t));
        nn::lstm_forward(model.params, lstm_input(wind[t], model.wind_scale, previous), state, cache);
        state.h = cache.h;
        state.c = cache.c;
        const double level[1] = {alpha};
        previous = nn::ff_forward(model.params, state.h, level);
        out[t] = previous;
    }
    return out;
}

QuantilePrediction predict_quantiles(std::span<const double> wind, std::span<const double> levels,
                                     const NqfModel& model, double p0) {
    QuantilePrediction pred;
    pred.levels.assign(levels.begin(), levels.end());
    pred.values.assign(wind.size(), std::vector<double>(levels.size()));
    auto state = nn::RecurrentState::zeros(model.params.arch.hidden_size);
    nn::LstmCache cache;
    double previous = p0;
    const double median[1] = {0.5};
    for (std::size_t t = 0; t < wind.size(); ++t) {
        nn::lstm_forward(model.params, lstm_input(wind[t], model.wind_scale, previous), state, cache);
        state.h = cache.h;
        state.c = cache.c;
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const double level[1] = {levels[k]};
            pred.values[t][k] = nn::ff_forward(model.params, state.h, level);
        }
        previous = nn::ff_forward(model.params, state.h, median);
    }
    return pred;
}

double pinball(double residual, double alpha) { return residual * (alpha - (residual < 0.0 ? 1.0 : 0.0)); }

double crps_loss(const QuantilePrediction& preds, std::span<const double> observed, double bias_weight,
                 std::vector<std::vector<double>>* grad) {
    const std::size_t T = preds.steps();
    const std::size_t K = preds.levels.size();
    if (T == 0 || K == 0) throw SizeError("CRPS loss needs at least one step and one level");
    if (observed.size() != T) throw SizeError("CRPS loss: prediction and observation lengths differ");
    const double scale = 2.0 / static_cast<double>(K) / static_cast<double>(T);
    if (grad) grad->assign(T, std::vector<double>(K, 0.0));

    double loss = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        for (std::size_t k = 0; k < K; ++k) {
            const double alpha = preds.levels[k];
            const double residual = observed[t] - preds.values[t][k];
            loss += scale * pinball(residual, alpha);
            if (grad) (*grad)[t][k] -= scale * (alpha - (residual < 0.0 ? 1.0 : 0.0));
        }
    }
    if (bias_weight > 0.0) {
        const std::size_t m = median_index(preds.levels);
        if (m == K) throw ConfigError("bias term needs the 0.5 quantile level");
        double diff = 0.0;
        for (std::size_t t = 0; t < T; ++t) diff += preds.values[t][m] - observed[t];
        diff /= static_cast<double>(T);
        loss += bias_weight * diff * diff;
        if (grad) {
            const double d = 2.0 * bias_weight * diff / static_cast<double>(T);
            for (std::size_t t = 0; t < T; ++t) (*grad)[t][m] += d;
        }
    }
    return loss;
}

std::vector<double> brownian_walk(std::size_t steps, double smooth, double drift, std::uint64_t seed,
                                  double alpha0) {
    if (smooth < 0.0) throw ContractError("smoothness must be >= 0");
    if (!(drift >= 0.0 && drift < 1.0)) throw ContractError("drift must lie in [0, 1)");
    if (!(alpha0 > 0.0 && alpha0 < 1.0)) throw ContractError("alpha0 must lie in (0, 1)");
    std::vector<double> out(steps);
    if (steps == 0) return out;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    constexpr double lo = kLevelEpsilon;
    constexpr double hi = 1.0 - kLevelEpsilon;
    out[0] = alpha0;
    for (std::size_t t = 1; t < steps; ++t) {
        const double prev = out[t - 1];
        double a = prev + smooth * normal(rng) + drift * (0.5 - prev);
        while (a < lo || a > hi) a = a < lo ? 2.0 * lo - a : 2.0 * hi - a;
        out[t] = a;
    }
    return out;
}

double window_objective(std::span<const double> wind, std::span<const double> observed, double p0,
                        const NqfModel& model, const NqfConfig& cfg, nn::NetParams* grads) {
    const auto& params = model.params;
    const std::size_t T = wind.size();
    const std::size_t K = cfg.levels.size();
    const std::size_t m = median_index(cfg.levels);
    if (m == K) throw ConfigError("quantile levels must include 0.5");
    if (observed.size() != T || T == 0) throw SizeError("window lengths differ");

    std::vector<nn::LstmCache> lstm(T);
    std::vector<std::vector<nn::FfCache>> heads(T, std::vector<nn::FfCache>(K));
    QuantilePrediction pred;
    pred.levels = cfg.levels;
    pred.values.assign(T, std::vector<double>(K));

    auto state = nn::RecurrentState::zeros(params.arch.hidden_size);
    double previous = p0;
    for (std::size_t t = 0; t < T; ++t) {
        nn::lstm_forward(params, lstm_input(wind[t], model.wind_scale, previous), state, lstm[t]);
        state.h = lstm[t].h;
        state.c = lstm[t].c;
        for (std::size_t k = 0; k < K; ++k) {
            const double level[1] = {cfg.levels[k]};
            pred.values[t][k] = nn::ff_forward(params, state.h, level, &heads[t][k]);
        }
        previous = pred.values[t][m];
    }

    std::vector<std::vector<double>> d_pred;
    double loss = crps_loss(pred, observed, cfg.bias_weight, grads ? &d_pred : nullptr);

    // Hinge on adjacent-level crossings of the head logits.
    std::vector<std::vector<double>> d_logit(T, std::vector<double>(K, 0.0));
    if (cfg.monotone == MonotoneMode::Penalty && cfg.monotone_weight > 0.0 && K > 1) {
        const double w = cfg.monotone_weight / static_cast<double>(T);
        for (std::size_t t = 0; t < T; ++t) {
            for (std::size_t k = 0; k + 1 < K; ++k) {
                const double gap = heads[t][k].logit - heads[t][k + 1].logit + cfg.monotone_margin;
                if (gap > 0.0) {
                    loss += w * gap;
                    d_logit[t][k] += w;
                    d_logit[t][k + 1] -= w;
                }
            }
        }
    }
    if (!std::isfinite(loss)) throw NumericError("NQF objective is not finite");
    if (!grads) return loss;

    const auto H = static_cast<Eigen::Index>(params.arch.hidden_size);
    nn::Vector dh_next = nn::Vector::Zero(H);
    nn::Vector dc_next = nn::Vector::Zero(H);
    nn::Vector dx(2), dh_prev(H), dc_prev(H);
    double d_feedback = 0.0;  // d loss / d p_t(0.5) through the next step's input
    for (std::size_t t = T; t-- > 0;) {
        nn::Vector dh = dh_next;
        for (std::size_t k = 0; k < K; ++k) {
            double d_out = d_pred[t][k];
            if (k == m) d_out += d_feedback;
            const double out = heads[t][k].output;
            const double d_z = d_out * out * (1.0 - out) + d_logit[t][k];
            dh += nn::ff_backward(params, heads[t][k], d_z, *grads, true).head(H);
        }
        nn::lstm_backward(params, lstm[t], dh, dc_next, *grads, dx, dh_prev, dc_prev);
        d_feedback = dx(1);
        dh_next = dh_prev;
        dc_next = dc_prev;
    }
    return loss;
}

std::vector<double> generate(const NqfModel& model, std::span<const double> wind, const NqfConfig& cfg,
                             std::uint64_t seed, double p0) {
    const auto alphas = brownian_walk(wind.size(), cfg.smooth_lambda, cfg.drift_gamma, seed, 0.5);
    auto out = nqf_forward(wind, alphas, model, p0);
    for (double& x : out) x *= model.capacity_mw;
    return out;
}

namespace {

std::vector<double> capacity_factor(const series::SeriesFrame& frame, double capacity) {
    auto g = frame.channel(series::Channel::Generation);
    for (double& x : g) x /= capacity;
    return g;
}

}  // namespace

double validation_loss(const series::SeriesFrame& frame, const NqfModel& model, const NqfConfig& cfg) {
    const auto& v = frame.channel(series::Channel::WindSpeed);
    const auto y = capacity_factor(frame, model.capacity_mw);
    const std::size_t L = std::min(cfg.seq_len, frame.size());
    NqfConfig scoring = cfg;
    scoring.monotone_weight = 0.0;
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t s = 0; s + L <= frame.size(); s += L) {
        total += window_objective(std::span(v).subspan(s, L), std::span(y).subspan(s, L), observed_before(y, s),
                                  model, scoring, nullptr);
        ++count;
    }
    return total / static_cast<double>(count);
}

TrainState initial_state(const series::SeriesFrame& train, const NqfConfig& cfg, const FarmSpec& farm) {
    cfg.validate();
    TrainState state;
    state.model.params = nn::init_params(architecture(cfg), cfg.seed);
    if (cfg.monotone == MonotoneMode::Hard) project_monotone(state.model.params);
    const auto& v = train.channel(series::Channel::WindSpeed);
    state.model.wind_scale = std::max(1.0, *std::max_element(v.begin(), v.end()));
    state.model.capacity_mw = farm.capacity_mw;
    state.optimizer = nn::AdamState::for_params(state.model.params);
    return state;
}

std::vector<EpochMetrics> train_nqf(const series::SeriesFrame& train, const series::SeriesFrame& valid,
                                    const NqfConfig& cfg, const FarmSpec& farm, TrainState& state, bool resume,
                                    const EpochCallback& on_epoch) {
    cfg.validate();
    if (!resume) state = initial_state(train, cfg, farm);
    const auto& v = train.channel(series::Channel::WindSpeed);
    const auto y = capacity_factor(train, state.model.capacity_mw);

    std::vector<EpochMetrics> history;
    if (!resume) {
        EpochMetrics m;
        m.epoch = 0;
        m.valid_loss = validation_loss(valid, state.model, cfg);
        m.train_loss = std::nan("");
        history.push_back(m);
        if (on_epoch) on_epoch(m, state);
    }

    auto grads = nn::NetParams::zeros(state.model.params.arch);
    auto batch_grads = grads;
    for (int epoch = state.epochs_done + 1; epoch <= cfg.epochs; ++epoch) {
        const auto batches =
            series::make_batches(train, cfg.seq_len, cfg.batch_size, mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        double epoch_loss = 0.0;
        std::size_t windows = 0;
        for (const auto& batch : batches) {
            batch_grads.set_zero();
            for (std::size_t s : batch.starts) {
                const double loss = window_objective(std::span(v).subspan(s, batch.seq_len),
                                                     std::span(y).subspan(s, batch.seq_len), observed_before(y, s),
                                                     state.model, cfg, &batch_grads);
                epoch_loss += loss;
                ++windows;
            }
            const double inv = 1.0 / static_cast<double>(batch.size());
            for (auto& [name, data] : batch_grads.tensors())
                for (double& x : data) x *= inv;
            nn::require_finite(batch_grads, "NQF gradient (epoch " + std::to_string(epoch) + ")");
            nn::adam_step(state.model.params, batch_grads, state.optimizer, cfg.learning_rate);
            if (cfg.monotone == MonotoneMode::Hard) project_monotone(state.model.params);
        }
        state.epochs_done = epoch;
        EpochMetrics m;
        m.epoch = epoch;
        m.train_loss = epoch_loss / static_cast<double>(std::max<std::size_t>(windows, 1));
        m.valid_loss = validation_loss(valid, state.model, cfg);
        if (!std::isfinite(m.train_loss) || !std::isfinite(m.valid_loss))
            throw NumericError("NQF training diverged at epoch " + std::to_string(epoch));
        history.push_back(m);
        if (on_epoch) on_epoch(m, state);
    }
    return history;
}

nn::Checkpoint to_checkpoint(const TrainState& state, const NqfConfig& cfg) {
    nn::Checkpoint c;
    c.model = "nqf";
    c.params = state.model.params;
    c.optimizer = state.optimizer;
    c.metadata["wind_scale"] = num(state.model.wind_scale);
    c.metadata["capacity_mw"] = num(state.model.capacity_mw);
    c.metadata["epochs_done"] = std::to_string(state.epochs_done);
    c.metadata["seed"] = std::to_string(cfg.seed);
    c.metadata["lr"] = num(cfg.learning_rate);
    c.metadata["seq_len"] = std::to_string(cfg.seq_len);
    c.metadata["batch"] = std::to_string(cfg.batch_size);
    c.metadata["bias_weight"] = num(cfg.bias_weight);
    std::string levels;
    for (double a : cfg.levels) levels += (levels.empty() ? "" : ",") + num(a);
    c.metadata["levels"] = levels;
    return c;
}

TrainState from_checkpoint(const nn::Checkpoint& ckpt) {
    if (ckpt.model != "nqf") throw ConfigError("checkpoint holds a '" + ckpt.model + "' model, expected nqf");
    TrainState s;
    s.model.params = ckpt.params;
    try {
        s.model.wind_scale = std::stod(ckpt.metadata.at("wind_scale"));
        s.model.capacity_mw = std::stod(ckpt.metadata.at("capacity_mw"));
        s.epochs_done = std::stoi(ckpt.metadata.at("epochs_done"));
    } catch (const std::exception&) {
        throw SchemaError("nqf checkpoint is missing scaling metadata");
    }
    s.optimizer = ckpt.optimizer ? *ckpt.optimizer : nn::AdamState::for_params(s.model.params);
    return s;
}

}  // namespace hybridwind::nqf
