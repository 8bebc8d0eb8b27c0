#include "hybridwind/cove.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <numeric>
#include <string>

#include "hybridwind/econ.hpp"
#include "hybridwind/errors.hpp"

namespace hybridwind::cove {

namespace {

using series::Channel;

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

double mean(std::span<const double> xs) {
    return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

nn::Vector covariates(double g, double p, double s, double u, const CoveModel& model, const FarmSpec& farm,
                      const StorageSpec& storage) {
    nn::Vector x(4);
    x << g / farm.capacity_mw, p / model.price_scale, s / storage.capacity_mwh(), u / farm.capacity_mw;
    return x;
}

// (gamma M)^Gamma and its derivative in M; zero for M <= 0.
double power_term(double prefactor, double degree, double m, double* d_m) {
    if (m <= 0.0 || prefactor <= 0.0) {
        if (d_m) *d_m = 0.0;
        return 0.0;
    }
    const double value = std::pow(prefactor * m, degree);
    if (d_m) *d_m = degree * value / m;
    return value;
}

}  // namespace

void LossHyperparams::validate() const {
    if (!(Gamma > 0.0 && Omega > 0.0 && Lambda > 0.0)) throw ConfigError("loss degrees must be > 0");
    if (lambda < 0.0 || gamma < 0.0 || omega < 0.0) throw ConfigError("loss pre-factors must be >= 0");
    if (t_a < 0) throw ConfigError("t_a must be >= 0");
}

void CoveConfig::validate() const {
    if (hidden == 0 || seq_len == 0 || batch_size == 0) throw ConfigError("cove sizes must be positive");
    if (epochs < 0) throw ConfigError("cove.epochs must be >= 0");
    if (!(learning_rate > 0.0)) throw ConfigError("cove.lr must be > 0");
    farm.validate();
    storage.validate();
    hp.validate();
    if (!(initial_stored >= 0.0 && initial_stored <= storage.capacity_mwh()))
        throw ConfigError("initial stored energy outside [0, C_S]");
}

nn::Architecture architecture(const CoveConfig& cfg) {
    nn::Architecture a;
    a.input_size = 4;  // g, p, s, u
    a.hidden_size = cfg.hidden;
    a.extra_inputs = 0;
    a.ff_widths = cfg.ff;
    a.head = nn::Activation::Sigmoid;
    return a;
}

DispatchTrace cove_forward(const series::SeriesFrame& window, const CoveModel& model, const FarmSpec& farm,
                           const StorageSpec& storage, double initial_stored) {
    return dispatch::simulate(cove_policy(model, window, farm, storage), window, farm, storage, initial_stored);
}

dispatch::Policy cove_policy(const CoveModel& model, const series::SeriesFrame& frame, const FarmSpec& farm,
                             const StorageSpec& storage) {
    const auto* g = &frame.channel(Channel::Generation);
    const auto* p = &frame.channel(Channel::Price);
    const auto* u = &frame.channel(Channel::Load);
    struct Closure {
        const CoveModel* model;
        FarmSpec farm;
        StorageSpec storage;
        nn::RecurrentState state;
        nn::LstmCache cache;
    };
    auto c = std::make_shared<Closure>(
        Closure{&model, farm, storage, nn::RecurrentState::zeros(model.params.arch.hidden_size), {}});
    return [c, g, p, u](std::size_t t, double stored) {
        nn::lstm_forward(c->model->params,
                         covariates((*g)[t], (*p)[t], stored, (*u)[t], *c->model, c->farm, c->storage), c->state,
                         c->cache);
        c->state.h = c->cache.h;
        c->state.c = c->cache.c;
        return nn::ff_forward(c->model->params, c->state.h, {});
    };
}

double adaptive_factor(const LossHyperparams& hp, int epoch) {
    const double steps = std::max(static_cast<double>(epoch - hp.t_a), 1.0);
    return hp.lambda / std::pow(steps, hp.Lambda);
}

LossTerms unsupervised_loss(const DispatchTrace& trace, std::span<const double> price,
                            std::span<const double> generation, const FarmSpec& farm, const StorageSpec& storage,
                            const LossHyperparams& hp, int epoch, double annualization, LossGradient* grad) {
    const std::size_t T = trace.size();
    if (price.size() != T || generation.size() != T || trace.stored.size() != T + 1 || T == 0)
        throw SizeError("unsupervised loss: series are not aligned");
    const double p_bar = mean(price);
    const double g_bar = mean(generation);
    if (!(p_bar > 0.0)) throw UndefinedMetricError("unsupervised loss needs a positive mean price");

    LossTerms terms;
    terms.cove = econ::cove(trace.delivered, price, farm, storage, annualization);
    terms.factor = adaptive_factor(hp, epoch);

    const double inv_T = 1.0 / static_cast<double>(T);
    const double C_S = storage.capacity_mwh();
    const double C_WF = farm.capacity_mw;
    std::vector<double> ratio(T);
    for (std::size_t t = 0; t < T; ++t) {
        terms.peak += inv_T * (trace.stored[t + 1] / C_S) * (price[t] / p_bar);
        ratio[t] = price[t] > 0.0 ? std::min(p_bar / price[t], kPriceRatioCap) : kPriceRatioCap;
        terms.base += inv_T * std::max(trace.delivered[t] - g_bar, 0.0) / C_WF * ratio[t];
    }
    double d_peak = 0.0, d_base = 0.0;
    const double peak_term = power_term(hp.gamma, hp.Gamma, terms.peak, &d_peak);
    const double base_term = power_term(hp.omega, hp.Omega, terms.base, &d_base);
    terms.total = terms.cove + terms.factor * (peak_term + base_term);

    if (grad) {
        double valued = 0.0;
        for (std::size_t t = 0; t < T; ++t) valued += trace.delivered[t] * price[t];
        const double fixed = terms.cove * valued;
        grad->delivered.assign(T, 0.0);
        grad->stored_next.assign(T, 0.0);
        for (std::size_t t = 0; t < T; ++t) {
            grad->delivered[t] = -fixed * price[t] / (valued * valued);
            if (trace.delivered[t] > g_bar)
                grad->delivered[t] += terms.factor * d_base * inv_T * ratio[t] / C_WF;
            grad->stored_next[t] = terms.factor * d_peak * inv_T * price[t] / (p_bar * C_S);
        }
    }
    return terms;
}

double window_objective(const series::SeriesFrame& window, const CoveModel& model, const CoveConfig& cfg,
                        int epoch, nn::NetParams* grads) {
    const auto& params = model.params;
    const auto& g = window.channel(Channel::Generation);
    const auto& p = window.channel(Channel::Price);
    const auto& u = window.channel(Channel::Load);
    const std::size_t T = window.size();
    const auto& farm = cfg.farm;
    const auto& storage = cfg.storage;

    std::vector<nn::LstmCache> lstm(T);
    std::vector<nn::FfCache> heads(T);
    std::vector<dispatch::StepJacobian> jac(T);
    DispatchTrace trace;
    trace.requested.resize(T);
    trace.delivered.resize(T);
    trace.curtailed.resize(T);
    trace.stored.resize(T + 1);
    trace.stored[0] = cfg.initial_stored;

    auto state = nn::RecurrentState::zeros(params.arch.hidden_size);
    for (std::size_t t = 0; t < T; ++t) {
        nn::lstm_forward(params, covariates(g[t], p[t], trace.stored[t], u[t], model, farm, storage), state, lstm[t]);
        state.h = lstm[t].h;
        state.c = lstm[t].c;
        const double r = nn::ff_forward(params, state.h, {}, &heads[t]);
        const auto step = dispatch::post_process_step(r, g[t], trace.stored[t], farm, storage, &jac[t]);
        trace.requested[t] = r;
        trace.delivered[t] = step.delivered;
        trace.stored[t + 1] = step.stored_next;
    }

    const double annualization = static_cast<double>(T) / static_cast<double>(series::kHoursPerYear);
    LossGradient lg;
    const auto terms = unsupervised_loss(trace, p, g, farm, storage, cfg.hp, epoch, annualization,
                                         grads ? &lg : nullptr);
    if (!std::isfinite(terms.total)) throw NumericError("COVE-NN objective is not finite");
    if (!grads) return terms.total;

    const auto H = static_cast<Eigen::Index>(params.arch.hidden_size);
    nn::Vector dh_next = nn::Vector::Zero(H);
    nn::Vector dc_next = nn::Vector::Zero(H);
    nn::Vector dx(4), dh_prev(H), dc_prev(H);
    double d_stored_future = 0.0;  // d loss / d s_{t+1} through steps after t
    const double C_S = storage.capacity_mwh();
    for (std::size_t t = T; t-- > 0;) {
        const double d_delivered = lg.delivered[t];
        const double d_next = lg.stored_next[t] + d_stored_future;
        const double d_request = d_delivered * jac[t].delivered_d_request + d_next * jac[t].next_d_request;
        const double d_stored_alg = d_delivered * jac[t].delivered_d_stored + d_next * jac[t].next_d_stored;
        nn::Vector dh = dh_next + nn::ff_backward(params, heads[t], d_request, *grads).head(H);
        nn::lstm_backward(params, lstm[t], dh, dc_next, *grads, dx, dh_prev, dc_prev);
        d_stored_future = d_stored_alg + dx(2) / C_S;
        dh_next = dh_prev;
        dc_next = dc_prev;
    }
    return terms.total;
}

double evaluate_cove(const CoveModel& model, const series::SeriesFrame& frame, const FarmSpec& farm,
                     const StorageSpec& storage, double initial_stored) {
    const auto trace = dispatch::simulate(cove_policy(model, frame, farm, storage), frame, farm, storage, initial_stored);
    const auto years = econ::annual_report(trace, frame.channel(Channel::Generation), frame.channel(Channel::Price),
                                           farm, storage);
    return econ::average_annual_cove(years);
}

TrainState initial_state(const series::SeriesFrame& train, const CoveConfig& cfg) {
    cfg.validate();
    TrainState s;
    s.model.params = nn::init_params(architecture(cfg), cfg.seed);
    s.model.price_scale = mean(train.channel(Channel::Price));
    if (!(s.model.price_scale > 0.0)) throw DataQualityError("training prices must have a positive mean");
    s.optimizer = nn::AdamState::for_params(s.model.params);
    return s;
}

std::vector<EpochMetrics> train_cove(const series::SeriesFrame& train, const series::SeriesFrame& valid,
                                     const CoveConfig& cfg, TrainState& state, bool resume,
                                     const EpochCallback& on_epoch) {
    cfg.validate();
    if (!resume) state = initial_state(train, cfg);
    std::vector<EpochMetrics> history;
    if (!resume) {
        EpochMetrics m;
        m.epoch = 0;
        m.train_loss = std::nan("");
        m.valid_cove = evaluate_cove(state.model, valid, cfg.farm, cfg.storage, cfg.initial_stored);
        history.push_back(m);
        if (on_epoch && !on_epoch(m, state)) return history;
    }

    auto grads = nn::NetParams::zeros(state.model.params.arch);
    for (int epoch = state.epochs_done + 1; epoch <= cfg.epochs; ++epoch) {
        const auto batches = series::make_batches(train, cfg.seq_len, cfg.batch_size,
                                                  mix_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
        double epoch_loss = 0.0;
        std::size_t windows = 0;
        for (const auto& batch : batches) {
            grads.set_zero();
            for (std::size_t s : batch.starts) {
                epoch_loss += window_objective(train.slice(s, batch.seq_len), state.model, cfg, epoch, &grads);
                ++windows;
            }
            const double inv = 1.0 / static_cast<double>(batch.size());
            for (auto& [name, data] : grads.tensors())
                for (double& x : data) x *= inv;
            nn::require_finite(grads, "COVE-NN gradient (epoch " + std::to_string(epoch) + ")");
            nn::adam_step(state.model.params, grads, state.optimizer, cfg.learning_rate);
        }
        state.epochs_done = epoch;
        EpochMetrics m;
        m.epoch = epoch;
        m.train_loss = epoch_loss / static_cast<double>(std::max<std::size_t>(windows, 1));
        m.valid_cove = evaluate_cove(state.model, valid, cfg.farm, cfg.storage, cfg.initial_stored);
        if (!std::isfinite(m.train_loss) || !std::isfinite(m.valid_cove))
            throw NumericError("COVE-NN training diverged at epoch " + std::to_string(epoch));
        history.push_back(m);
        if (on_epoch && !on_epoch(m, state)) break;
    }
    return history;
}

nn::Checkpoint to_checkpoint(const TrainState& state, const CoveConfig& cfg) {
    nn::Checkpoint c;
    c.model = "cove";
    c.params = state.model.params;
    c.optimizer = state.optimizer;
    c.metadata["price_scale"] = num(state.model.price_scale);
    c.metadata["epochs_done"] = std::to_string(state.epochs_done);
    c.metadata["seed"] = std::to_string(cfg.seed);
    c.metadata["lr"] = num(cfg.learning_rate);
    c.metadata["seq_len"] = std::to_string(cfg.seq_len);
    c.metadata["batch"] = std::to_string(cfg.batch_size);
    c.metadata["storage"] = cfg.storage.technology + "/" + num(cfg.storage.rating_mw) + "/" + num(cfg.storage.duration_h);
    c.metadata["hp"] = num(cfg.hp.gamma) + "," + num(cfg.hp.Gamma) + "," + num(cfg.hp.omega) + "," +
                       num(cfg.hp.Omega) + "," + num(cfg.hp.lambda) + "," + num(cfg.hp.Lambda) + "," +
                       std::to_string(cfg.hp.t_a);
    return c;
}

TrainState from_checkpoint(const nn::Checkpoint& ckpt) {
    if (ckpt.model != "cove") throw ConfigError("checkpoint holds a '" + ckpt.model + "' model, expected cove");
    TrainState s;
    s.model.params = ckpt.params;
    try {
        s.model.price_scale = std::stod(ckpt.metadata.at("price_scale"));
        s.epochs_done = std::stoi(ckpt.metadata.at("epochs_done"));
    } catch (const std::exception&) {
        throw SchemaError("cove checkpoint is missing scaling metadata");
    }
    s.optimizer = ckpt.optimizer ? *ckpt.optimizer : nn::AdamState::for_params(s.model.params);
    return s;
}

}  // namespace hybridwind::cove
