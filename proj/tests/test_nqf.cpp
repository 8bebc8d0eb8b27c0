#include <gtest/gtest.h>

#include <cmath>

#include "hybridwind/errors.hpp"
#include "hybridwind/nqf.hpp"
#include "toy.hpp"

using namespace hybridwind;
using namespace hybridwind::nqf;

namespace {

NqfConfig tiny_config() {
    NqfConfig c;
    c.hidden = 4;
    c.ff = {6, 4};
    c.levels = {0.1, 0.5, 0.9};
    c.seq_len = 24;
    c.batch_size = 4;
    c.epochs = 2;
    c.learning_rate = 5e-3;
    c.seed = 13;
    return c;
}

NqfModel tiny_model(const NqfConfig& cfg, std::uint64_t seed) {
    NqfModel m;
    m.params = nn::init_params(architecture(cfg), seed);
    m.wind_scale = 25.0;
    m.capacity_mw = 100.0;
    return m;
}

const series::SeriesFrame& synth_two_months() {
    static const auto f = [] {
        FarmSpec farm;
        return series::synth_dataset(1, 21, farm).slice(0, 24 * 60);
    }();
    return f;
}

}  // namespace

TEST(Pinball, HandExample) {
    // Under-prediction by 0.4 at alpha 0.5 and over-prediction by 0.2 at alpha 0.9.
    EXPECT_DOUBLE_EQ(pinball(0.4, 0.5), 0.2);
    EXPECT_NEAR(pinball(-0.2, 0.9), 0.02, 1e-15);
    EXPECT_DOUBLE_EQ(pinball(0.0, 0.3), 0.0);
}

TEST(Crps, HandExample) {
    QuantilePrediction p;
    p.levels = {0.5};
    p.values = {{0.6}};
    const std::vector<double> y = {1.0};
    // (2/1) * 0.4 * 0.5 = 0.4; bias term adds 0.4^2.
    EXPECT_DOUBLE_EQ(crps_loss(p, y, 0.0), 0.4);
    EXPECT_DOUBLE_EQ(crps_loss(p, y, 1.0), 0.4 + 0.16);
}

TEST(Crps, PerfectConstantPredictionIsZero) {
    QuantilePrediction p;
    p.levels = {0.1, 0.5, 0.9};
    p.values.assign(5, std::vector<double>(3, 0.3));
    const std::vector<double> y(5, 0.3);
    EXPECT_EQ(crps_loss(p, y, 1.0), 0.0);
}

TEST(Crps, BiasTermIsSquaredMeanOffset) {
    QuantilePrediction p;
    p.levels = {0.5};
    p.values = {{0.2}, {0.6}};
    const std::vector<double> y = {0.2, 0.6};
    const double c = 0.05;
    QuantilePrediction shifted = p;
    for (auto& row : shifted.values) row[0] += c;
    const double with = crps_loss(shifted, y, 1.0);
    const double without = crps_loss(shifted, y, 0.0);
    EXPECT_NEAR(with - without, c * c, 1e-15);
}

TEST(Crps, GradientMatchesFiniteDifferences) {
    QuantilePrediction p;
    p.levels = {0.1, 0.5, 0.9};
    p.values = {{0.11, 0.43, 0.71}, {0.05, 0.37, 0.52}, {0.3, 0.6, 0.9}};
    const std::vector<double> y = {0.4, 0.9, 0.2};
    std::vector<std::vector<double>> g;
    crps_loss(p, y, 1.0, &g);
    const double h = 1e-7;
    for (std::size_t t = 0; t < 3; ++t)
        for (std::size_t k = 0; k < 3; ++k) {
            auto a = p, b = p;
            a.values[t][k] += h;
            b.values[t][k] -= h;
            EXPECT_NEAR(g[t][k], (crps_loss(a, y, 1.0) - crps_loss(b, y, 1.0)) / (2 * h), 1e-6);
        }
}

TEST(BrownianWalk, ZeroSmoothnessZeroDriftIsConstant) {
    const auto a = brownian_walk(50, 0.0, 0.0, 1, 0.3);
    for (double x : a) EXPECT_DOUBLE_EQ(x, 0.3);
}

TEST(BrownianWalk, DriftOnlyHalvesDistance) {
    const auto a = brownian_walk(3, 0.0, 0.5, 1, 0.9);
    EXPECT_DOUBLE_EQ(a[0], 0.9);
    EXPECT_DOUBLE_EQ(a[1], 0.7);
    EXPECT_DOUBLE_EQ(a[2], 0.6);
}

TEST(BrownianWalk, StaysInsideAndCentres) {
    const auto a = brownian_walk(1000000, 0.05, 0.005, 77, 0.5);
    double sum = 0.0;
    for (double x : a) {
        ASSERT_GT(x, 0.0);
        ASSERT_LT(x, 1.0);
        sum += x;
    }
    EXPECT_NEAR(sum / static_cast<double>(a.size()), 0.5, 0.05);
}

TEST(BrownianWalk, Deterministic) {
    EXPECT_EQ(brownian_walk(100, 0.1, 0.01, 5, 0.5), brownian_walk(100, 0.1, 0.01, 5, 0.5));
}

TEST(Forward, LevelOutsideUnitIntervalIsDomainError) {
    const auto cfg = tiny_config();
    const auto m = tiny_model(cfg, 1);
    const std::vector<double> v = {5, 6};
    EXPECT_THROW(nqf_forward(v, std::vector<double>{0.5, 1.0}, m, 0.0), DomainError);
    EXPECT_THROW(nqf_forward(v, std::vector<double>{0.0, 0.5}, m, 0.0), DomainError);
    EXPECT_THROW(nqf_forward(v, std::vector<double>{0.5}, m, 0.0), SizeError);
}

TEST(Forward, MedianPathMatchesQuantileMedian) {
    const auto cfg = tiny_config();
    const auto m = tiny_model(cfg, 2);
    std::vector<double> v(30);
    for (std::size_t t = 0; t < v.size(); ++t) v[t] = 3.0 + 0.4 * static_cast<double>(t);
    const auto q = predict_quantiles(v, cfg.levels, m, 0.1);
    const auto med = nqf_forward(v, std::vector<double>(v.size(), 0.5), m, 0.1);
    for (std::size_t t = 0; t < v.size(); ++t) EXPECT_DOUBLE_EQ(q.values[t][1], med[t]);
}

TEST(WindowObjective, GradientCheckTwentySteps) {
    auto cfg = tiny_config();
    const auto m = tiny_model(cfg, 3);
    const auto& f = synth_two_months();
    const std::vector<double> v(f.v->begin() + 100, f.v->begin() + 120);
    std::vector<double> y(f.g->begin() + 100, f.g->begin() + 120);
    for (double& x : y) x /= 100.0;
    for (auto mode : {MonotoneMode::Penalty, MonotoneMode::Hard}) {
        cfg.monotone = mode;
        auto g = nn::NetParams::zeros(m.params.arch);
        window_objective(v, y, 0.2, m, cfg, &g);
        const auto report = nn::gradient_check(
            m.params,
            [&](const nn::NetParams& p) {
                NqfModel q = m;
                q.params = p;
                return window_objective(v, y, 0.2, q, cfg, nullptr);
            },
            g);
        EXPECT_LT(report.max_relative_error, 1e-4) << report.worst_tensor << "[" << report.worst_index << "]";
    }
}

TEST(Train, SmokeLossDecreasesAndIsDeterministic) {
    const auto cfg = tiny_config();
    FarmSpec farm;
    auto [train, valid] = series::split_train_test(synth_two_months(), 0.75);
    TrainState a, b;
    const auto ha = train_nqf(train, valid, cfg, farm, a);
    const auto hb = train_nqf(train, valid, cfg, farm, b);
    ASSERT_EQ(ha.size(), 3u);
    EXPECT_LE(ha[2].valid_loss, ha[0].valid_loss);
    EXPECT_TRUE(std::isnan(ha[0].train_loss));
    for (std::size_t e = 0; e < ha.size(); ++e) EXPECT_EQ(ha[e].valid_loss, hb[e].valid_loss);
    EXPECT_EQ(a.model.params, b.model.params);
}

TEST(Train, ResumeReproducesNextEpoch) {
    auto cfg = tiny_config();
    cfg.epochs = 3;
    FarmSpec farm;
    auto [train, valid] = series::split_train_test(synth_two_months(), 0.75);
    TrainState full;
    const auto straight = train_nqf(train, valid, cfg, farm, full);

    auto short_cfg = cfg;
    short_cfg.epochs = 2;
    TrainState part;
    train_nqf(train, valid, short_cfg, farm, part);
    const auto path = toy::temp_path("nqf_resume.ckpt");
    nn::save_checkpoint(to_checkpoint(part, short_cfg), path);
    auto resumed = from_checkpoint(nn::load_checkpoint(path));
    const auto tail = train_nqf(train, valid, cfg, farm, resumed, true);
    ASSERT_EQ(tail.size(), 1u);
    EXPECT_EQ(tail[0].epoch, 3);
    EXPECT_EQ(tail[0].valid_loss, straight[3].valid_loss);
    EXPECT_EQ(resumed.model.params, full.model.params);
}

TEST(Generate, ZeroSmoothnessGivesMedianPath) {
    auto cfg = tiny_config();
    cfg.smooth_lambda = 0.0;
    const auto m = tiny_model(cfg, 4);
    const std::vector<double> v(synth_two_months().v->begin(), synth_two_months().v->begin() + 48);
    const auto gen = generate(m, v, cfg, 99);
    const auto med = nqf_forward(v, std::vector<double>(v.size(), 0.5), m, 0.0);
    for (std::size_t t = 0; t < v.size(); ++t) EXPECT_DOUBLE_EQ(gen[t], 100.0 * med[t]);
}

TEST(Generate, BoundedBySeededCapacity) {
    const auto cfg = tiny_config();
    const auto m = tiny_model(cfg, 5);
    const auto& v = *synth_two_months().v;
    const auto a = generate(m, v, cfg, 1);
    const auto b = generate(m, v, cfg, 1);
    EXPECT_EQ(a, b);
    for (double x : a) {
        EXPECT_GE(x, 0.0);
        EXPECT_LE(x, 100.0);
    }
}

TEST(Monotone, HardModeNeverCrosses) {
    auto cfg = tiny_config();
    cfg.monotone = MonotoneMode::Hard;
    FarmSpec farm;
    auto [train, valid] = series::split_train_test(synth_two_months(), 0.75);
    TrainState st;
    train_nqf(train, valid, cfg, farm, st);
    const std::vector<double> probe = {0.01, 0.05, 0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99};
    const auto q = predict_quantiles(*valid.v, probe, st.model, 0.0);
    for (const auto& row : q.values)
        for (std::size_t k = 1; k < row.size(); ++k) ASSERT_GE(row[k], row[k - 1]);
}

TEST(Config, Validation) {
    auto c = tiny_config();
    c.levels = {0.1, 0.9};
    EXPECT_THROW(c.validate(), ConfigError);
    c.levels = {0.5, 0.1};
    EXPECT_THROW(c.validate(), ConfigError);
    c = tiny_config();
    c.drift_gamma = 1.0;
    EXPECT_THROW(c.validate(), ConfigError);
}
