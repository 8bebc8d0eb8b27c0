#include <gtest/gtest.h>

#include <cmath>

#include "hybridwind/cove.hpp"
#include "hybridwind/econ.hpp"
#include "hybridwind/errors.hpp"
#include "toy.hpp"

using namespace hybridwind;
using namespace hybridwind::cove;

namespace {

CoveConfig tiny_config() {
    CoveConfig c;
    c.hidden = 4;
    c.ff = {8, 4};
    c.seq_len = 48;
    c.batch_size = 4;
    c.epochs = 4;
    c.learning_rate = 1e-3;
    c.storage.rating_mw = 50;
    c.storage.duration_h = 4;
    c.storage.round_trip_efficiency = 0.85;
    c.seed = 3;
    return c;
}

const series::SeriesFrame& synth_frame() {
    static const auto f = [] {
        FarmSpec farm;
        return series::synth_dataset(1, 31, farm).slice(0, 24 * 90);
    }();
    return f;
}

}  // namespace

TEST(Forward, ZeroNetworkRequestsHalf) {
    auto cfg = tiny_config();
    CoveModel m;
    m.params = nn::NetParams::zeros(architecture(cfg));
    const auto trace = cove_forward(synth_frame().slice(0, 24), m, cfg.farm, cfg.storage, 0.0);
    for (double r : trace.requested) EXPECT_EQ(r, 0.5);
}

TEST(Forward, ComposesWithPostProcessing) {
    // Zero network + hand storage reproduces the chained worked trace.
    CoveConfig cfg;
    cfg.hidden = 2;
    cfg.ff = {};
    CoveModel m;
    m.params = nn::NetParams::zeros(architecture(cfg));
    const auto f = toy::frame({60, 10, 0}, {30, 30, 30}, {50, 50, 50});
    const auto trace = cove_forward(f, m, toy::hand_farm(), toy::hand_storage(), 10.0);
    EXPECT_DOUBLE_EQ(trace.delivered[0], 50.0);
    EXPECT_DOUBLE_EQ(trace.delivered[1], 26.0);
    EXPECT_DOUBLE_EQ(trace.delivered[2], 3.2);
    EXPECT_NEAR(trace.stored[3], 0.8, 1e-12);
}

TEST(Loss, NoPenaltyEqualsCove) {
    const auto& f = synth_frame();
    const auto w = f.slice(0, 168);
    auto cfg = tiny_config();
    CoveModel m;
    m.params = nn::init_params(architecture(cfg), 1);
    m.price_scale = 30.0;
    const auto trace = cove_forward(w, m, cfg.farm, cfg.storage, 0.0);
    auto hp = cfg.hp;
    hp.lambda = 0.0;
    const double ann = 168.0 / 8760.0;
    const auto terms = unsupervised_loss(trace, *w.p, *w.g, cfg.farm, cfg.storage, hp, 1, ann);
    EXPECT_EQ(terms.total, terms.cove);
    EXPECT_DOUBLE_EQ(terms.cove, econ::cove(trace.delivered, *w.p, cfg.farm, cfg.storage, ann));
}

TEST(Loss, HandPenaltyTerms) {
    // One step, everything normalized to simple numbers.
    FarmSpec farm;
    farm.capacity_mw = 10;
    StorageSpec st;
    st.rating_mw = 1;
    st.duration_h = 4;
    DispatchTrace tr;
    tr.requested = {1.0, 0.0};
    tr.curtailed = {0.0, 0.0};
    tr.delivered = {8.0, 0.0};
    tr.stored = {0.0, 2.0, 4.0};
    const std::vector<double> p = {10.0, 30.0};  // pbar 20
    const std::vector<double> g = {4.0, 0.0};    // gbar 2
    LossHyperparams hp;
    hp.gamma = 1.0;
    hp.Gamma = 1.0;
    hp.omega = 1.0;
    hp.Omega = 2.0;
    hp.lambda = 1.0;
    const auto terms = unsupervised_loss(tr, p, g, farm, st, hp, 1, 1.0);
    EXPECT_DOUBLE_EQ(terms.peak, 0.5 * (0.5 * 0.5 + 1.0 * 1.5));
    EXPECT_DOUBLE_EQ(terms.base, 0.5 * (6.0 / 10.0) * 2.0);
    EXPECT_DOUBLE_EQ(terms.total, terms.cove + terms.peak + terms.base * terms.base);
}

TEST(Loss, GradientMatchesFiniteDifferences) {
    FarmSpec farm;
    StorageSpec st;
    DispatchTrace tr;
    tr.delivered = {120.0, 30.0, 90.0, 10.0};
    tr.requested.assign(4, 0.0);
    tr.curtailed.assign(4, 0.0);
    tr.stored = {0.0, 300.0, 500.0, 100.0, 250.0};
    const std::vector<double> p = {25.0, 60.0, 5.0, 40.0};
    const std::vector<double> g = {80.0, 40.0, 60.0, 20.0};
    const LossHyperparams hp;
    LossGradient lg;
    unsupervised_loss(tr, p, g, farm, st, hp, 20, 0.01, &lg);
    const double h = 1e-4;
    for (std::size_t t = 0; t < 4; ++t) {
        auto a = tr, b = tr;
        a.delivered[t] += h;
        b.delivered[t] -= h;
        const double fd = (unsupervised_loss(a, p, g, farm, st, hp, 20, 0.01).total -
                           unsupervised_loss(b, p, g, farm, st, hp, 20, 0.01).total) /
                          (2 * h);
        EXPECT_NEAR(lg.delivered[t], fd, 1e-6 * std::max(1.0, std::abs(fd)));
        a = tr;
        b = tr;
        a.stored[t + 1] += h;
        b.stored[t + 1] -= h;
        const double fs = (unsupervised_loss(a, p, g, farm, st, hp, 20, 0.01).total -
                           unsupervised_loss(b, p, g, farm, st, hp, 20, 0.01).total) /
                          (2 * h);
        EXPECT_NEAR(lg.stored_next[t], fs, 1e-6 * std::max(1.0, std::abs(fs)));
    }
}

TEST(AdaptiveFactor, Schedule) {
    LossHyperparams hp;
    EXPECT_DOUBLE_EQ(adaptive_factor(hp, 1), 1.0);
    EXPECT_DOUBLE_EQ(adaptive_factor(hp, hp.t_a + 1), 1.0);
    EXPECT_NEAR(adaptive_factor(hp, hp.t_a + 32), 0.5905, 1e-4);
    hp.lambda = 2.0;
    EXPECT_DOUBLE_EQ(adaptive_factor(hp, 3), 2.0);
}

TEST(WindowObjective, GradientCheckEndToEnd) {
    auto cfg = tiny_config();
    CoveModel m;
    m.params = nn::init_params(architecture(cfg), 7);
    m.price_scale = 30.0;
    const auto w = synth_frame().slice(500, 24);
    auto g = nn::NetParams::zeros(m.params.arch);
    window_objective(w, m, cfg, 12, &g);
    const auto report = nn::gradient_check(
        m.params,
        [&](const nn::NetParams& p) {
            CoveModel q = m;
            q.params = p;
            return window_objective(w, q, cfg, 12, nullptr);
        },
        g);
    EXPECT_LT(report.max_relative_error, 1e-4) << report.worst_tensor << "[" << report.worst_index << "]";
}

TEST(Train, SmokeAndDeterminism) {
    const auto cfg = tiny_config();
    auto [train, valid] = series::split_train_test(synth_frame(), 0.6);
    TrainState a, b;
    const auto ha = train_cove(train, valid, cfg, a);
    const auto hb = train_cove(train, valid, cfg, b);
    ASSERT_EQ(ha.size(), 5u);
    for (std::size_t e = 0; e < ha.size(); ++e) {
        EXPECT_TRUE(std::isfinite(ha[e].valid_cove));
        EXPECT_EQ(ha[e].valid_cove, hb[e].valid_cove);
    }
    EXPECT_EQ(a.model.params, b.model.params);
}

TEST(Train, CallbackCanStopEarly) {
    const auto cfg = tiny_config();
    auto [train, valid] = series::split_train_test(synth_frame(), 0.6);
    TrainState st;
    const auto h = train_cove(train, valid, cfg, st, false, [](const EpochMetrics& m, const TrainState&) {
        return m.epoch < 2;
    });
    EXPECT_EQ(h.size(), 3u);
    EXPECT_EQ(st.epochs_done, 2);
}

TEST(Train, ResumeMatchesStraightRun) {
    auto cfg = tiny_config();
    cfg.epochs = 3;
    auto [train, valid] = series::split_train_test(synth_frame(), 0.6);
    TrainState full;
    const auto straight = train_cove(train, valid, cfg, full);

    auto first = cfg;
    first.epochs = 2;
    TrainState part;
    train_cove(train, valid, first, part);
    const auto path = toy::temp_path("cove_resume.ckpt");
    nn::save_checkpoint(to_checkpoint(part, first), path);
    auto resumed = from_checkpoint(nn::load_checkpoint(path));
    const auto tail = train_cove(train, valid, cfg, resumed, true);
    ASSERT_EQ(tail.size(), 1u);
    EXPECT_EQ(tail[0].valid_cove, straight[3].valid_cove);
    EXPECT_EQ(resumed.model.params, full.model.params);
}

TEST(Checkpoint, WrongModelRejected) {
    nn::Checkpoint c;
    c.model = "nqf";
    EXPECT_THROW(from_checkpoint(c), ConfigError);
}

TEST(Config, InitialStoredBounds) {
    auto cfg = tiny_config();
    cfg.initial_stored = cfg.storage.capacity_mwh() + 1;
    EXPECT_THROW(cfg.validate(), ConfigError);
}
