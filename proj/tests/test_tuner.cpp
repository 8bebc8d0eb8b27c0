#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "hybridwind/errors.hpp"
#include "hybridwind/tuner.hpp"
#include "toy.hpp"

using namespace hybridwind;
using namespace hybridwind::tuner;

namespace {

const series::SeriesFrame& synth_frame() {
    static const auto f = [] {
        FarmSpec farm;
        return series::synth_dataset(1, 41, farm).slice(0, 24 * 60);
    }();
    return f;
}

cove::CoveConfig tiny_cove() {
    cove::CoveConfig c;
    c.hidden = 4;
    c.ff = {6};
    c.seq_len = 48;
    c.batch_size = 8;
    c.epochs = 3;
    c.learning_rate = 1e-3;
    c.storage = econ::placeholder_catalog().lookup("CAES", 100, 4);
    c.seed = 2;
    return c;
}

}  // namespace

TEST(StorageSearch, DefaultGridHas62Candidates) {
    const auto space = StorageSearchSpace::defaults();
    EXPECT_EQ(space.size(), 62u);
    const auto caes = space.restricted_to({"CAES"});
    EXPECT_EQ(caes.size(), 8u);
    for (const auto& c : caes.candidates) EXPECT_EQ(c.technology, "CAES");
    for (const auto& c : space.candidates) EXPECT_TRUE(econ::placeholder_catalog().contains(c.technology, c.rating_mw, c.duration_h));
}

TEST(StorageSearch, SingleCandidate) {
    StorageSearchSpace space;
    space.candidates = {{"CAES", 100, 24}};
    const auto r = storage_grid_search(synth_frame(), FarmSpec{}, econ::placeholder_catalog(), space, NAN);
    ASSERT_EQ(r.size(), 1u);
    EXPECT_EQ(r[0].rank, 1u);
    EXPECT_TRUE(std::isfinite(r[0].average_cove));
    EXPECT_EQ(r[0].cove_std, 0.0);  // no complete year
}

TEST(StorageSearch, DoubledCapexRanksSecond) {
    const econ::StorageCatalog cat({{"Cheap", 100, 4, 0.8, 1e8, 1e6}, {"Dear", 100, 4, 0.8, 2e8, 1e6}});
    StorageSearchSpace space;
    space.candidates = {{"Dear", 100, 4}, {"Cheap", 100, 4}};
    const auto r = storage_grid_search(synth_frame(), FarmSpec{}, cat, space, NAN);
    ASSERT_EQ(r.size(), 2u);
    EXPECT_EQ(r[0].storage.technology, "Cheap");
    EXPECT_EQ(r[1].storage.technology, "Dear");
    EXPECT_GT(r[1].average_cove, r[0].average_cove);
}

TEST(StorageSearch, CatalogMissFailsFirst) {
    StorageSearchSpace space;
    space.candidates = {{"CAES", 100, 24}, {"CAES", 100, 3}};
    EXPECT_THROW(storage_grid_search(synth_frame(), FarmSpec{}, econ::placeholder_catalog(), space, NAN), ConfigError);
    EXPECT_THROW(storage_grid_search(synth_frame(), FarmSpec{}, econ::placeholder_catalog(), StorageSearchSpace{}, NAN),
                 ConfigError);
}

TEST(StorageSearch, RankingCsvHasHeaderAnd62Rows) {
    const auto r = storage_grid_search(synth_frame().slice(0, 24 * 14), FarmSpec{}, econ::placeholder_catalog(),
                                       StorageSearchSpace::defaults(), NAN);
    const auto path = toy::temp_path("ranking.csv");
    write_storage_ranking(r, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "rank,technology,rating_MW,duration_h,avg_cove,cove_std,lcoe,value_factor");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 62);
    for (std::size_t i = 1; i < r.size(); ++i) EXPECT_LE(r[i - 1].average_cove, r[i].average_cove);
}

TEST(Sampling, StrictlyInsideRanges) {
    const HyperRanges ranges;
    for (std::uint64_t s = 0; s < 2000; ++s) {
        const auto hp = sample_hyperparams(ranges, s);
        ASSERT_TRUE(ranges.contains(hp));
    }
    EXPECT_EQ(sample_hyperparams(ranges, 9).Gamma, sample_hyperparams(ranges, 9).Gamma);
}

TEST(Sampling, BadRangeRejected) {
    HyperRanges r;
    r.Omega = {2.0, 2.0};
    EXPECT_THROW(r.validate(), ConfigError);
}

TEST(HyperSearch, SingleTrialRunsToCompletion) {
    auto [train, valid] = series::split_train_test(synth_frame(), 0.6);
    HyperSearchOptions o;
    o.trials = 1;
    o.probe_epochs = 1;
    o.seed = 5;
    const auto res = cove_hyper_search(train, valid, tiny_cove(), HyperRanges{}, o);
    ASSERT_EQ(res.records.size(), 1u);
    const auto& r = res.records[0];
    EXPECT_FALSE(r.terminated_early);
    EXPECT_EQ(r.epochs_run(), 3);
    EXPECT_TRUE(std::isinf(r.incumbent_at_probe));
    ASSERT_TRUE(res.best.has_value());
    EXPECT_TRUE(r.best);
    EXPECT_EQ(r.seed, 5u);
}

TEST(HyperSearch, IncumbentInvariantsAndLogResume) {
    auto [train, valid] = series::split_train_test(synth_frame(), 0.6);
    const auto cfg = tiny_cove();
    HyperSearchOptions o;
    o.trials = 4;
    o.probe_epochs = 1;
    o.seed = 100;
    o.log_path = toy::temp_path("trials.csv");
    o.best_checkpoint = toy::temp_path("best.ckpt");
    std::filesystem::remove(*o.log_path);
    const auto res = cove_hyper_search(train, valid, cfg, HyperRanges{}, o);
    ASSERT_EQ(res.records.size(), 4u);

    double incumbent = std::numeric_limits<double>::infinity();
    double best = std::numeric_limits<double>::infinity();
    for (const auto& r : res.records) {
        EXPECT_EQ(r.seed, o.seed + r.trial);
        EXPECT_TRUE(HyperRanges{}.contains(r.hp));
        EXPECT_EQ(r.incumbent_at_probe, incumbent);
        if (r.terminated_early) {
            EXPECT_EQ(r.epochs_run(), 1);
            EXPECT_GE(r.cove_by_epoch[1], incumbent);
        } else {
            EXPECT_EQ(r.epochs_run(), cfg.epochs);
            EXPECT_LT(r.cove_by_epoch[1], incumbent);
            best = std::min(best, r.best_cove);
        }
        EXPECT_LE(r.incumbent_after, incumbent);
        incumbent = r.incumbent_after;
    }
    ASSERT_TRUE(res.best.has_value());
    EXPECT_EQ(res.records[*res.best].best_cove, best);
    EXPECT_TRUE(std::filesystem::exists(*o.best_checkpoint));

    // Every row parses back exactly.
    const auto logged = read_trial_log(*o.log_path);
    ASSERT_EQ(logged.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(format_trial(logged[i]), format_trial(res.records[i]));

    // A rerun over a complete log computes nothing new and agrees.
    const auto again = cove_hyper_search(train, valid, cfg, HyperRanges{}, o);
    ASSERT_EQ(again.records.size(), 4u);
    EXPECT_EQ(again.best, res.best);
    EXPECT_EQ(read_trial_log(*o.log_path).size(), 4u);

    // Extending to six trials resumes with the restored incumbent.
    auto more = o;
    more.trials = 6;
    const auto ext = cove_hyper_search(train, valid, cfg, HyperRanges{}, more);
    ASSERT_EQ(ext.records.size(), 6u);
    EXPECT_EQ(ext.records[4].incumbent_at_probe, res.records[3].incumbent_after);
}

TEST(HyperSearch, ParallelMatchesSerialFirstTrial) {
    auto [train, valid] = series::split_train_test(synth_frame(), 0.6);
    HyperSearchOptions o;
    o.trials = 2;
    o.probe_epochs = 1;
    o.seed = 7;
    o.serial = false;
    o.threads = 2;
    const auto res = cove_hyper_search(train, valid, tiny_cove(), HyperRanges{}, o);
    ASSERT_EQ(res.records.size(), 2u);
    for (const auto& r : res.records) EXPECT_FALSE(r.failed) << r.error;
}

TEST(TrialLog, ParseRejectsShortRow) {
    EXPECT_THROW(parse_trial("1,2,3"), SchemaError);
    EXPECT_EQ(trial_log_header(),
              "trial,seed,gamma,Gamma,omega,Omega,lambda,Lambda,t_a,incumbent_at_probe,incumbent_after,"
              "terminated_early,failed,epochs_run,best_epoch,best_cove,cove_by_epoch,error");
}
