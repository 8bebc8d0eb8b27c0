#include <gtest/gtest.h>

#include <fstream>

#include "hybridwind/config.hpp"
#include "hybridwind/errors.hpp"
#include "toy.hpp"

using namespace hybridwind;
using namespace hybridwind::config;

TEST(Config, UnknownKeyRejected) {
    RunConfig c;
    EXPECT_THROW(c.set("nqf.hiden", "8"), ConfigError);
}

TEST(Config, BadValueRejected) {
    RunConfig c;
    EXPECT_THROW(c.set("nqf.epochs", "many"), ConfigError);
    EXPECT_THROW(c.set("search.range.gamma", "3"), ConfigError);
    EXPECT_THROW(c.set("nqf.monotone_mode", "sometimes"), ConfigError);
}

TEST(Config, LoadParsesFile) {
    const auto path = toy::temp_path("run.cfg");
    std::ofstream(path) << "# comment\n"
                           "nqf.epochs = 5   # trailing\n"
                           "cove.hp.Gamma = 2.5\n"
                           "search.range.Lambda = 0.1, 0.2\n"
                           "search.technologies = CAES, Thermal\n"
                           "cove.storage.tech = Thermal\n"
                           "cove.storage.duration = 8\n"
                           "\n";
    auto c = RunConfig::load(path);
    c.finalize();
    EXPECT_EQ(c.nqf.epochs, 5);
    EXPECT_DOUBLE_EQ(c.cove.hp.Gamma, 2.5);
    EXPECT_DOUBLE_EQ(c.search.ranges.Lambda.first, 0.1);
    EXPECT_EQ(c.search.technologies, (std::vector<std::string>{"CAES", "Thermal"}));
    EXPECT_EQ(c.cove.storage.technology, "Thermal");
    EXPECT_DOUBLE_EQ(c.cove.storage.capacity_mwh(), 800.0);
}

TEST(Config, MalformedLineRejected) {
    const auto path = toy::temp_path("bad.cfg");
    std::ofstream(path) << "nqf.epochs 5\n";
    EXPECT_THROW(RunConfig::load(path), ConfigError);
}

TEST(Config, DataFallbacksDoNotOverrideModelKeys) {
    RunConfig c;
    c.set("data.seq_len", "48");
    c.set("data.batch_size", "3");
    c.set("cove.seq_len", "24");
    c.finalize();
    EXPECT_EQ(c.nqf.seq_len, 48u);
    EXPECT_EQ(c.cove.seq_len, 24u);
    EXPECT_EQ(c.nqf.batch_size, 3u);
    EXPECT_EQ(c.cove.batch_size, 3u);
}

TEST(Config, EmptyTechnologyListMeansAll) {
    RunConfig c;
    c.set("search.technologies", "");
    EXPECT_NO_THROW(c.finalize());
    EXPECT_TRUE(c.search.technologies.empty());
    c.set("search.technologies", "Antimatter");
    EXPECT_THROW(c.finalize(), ConfigError);
}

TEST(Config, MissingCatalogTripleRejected) {
    RunConfig c;
    c.set("cove.storage.tech", "Hydrogen");
    c.set("cove.storage.duration", "2");
    EXPECT_THROW(c.finalize(), ConfigError);
}

TEST(Config, ApplySeedOverridesEverySeed) {
    RunConfig c;
    c.apply_seed(42);
    EXPECT_EQ(c.data.seed, 42u);
    EXPECT_EQ(c.nqf.seed, 42u);
    EXPECT_EQ(c.cove.seed, 42u);
    EXPECT_EQ(c.search.seed, 42u);
    EXPECT_EQ(c.eval_seed, 42u);
}

TEST(Config, DumpRoundTrips) {
    RunConfig c;
    c.set("cove.lr", "0.0003");
    c.set("nqf.ff", "16,8");
    const auto path = toy::temp_path("dump.cfg");
    std::ofstream(path) << c.dump();
    auto back = RunConfig::load(path);
    EXPECT_EQ(back.dump(), c.dump());
    EXPECT_EQ(back.nqf.ff, (std::vector<std::size_t>{16, 8}));
}
