#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hybridwind/cove.hpp"
#include "hybridwind/econ.hpp"
#include "hybridwind/series.hpp"
#include "hybridwind/specs.hpp"

namespace hybridwind::tuner {

struct StorageCandidate {
    std::string technology;
    double rating_mw = 0.0;
    double duration_h = 0.0;

    bool operator==(const StorageCandidate&) const = default;
};

struct StorageSearchSpace {
    std::vector<StorageCandidate> candidates;

    /// Six technologies, ratings {100, 1000} MW, technology-specific
    /// durations: 62 candidates.
    static StorageSearchSpace defaults();
    /// Keeps only the listed technologies (order of the default grid).
    StorageSearchSpace restricted_to(const std::vector<std::string>& technologies) const;
    std::size_t size() const { return candidates.size(); }
};

struct StorageResult {
    std::size_t rank = 0;  // 1-based
    StorageSpec storage;
    double average_cove = 0.0;  // average annual COVE, raw units
    double cove_std = 0.0;      // sample std over full years
    double lcoe = 0.0;
    double value_factor = 0.0;
};

/// Baseload simulation of every candidate over `frame`; results ascend by
/// average annual COVE (stable, ties keep grid order). A NaN target means
/// the frame's mean generation.
std::vector<StorageResult> storage_grid_search(const series::SeriesFrame& frame, const FarmSpec& farm,
                                               const econ::StorageCatalog& catalog,
                                               const StorageSearchSpace& space, double baseload_target);

/// rank, technology, rating_MW, duration_h, avg_cove, cove_std, lcoe, value_factor.
/// COVE and LCOE columns use the display scale.
void write_storage_ranking(const std::vector<StorageResult>& results, const std::filesystem::path& path);

/// Open intervals for the searched loss hyperparameters; lambda and t_a are
/// held fixed.
struct HyperRanges {
    std::pair<double, double> gamma{0.0, 3.0};
    std::pair<double, double> Gamma{0.0, 3.0};
    std::pair<double, double> omega{0.0, 5.0};
    std::pair<double, double> Omega{0.0, 5.0};
    std::pair<double, double> Lambda{0.125, 0.25};
    double lambda = 1.0;
    int t_a = 8;

    void validate() const;
    bool contains(const cove::LossHyperparams& hp) const;  // strict interior
};

/// Uniform draw strictly inside every range.
cove::LossHyperparams sample_hyperparams(const HyperRanges& ranges, std::uint64_t seed);

struct TrialRecord {
    std::size_t trial = 0;
    std::uint64_t seed = 0;
    cove::LossHyperparams hp;
    std::vector<double> cove_by_epoch;  // validation COVE, index = epoch (0 untrained)
    double incumbent_at_probe = 0.0;    // +inf when no earlier trial finished
    double incumbent_after = 0.0;
    double best_cove = 0.0;  // min validation COVE over epochs >= probe (NaN if failed)
    int best_epoch = 0;
    bool terminated_early = false;
    bool failed = false;
    bool best = false;
    std::string error;

    int epochs_run() const { return cove_by_epoch.empty() ? 0 : static_cast<int>(cove_by_epoch.size()) - 1; }
};

struct HyperSearchOptions {
    std::size_t trials = 20;
    int probe_epochs = 10;
    std::uint64_t seed = 0;
    bool serial = true;
    std::size_t threads = 0;  // 0: hardware concurrency (parallel mode only)
    std::optional<std::filesystem::path> log_path;         // append-only trial log, resumable
    std::optional<std::filesystem::path> best_checkpoint;  // written whenever the incumbent trial improves
};

struct HyperSearchResult {
    std::vector<TrialRecord> records;  // sorted by trial index
    std::optional<std::size_t> best;   // index into records; empty if every trial failed
};

/// Random search over the loss hyperparameters. A trial that is not strictly
/// better than the incumbent at the probe epoch stops there; otherwise it
/// trains to cfg.epochs and lowers the incumbent at every epoch end.
HyperSearchResult cove_hyper_search(const series::SeriesFrame& train, const series::SeriesFrame& valid,
                                    const cove::CoveConfig& cfg, const HyperRanges& ranges,
                                    const HyperSearchOptions& opts);

std::string trial_log_header();
std::string format_trial(const TrialRecord& r);
TrialRecord parse_trial(const std::string& line);
std::vector<TrialRecord> read_trial_log(const std::filesystem::path& path);
/// Full table with the best flag; rewritten at the end of a search.
void write_trial_summary(const HyperSearchResult& result, const std::filesystem::path& path);

}  // namespace hybridwind::tuner
