#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "hybridwind/cove.hpp"
#include "hybridwind/econ.hpp"
#include "hybridwind/nqf.hpp"
#include "hybridwind/series.hpp"
#include "hybridwind/specs.hpp"
#include "hybridwind/tuner.hpp"

namespace hybridwind::config {

struct DataConfig {
    std::optional<std::filesystem::path> path;  // CSV; synthetic data when absent
    series::ColumnSchema columns = series::ColumnSchema::defaults();
    series::GapPolicy gaps;
    double train_fraction = 0.8;
    std::optional<std::size_t> seq_len;     // fallback for nqf/cove windows
    std::optional<std::size_t> batch_size;  // fallback for nqf/cove batches
    std::uint64_t seed = 0;                 // synthetic data seed
    int synth_years = 3;
};

struct SearchConfig {
    std::size_t trials = 20;
    int probe_epochs = 10;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    tuner::HyperRanges ranges;
    std::vector<std::string> technologies;  // empty: every technology of the default grid
};

/// Flat `key = value` text; `#` starts a comment. Unknown keys are rejected.
struct RunConfig {
    DataConfig data;
    FarmSpec farm;
    std::optional<std::filesystem::path> catalog_path;  // placeholder catalog when absent
    std::string storage_tech = "CAES";
    double storage_rating = 100.0;
    double storage_duration = 24.0;
    nqf::NqfConfig nqf;
    cove::CoveConfig cove;
    SearchConfig search;
    std::optional<double> baseload_target;
    std::size_t eval_bins = 30;
    std::uint64_t eval_seed = 0;
    bool serial = false;
    std::filesystem::path out_dir = ".";
    std::set<std::string> assigned;  // keys set explicitly

    static RunConfig load(const std::filesystem::path& path);
    /// Applies one key; throws ConfigError for unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    /// Overrides every seed (data, models, search, eval).
    void apply_seed(std::uint64_t seed);
    /// Copies shared settings into the model configs and checks everything.
    void finalize();

    econ::StorageCatalog catalog() const;
    StorageSpec storage() const;  // resolved through the catalog

    static std::vector<std::string> known_keys();
    std::string dump() const;  // canonical `key = value` listing
};

}  // namespace hybridwind::config
