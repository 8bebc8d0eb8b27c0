#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hybridwind/specs.hpp"

namespace hybridwind::series {

using Timestamp = std::chrono::sys_seconds;

/// "Annual" metrics are computed over fixed 8760-hour blocks.
inline constexpr std::size_t kHoursPerYear = 8760;

enum class Channel { WindSpeed, Generation, Price, Load };

std::string_view channel_name(Channel c);

/// Aligned hourly multivariate series. Channels are optional, but every
/// present channel has the same length as `time`.
struct SeriesFrame {
    std::vector<Timestamp> time;
    std::optional<std::vector<double>> v;  // wind speed, m/s
    std::optional<std::vector<double>> g;  // generation, MW
    std::optional<std::vector<double>> p;  // price, $/MWh (may be negative)
    std::optional<std::vector<double>> u;  // load, MW

    std::size_t size() const { return time.size(); }
    bool has(Channel c) const;
    const std::vector<double>& channel(Channel c) const;  // throws SchemaError if absent
    std::optional<std::vector<double>>& slot(Channel c);
    const std::optional<std::vector<double>>& slot(Channel c) const;

    SeriesFrame slice(std::size_t begin, std::size_t count) const;

    /// Throws AlignmentError / DataQualityError on any invariant violation.
    void validate() const;

    bool operator==(const SeriesFrame&) const = default;
};

/// Maps channels to CSV column names. The timestamp column is always `time`.
struct ColumnSchema {
    std::map<Channel, std::string> columns;

    static ColumnSchema defaults();  // v, g, p, u
};

struct GapPolicy {
    std::size_t max_interpolated_run = 6;
    double max_missing_fraction = 0.05;
};

Timestamp parse_time(std::string_view text);
std::string format_time(Timestamp t);

SeriesFrame ingest_csv(const std::filesystem::path& path, const ColumnSchema& schema,
                       const GapPolicy& policy = {});
void write_csv(const SeriesFrame& frame, const std::filesystem::path& path,
               const ColumnSchema& schema = ColumnSchema::defaults());

/// Fills NaN runs in place: interior runs up to `max_run` are linearly
/// interpolated, edge runs up to `max_run` copy the nearest value. Returns
/// the number of filled cells. Longer runs throw DataQualityError.
std::size_t fill_gaps(std::vector<double>& values, std::size_t max_run, std::string_view label);

std::pair<SeriesFrame, SeriesFrame> split_train_test(const SeriesFrame& frame, double train_fraction);
SeriesFrame concat(const SeriesFrame& head, const SeriesFrame& tail);

/// Cyclically repeats `source` to `length` steps (used to stretch short
/// price/load records over a longer generation record).
std::vector<double> tile_cyclic(const std::vector<double>& source, std::size_t length);

struct SampleBatch {
    std::vector<std::size_t> starts;  // window start indices into the source frame
    std::size_t seq_len = 0;

    std::size_t size() const { return starts.size(); }
};

/// Tiles the frame with windows of `seq_len` steps (stride defaults to
/// seq_len, i.e. non-overlapping), shuffles them with `seed`, and groups them
/// into batches. The trailing partial batch is kept; the tail shorter than
/// seq_len is not windowed.
std::vector<SampleBatch> make_batches(const SeriesFrame& frame, std::size_t seq_len,
                                      std::size_t batch_size, std::uint64_t seed,
                                      std::size_t stride = 0, bool shuffle = true);

struct SynthOptions {
    double mean_wind = 8.0;
    double seasonal_amplitude = 1.5;
    double diurnal_amplitude = 1.2;
    double wind_noise = 2.2;       // stationary sd of the AR(1) wind anomaly
    double wind_persistence = 0.97;
    double power_noise = 0.04;     // sd of the multiplicative availability noise
    double cut_in = 3.0;
    double rated_speed = 12.0;
    double cut_out = 25.0;
    double price_base = 32.0;
    double price_diurnal = 9.0;
    double price_wind_slope = 14.0;  // merit-order price depression at full wind
    double price_noise = 3.0;
    double spike_probability = 0.004;
    double load_base_fraction = 1.6;  // of farm capacity
    int start_year = 2001;
};

/// Saturating cubic power curve, MW.
double power_curve(double wind_speed, const SynthOptions& opts, double capacity_mw);

SeriesFrame synth_dataset(int years, std::uint64_t seed, const FarmSpec& farm,
                          const SynthOptions& opts = {});

}  // namespace hybridwind::series
