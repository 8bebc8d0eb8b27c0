#include "hybridwind/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "hybridwind/errors.hpp"

namespace hybridwind::series {

namespace {

constexpr Channel kAllChannels[] = {Channel::WindSpeed, Channel::Generation, Channel::Price,
                                    Channel::Load};

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_row(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t pos = 0;
    while (true) {
        const auto comma = line.find(',', pos);
        cells.push_back(trim(line.substr(pos, comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return cells;
}

double parse_cell(std::string_view cell) {
    if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(value))
        return std::numeric_limits<double>::quiet_NaN();
    return value;
}

int parse_int(std::string_view s, std::string_view whole) {
    int value = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw AlignmentError("unparseable timestamp '" + std::string(whole) + "'");
    return value;
}

}  // namespace

std::string_view channel_name(Channel c) {
    switch (c) {
        case Channel::WindSpeed: return "v";
        case Channel::Generation: return "g";
        case Channel::Price: return "p";
        case Channel::Load: return "u";
    }
    return "?";
}

std::optional<std::vector<double>>& SeriesFrame::slot(Channel c) {
    switch (c) {
        case Channel::WindSpeed: return v;
        case Channel::Generation: return g;
        case Channel::Price: return p;
        case Channel::Load: return u;
    }
    throw SchemaError("unknown channel");
}

const std::optional<std::vector<double>>& SeriesFrame::slot(Channel c) const {
    return const_cast<SeriesFrame*>(this)->slot(c);
}

bool SeriesFrame::has(Channel c) const { return slot(c).has_value(); }

const std::vector<double>& SeriesFrame::channel(Channel c) const {
    const auto& s = slot(c);
    if (!s) throw SchemaError("frame has no '" + std::string(channel_name(c)) + "' channel");
    return *s;
}

SeriesFrame SeriesFrame::slice(std::size_t begin, std::size_t count) const {
    if (begin + count > size()) throw SizeError("slice exceeds frame length");
    SeriesFrame out;
    const auto b = static_cast<std::ptrdiff_t>(begin);
    const auto e = static_cast<std::ptrdiff_t>(begin + count);
    out.time.assign(time.begin() + b, time.begin() + e);
    for (Channel c : kAllChannels) {
        if (const auto& src = slot(c)) out.slot(c).emplace(src->begin() + b, src->begin() + e);
    }
    return out;
}

void SeriesFrame::validate() const {
    if (time.empty()) throw SizeError("frame is empty");
    for (Channel c : kAllChannels) {
        const auto& s = slot(c);
        if (!s) continue;
        if (s->size() != time.size())
            throw AlignmentError("channel '" + std::string(channel_name(c)) + "' length mismatch");
        for (std::size_t i = 0; i < s->size(); ++i) {
            const double x = (*s)[i];
            if (!std::isfinite(x))
                throw DataQualityError("non-finite value in '" + std::string(channel_name(c)) +
                                       "' at row " + std::to_string(i));
            if (c != Channel::Price && x < 0.0)
                throw DataQualityError("negative value in '" + std::string(channel_name(c)) +
                                       "' at row " + std::to_string(i));
        }
    }
    for (std::size_t i = 1; i < time.size(); ++i) {
        if (time[i] - time[i - 1] != std::chrono::hours{1})
            throw AlignmentError("timestamps not strictly hourly at row " + std::to_string(i) + " (" +
                                 format_time(time[i - 1]) + " -> " + format_time(time[i]) + ")");
    }
}

ColumnSchema ColumnSchema::defaults() {
    ColumnSchema s;
    for (Channel c : kAllChannels) s.columns[c] = std::string(channel_name(c));
    return s;
}

Timestamp parse_time(std::string_view text) {
    const auto t = trim(text);
    // YYYY-MM-DD[T ]HH:MM[:SS][Z]
    if (t.size() < 16 || t[4] != '-' || t[7] != '-' || (t[10] != 'T' && t[10] != ' ') || t[13] != ':')
        throw AlignmentError("unparseable timestamp '" + std::string(t) + "'");
    const int y = parse_int(t.substr(0, 4), t);
    const int mo = parse_int(t.substr(5, 2), t);
    const int d = parse_int(t.substr(8, 2), t);
    const int h = parse_int(t.substr(11, 2), t);
    const int mi = parse_int(t.substr(14, 2), t);
    int sec = 0;
    auto rest = t.substr(16);
    if (!rest.empty() && rest.front() == ':') {
        if (rest.size() < 3) throw AlignmentError("unparseable timestamp '" + std::string(t) + "'");
        sec = parse_int(rest.substr(1, 2), t);
        rest = rest.substr(3);
    }
    if (!(rest.empty() || rest == "Z" || rest == "+00:00"))
        throw AlignmentError("unsupported timestamp suffix in '" + std::string(t) + "'");
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(mo)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok() || h > 23 || mi > 59 || sec > 59)
        throw AlignmentError("invalid calendar timestamp '" + std::string(t) + "'");
    return std::chrono::sys_days{ymd} + std::chrono::hours{h} + std::chrono::minutes{mi} +
           std::chrono::seconds{sec};
}

std::string format_time(Timestamp t) {
    const auto day = std::chrono::floor<std::chrono::days>(t);
    const std::chrono::year_month_day ymd{day};
    const std::chrono::hh_mm_ss hms{t - day};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()));
    return buf;
}

std::size_t fill_gaps(std::vector<double>& values, std::size_t max_run, std::string_view label) {
    std::size_t filled = 0;
    const std::size_t n = values.size();
    std::size_t i = 0;
    while (i < n) {
        if (!std::isnan(values[i])) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && std::isnan(values[j])) ++j;
        const std::size_t run = j - i;
        if (run > max_run)
            throw DataQualityError("gap of " + std::to_string(run) + " hours in '" + std::string(label) +
                                   "' starting at row " + std::to_string(i) + " exceeds " +
                                   std::to_string(max_run));
        if (i == 0 && j == n) throw DataQualityError("channel '" + std::string(label) + "' is empty");
        if (i == 0) {
            std::fill(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(j), values[j]);
        } else if (j == n) {
            std::fill(values.begin() + static_cast<std::ptrdiff_t>(i), values.end(), values[i - 1]);
        } else {
            const double lo = values[i - 1];
            const double hi = values[j];
            const double span = static_cast<double>(run + 1);
            for (std::size_t k = i; k < j; ++k)
                values[k] = lo + (hi - lo) * static_cast<double>(k - i + 1) / span;
        }
        filled += run;
        i = j;
    }
    return filled;
}

SeriesFrame ingest_csv(const std::filesystem::path& path, const ColumnSchema& schema, const GapPolicy& policy) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open data file '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("data file '" + path.string() + "' has no header");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    const auto header = split_row(line);
    auto find_column = [&](std::string_view name) -> std::size_t {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        throw SchemaError("column '" + std::string(name) + "' missing from '" + path.string() + "'");
    };
    const std::size_t time_col = find_column("time");
    std::vector<std::pair<Channel, std::size_t>> mapped;
    for (const auto& [channel, name] : schema.columns) mapped.emplace_back(channel, find_column(name));

    SeriesFrame frame;
    std::vector<std::vector<double>> data(mapped.size());
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (trim(line).empty()) continue;
        const auto cells = split_row(line);
        if (cells.size() < header.size())
            throw SchemaError("row " + std::to_string(row) + " has " + std::to_string(cells.size()) +
                              " cells, expected " + std::to_string(header.size()));
        frame.time.push_back(parse_time(cells[time_col]));
        for (std::size_t k = 0; k < mapped.size(); ++k) data[k].push_back(parse_cell(cells[mapped[k].second]));
    }
    if (frame.time.empty()) throw SizeError("data file '" + path.string() + "' has no rows");

    for (std::size_t i = 1; i < frame.time.size(); ++i) {
        if (frame.time[i] <= frame.time[i - 1])
            throw AlignmentError("timestamps not monotone at data row " + std::to_string(i + 2));
    }
    for (std::size_t k = 0; k < mapped.size(); ++k) {
        auto& values = data[k];
        const auto missing = static_cast<double>(std::count_if(values.begin(), values.end(),
                                                               [](double x) { return std::isnan(x); }));
        const auto label = channel_name(mapped[k].first);
        if (missing > policy.max_missing_fraction * static_cast<double>(values.size()))
            throw DataQualityError("channel '" + std::string(label) + "' has " +
                                   std::to_string(static_cast<std::size_t>(missing)) + " missing cells (> " +
                                   std::to_string(policy.max_missing_fraction * 100.0) + "%)");
        fill_gaps(values, policy.max_interpolated_run, label);
        frame.slot(mapped[k].first) = std::move(values);
    }
    frame.validate();
    return frame;
}

void write_csv(const SeriesFrame& frame, const std::filesystem::path& path, const ColumnSchema& schema) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    std::vector<std::pair<const std::vector<double>*, std::string>> cols;
    for (const auto& [channel, name] : schema.columns) {
        if (frame.has(channel)) cols.emplace_back(&frame.channel(channel), name);
    }
    out << "time";
    for (const auto& c : cols) out << ',' << c.second;
    out << '\n';
    char buf[40];
    for (std::size_t i = 0; i < frame.size(); ++i) {
        out << format_time(frame.time[i]);
        for (const auto& c : cols) {
            std::snprintf(buf, sizeof buf, "%.17g", (*c.first)[i]);
            out << ',' << buf;
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::pair<SeriesFrame, SeriesFrame> split_train_test(const SeriesFrame& frame, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ContractError("train_fraction must lie in (0, 1)");
    const std::size_t n = frame.size();
    if (n < 2) throw SizeError("cannot split a frame shorter than 2 steps");
    auto cut = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
    cut = std::clamp<std::size_t>(cut, 1, n - 1);
    return {frame.slice(0, cut), frame.slice(cut, n - cut)};
}

SeriesFrame concat(const SeriesFrame& head, const SeriesFrame& tail) {
    SeriesFrame out = head;
    out.time.insert(out.time.end(), tail.time.begin(), tail.time.end());
    for (Channel c : kAllChannels) {
        const auto& a = head.slot(c);
        const auto& b = tail.slot(c);
        if (a.has_value() != b.has_value())
            throw SchemaError("cannot concatenate frames with different channels");
        if (a) out.slot(c)->insert(out.slot(c)->end(), b->begin(), b->end());
    }
    return out;
}

std::vector<double> tile_cyclic(const std::vector<double>& source, std::size_t length) {
    if (source.empty()) throw SizeError("cannot tile an empty series");
    std::vector<double> out(length);
    for (std::size_t i = 0; i < length; ++i) out[i] = source[i % source.size()];
    return out;
}

std::vector<SampleBatch> make_batches(const SeriesFrame& frame, std::size_t seq_len, std::size_t batch_size,
                                      std::uint64_t seed, std::size_t stride, bool shuffle) {
    if (seq_len == 0 || batch_size == 0) throw ContractError("seq_len and batch_size must be positive");
    if (seq_len > frame.size())
        throw SizeError("seq_len " + std::to_string(seq_len) + " exceeds frame length " +
                        std::to_string(frame.size()));
    if (stride == 0) stride = seq_len;
    std::vector<std::size_t> starts;
    for (std::size_t s = 0; s + seq_len <= frame.size(); s += stride) starts.push_back(s);
    if (shuffle) {
        std::mt19937_64 rng(seed);
        std::shuffle(starts.begin(), starts.end(), rng);
    }
    std::vector<SampleBatch> batches;
    for (std::size_t i = 0; i < starts.size(); i += batch_size) {
        SampleBatch b;
        b.seq_len = seq_len;
        const auto end = std::min(starts.size(), i + batch_size);
        b.starts.assign(starts.begin() + static_cast<std::ptrdiff_t>(i), starts.begin() + static_cast<std::ptrdiff_t>(end));
        batches.push_back(std::move(b));
    }
    return batches;
}

double power_curve(double wind_speed, const SynthOptions& opts, double capacity_mw) {
    if (wind_speed < opts.cut_in || wind_speed >= opts.cut_out) return 0.0;
    if (wind_speed >= opts.rated_speed) return capacity_mw;
    const double lo = opts.cut_in * opts.cut_in * opts.cut_in;
    const double hi = opts.rated_speed * opts.rated_speed * opts.rated_speed;
    return capacity_mw * (wind_speed * wind_speed * wind_speed - lo) / (hi - lo);
}

SeriesFrame synth_dataset(int years, std::uint64_t seed, const FarmSpec& farm, const SynthOptions& opts) {
    if (years < 1) throw ContractError("years must be >= 1");
    farm.validate();
    const std::size_t n = static_cast<std::size_t>(years) * kHoursPerYear;
    constexpr double two_pi = 2.0 * std::numbers::pi;

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    SeriesFrame f;
    f.time.resize(n);
    std::vector<double> v(n), g(n), p(n), u(n);
    const auto origin = std::chrono::sys_days{std::chrono::year{opts.start_year} / 1 / 1};
    const double innovation = std::sqrt(1.0 - opts.wind_persistence * opts.wind_persistence) * opts.wind_noise;
    double anomaly = opts.wind_noise * normal(rng);
    const double cap = farm.capacity_mw;

    for (std::size_t t = 0; t < n; ++t) {
        f.time[t] = origin + std::chrono::hours{static_cast<long>(t)};
        const double hour = static_cast<double>(t % 24);
        const double yearfrac = static_cast<double>(t % kHoursPerYear) / static_cast<double>(kHoursPerYear);

        // Windier in winter and at night.
        const double z_wind = normal(rng);
        const double z_power = normal(rng);
        const double z_price = normal(rng);
        const double spike_draw = uniform(rng);
        const double spike_size = uniform(rng);
        const double z_load = normal(rng);

        anomaly = opts.wind_persistence * anomaly + innovation * z_wind;
        const double seasonal = opts.seasonal_amplitude * std::cos(two_pi * yearfrac);
        const double diurnal = opts.diurnal_amplitude * std::cos(two_pi * (hour - 2.0) / 24.0);
        v[t] = std::max(0.0, opts.mean_wind + seasonal + diurnal + anomaly);

        const double availability = std::clamp(1.0 - std::abs(opts.power_noise * z_power), 0.0, 1.0);
        g[t] = std::clamp(power_curve(v[t], opts, cap) * availability, 0.0, cap);

        double price = opts.price_base + opts.price_diurnal * std::cos(two_pi * (hour - 18.0) / 24.0) +
                       0.2 * opts.price_base * std::cos(two_pi * (yearfrac - 0.6)) -
                       opts.price_wind_slope * (g[t] / cap) + opts.price_noise * z_price;
        if (spike_draw < opts.spike_probability) price += 40.0 + 200.0 * spike_size;
        p[t] = price;

        const double load_shape = opts.load_base_fraction + 0.25 * std::cos(two_pi * (hour - 17.0) / 24.0) +
                                  0.2 * std::cos(two_pi * (yearfrac - 0.55)) + 0.03 * z_load;
        u[t] = cap * std::max(0.1, load_shape);
    }
    f.v = std::move(v);
    f.g = std::move(g);
    f.p = std::move(p);
    f.u = std::move(u);
    return f;
}

}  // namespace hybridwind::series
