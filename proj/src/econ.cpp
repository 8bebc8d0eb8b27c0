#include "hybridwind/econ.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "hybridwind/errors.hpp"
#include "hybridwind/series.hpp"

namespace hybridwind {

void FarmSpec::validate() const {
    if (!(capacity_mw > 0.0)) throw ConfigError("farm capacity must be > 0");
    if (capex_usd < 0.0 || opex_usd_per_yr < 0.0) throw ConfigError("farm CAPEX/OPEX must be >= 0");
    if (!(fixed_charge_rate > 0.0 && fixed_charge_rate < 1.0))
        throw ConfigError("fixed charge rate must lie in (0, 1)");
}

void StorageSpec::validate() const {
    if (!(rating_mw > 0.0)) throw ConfigError("storage rating must be > 0");
    if (!(duration_h > 0.0)) throw ConfigError("storage duration must be > 0");
    if (!(round_trip_efficiency > 0.0 && round_trip_efficiency <= 1.0))
        throw ConfigError("round-trip efficiency must lie in (0, 1]");
    if (capex_usd < 0.0 || opex_usd_per_yr < 0.0) throw ConfigError("storage CAPEX/OPEX must be >= 0");
}

namespace econ {

namespace {

double fixed_costs(const FarmSpec& farm, const StorageSpec& storage, double annualization) {
    return annualization *
           (farm.annual_fixed_cost() + storage.annual_fixed_cost(farm.fixed_charge_rate));
}

}  // namespace

double lcoe(std::span<const double> delivered, const FarmSpec& farm, const StorageSpec& storage,
            double annualization) {
    const double energy = std::accumulate(delivered.begin(), delivered.end(), 0.0);
    if (!(energy > 0.0)) throw UndefinedMetricError("LCOE undefined: total dispatched energy is zero");
    return fixed_costs(farm, storage, annualization) / energy;
}

double cove(std::span<const double> delivered, std::span<const double> price, const FarmSpec& farm,
            const StorageSpec& storage, double annualization) {
    if (delivered.size() != price.size()) throw SizeError("COVE: dispatch and price lengths differ");
    double valued = 0.0;
    for (std::size_t i = 0; i < delivered.size(); ++i) valued += delivered[i] * price[i];
    if (!(valued > 0.0))
        throw UndefinedMetricError("COVE undefined: valued energy sum(r'*p) is not positive");
    return fixed_costs(farm, storage, annualization) / valued;
}

double value_factor(std::span<const double> dispatch, std::span<const double> price) {
    if (dispatch.size() != price.size() || dispatch.empty())
        throw SizeError("value factor: series must be non-empty and of equal length");
    double weighted = 0.0;
    double total = 0.0;
    double price_sum = 0.0;
    for (std::size_t i = 0; i < dispatch.size(); ++i) {
        weighted += dispatch[i] * price[i];
        total += dispatch[i];
        price_sum += price[i];
    }
    const double mean_price = price_sum / static_cast<double>(price.size());
    if (!(total > 0.0)) throw UndefinedMetricError("value factor undefined: zero dispatch");
    if (mean_price == 0.0) throw UndefinedMetricError("value factor undefined: zero mean price");
    return weighted / (total * mean_price);
}

double curtailment_step(double generated, double delivered, double stored_before, double stored_after) {
    const double charge = std::max(stored_after - stored_before, 0.0);
    return std::max(generated - delivered - charge, 0.0);
}

std::vector<AnnualMetrics> annual_report(const DispatchTrace& trace, std::span<const double> generation,
                                         std::span<const double> price, const FarmSpec& farm,
                                         const StorageSpec& storage) {
    const std::size_t n = trace.size();
    if (generation.size() != n || price.size() != n || trace.stored.size() != n + 1)
        throw SizeError("annual report: trace, generation and price are not aligned");
    const double capacity = storage.capacity_mwh();
    std::vector<AnnualMetrics> out;
    for (std::size_t begin = 0, year = 0; begin < n; begin += series::kHoursPerYear, ++year) {
        const std::size_t len = std::min(series::kHoursPerYear, n - begin);
        AnnualMetrics m;
        m.year = year;
        m.steps = len;
        m.partial = len < series::kHoursPerYear;
        double stored_sum = 0.0;
        for (std::size_t t = begin; t < begin + len; ++t) {
            m.aep_mwh += trace.delivered[t];
            m.curtailment_mwh +=
                curtailment_step(generation[t], trace.delivered[t], trace.stored[t], trace.stored[t + 1]);
            stored_sum += trace.stored[t + 1];
        }
        m.storage_utilization = stored_sum / static_cast<double>(len) / capacity;
        const auto delivered = std::span(trace.delivered).subspan(begin, len);
        const auto prices = price.subspan(begin, len);
        m.value_factor = value_factor(delivered, prices);
        m.cove = cove(delivered, prices, farm, storage,
                      static_cast<double>(len) / static_cast<double>(series::kHoursPerYear));
        out.push_back(m);
    }
    return out;
}

double average_annual_cove(const std::vector<AnnualMetrics>& years) {
    double sum = 0.0;
    std::size_t count = 0;
    for (const auto& y : years) {
        if (!y.partial) {
            sum += y.cove;
            ++count;
        }
    }
    if (count > 0) return sum / static_cast<double>(count);
    if (years.empty()) throw UndefinedMetricError("no years to average");
    for (const auto& y : years) sum += y.cove;
    return sum / static_cast<double>(years.size());
}

MeanStd mean_std(std::span<const double> values) {
    if (values.empty()) throw SizeError("mean_std of empty series");
    MeanStd r;
    r.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double x : values) ss += (x - r.mean) * (x - r.mean);
        r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return r;
}

StorageCatalog::StorageCatalog(std::vector<Entry> entries) : entries_(std::move(entries)) {}

bool StorageCatalog::contains(const std::string& technology, double rating_mw, double duration_h) const {
    return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) {
        return e.technology == technology && e.rating_mw == rating_mw && e.duration_h == duration_h;
    });
}

StorageSpec StorageCatalog::lookup(const std::string& technology, double rating_mw, double duration_h) const {
    for (const auto& e : entries_) {
        if (e.technology == technology && e.rating_mw == rating_mw && e.duration_h == duration_h) {
            StorageSpec s;
            s.technology = e.technology;
            s.rating_mw = e.rating_mw;
            s.duration_h = e.duration_h;
            s.round_trip_efficiency = e.rte;
            s.capex_usd = e.capex_usd;
            s.opex_usd_per_yr = e.opex_usd_per_yr;
            s.validate();
            return s;
        }
    }
    std::ostringstream msg;
    msg << "storage catalog has no entry for (" << technology << ", " << rating_mw << " MW, " << duration_h
        << " h)";
    throw ConfigError(msg.str());
}

StorageCatalog StorageCatalog::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open storage catalog '" + path.string() + "'");
    std::vector<Entry> entries;
    std::string line;
    bool header_seen = false;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            if (line.rfind("technology,", 0) != 0)
                throw SchemaError("storage catalog header must start with 'technology,'");
            header_seen = true;
            continue;
        }
        std::istringstream ss(line);
        Entry e;
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 6) throw SchemaError("storage catalog row " + std::to_string(row) + " needs 6 fields");
        try {
            e.technology = fields[0];
            e.rating_mw = std::stod(fields[1]);
            e.duration_h = std::stod(fields[2]);
            e.rte = std::stod(fields[3]);
            e.capex_usd = std::stod(fields[4]);
            e.opex_usd_per_yr = std::stod(fields[5]);
        } catch (const std::exception&) {
            throw SchemaError("storage catalog row " + std::to_string(row) + " is not numeric");
        }
        entries.push_back(std::move(e));
    }
    if (entries.empty()) throw SchemaError("storage catalog '" + path.string() + "' is empty");
    return StorageCatalog(std::move(entries));
}

void StorageCatalog::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << "# PLACEHOLDER storage costs: plausible orderings only, not vendor data.\n"
           "# capex_usd = power_cost*rating + energy_cost*capacity; opex_usd_per_yr per rating.\n";
    out << "technology,rating_MW,duration_h,rte,capex_usd,opex_usd_per_yr\n";
    char buf[256];
    for (const auto& e : entries_) {
        std::snprintf(buf, sizeof buf, "%s,%.17g,%.17g,%.17g,%.17g,%.17g\n", e.technology.c_str(), e.rating_mw,
                      e.duration_h, e.rte, e.capex_usd, e.opex_usd_per_yr);
        out << buf;
    }
}

StorageCatalog placeholder_catalog() {
    struct Tech {
        const char* name;
        double rte;
        double power_usd_per_kw;
        double energy_usd_per_kwh;
        double opex_usd_per_kw_yr;
        std::vector<double> durations;
    };
    // Orders of magnitude only. CAES and hydrogen have cheap energy and
    // expensive power; batteries are the reverse.
    const std::vector<Tech> techs = {
        {"Lithium-Ion", 0.86, 250.0, 300.0, 10.0, {2, 4, 6, 8, 10, 24, 100}},
        {"Hydropower", 0.80, 2200.0, 60.0, 18.0, {4, 10, 24, 100}},
        {"CAES", 0.52, 1000.0, 4.0, 15.0, {4, 10, 24, 100}},
        {"Hydrogen", 0.35, 2800.0, 3.0, 30.0, {10, 24, 100}},
        {"Gravitational", 0.75, 900.0, 260.0, 12.0, {2, 4, 6, 8, 10, 24, 100}},
        {"Thermal", 0.50, 1600.0, 35.0, 20.0, {4, 6, 8, 10, 24, 100}},
    };
    std::vector<StorageCatalog::Entry> entries;
    for (const auto& t : techs) {
        for (double rating : {100.0, 1000.0}) {
            const double scale = rating >= 1000.0 ? 0.85 : 1.0;  // economies of scale
            for (double duration : t.durations) {
                StorageCatalog::Entry e;
                e.technology = t.name;
                e.rating_mw = rating;
                e.duration_h = duration;
                e.rte = t.rte;
                e.capex_usd = scale * 1000.0 * (t.power_usd_per_kw * rating + t.energy_usd_per_kwh * rating * duration);
                e.opex_usd_per_yr = scale * 1000.0 * t.opex_usd_per_kw_yr * rating;
                entries.push_back(std::move(e));
            }
        }
    }
    return StorageCatalog(std::move(entries));
}

}  // namespace econ
}  // namespace hybridwind
