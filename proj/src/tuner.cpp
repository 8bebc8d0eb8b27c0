#include "hybridwind/tuner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "hybridwind/dispatch.hpp"
#include "hybridwind/errors.hpp"

namespace hybridwind::tuner {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep)) out.push_back(cur);
    if (!s.empty() && s.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& s) {
    char* end = nullptr;
    const double x = std::strtod(s.c_str(), &end);
    if (s.empty() || *end != '\0') throw SchemaError("trial log: bad number '" + s + "'");
    return x;
}

std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
    return s;
}

}  // namespace

StorageSearchSpace StorageSearchSpace::defaults() {
    const std::vector<std::pair<std::string, std::vector<double>>> grid = {
        {"Lithium-Ion", {2, 4, 6, 8, 10, 24, 100}}, {"Hydropower", {4, 10, 24, 100}},
        {"CAES", {4, 10, 24, 100}},                 {"Hydrogen", {10, 24, 100}},
        {"Gravitational", {2, 4, 6, 8, 10, 24, 100}}, {"Thermal", {4, 6, 8, 10, 24, 100}},
    };
    StorageSearchSpace space;
    for (const auto& [tech, durations] : grid)
        for (double rating : {100.0, 1000.0})
            for (double d : durations) space.candidates.push_back({tech, rating, d});
    return space;
}

StorageSearchSpace StorageSearchSpace::restricted_to(const std::vector<std::string>& technologies) const {
    StorageSearchSpace out;
    for (const auto& c : candidates)
        if (std::find(technologies.begin(), technologies.end(), c.technology) != technologies.end())
            out.candidates.push_back(c);
    return out;
}

std::vector<StorageResult> storage_grid_search(const series::SeriesFrame& frame, const FarmSpec& farm,
                                               const econ::StorageCatalog& catalog,
                                               const StorageSearchSpace& space, double baseload_target) {
    if (space.candidates.empty()) throw ConfigError("storage search space is empty");
    farm.validate();
    const auto& g = frame.channel(series::Channel::Generation);
    const auto& p = frame.channel(series::Channel::Price);
    const double target = std::isnan(baseload_target) ? dispatch::default_baseload_target(frame) : baseload_target;
    const double annualization = static_cast<double>(frame.size()) / static_cast<double>(series::kHoursPerYear);

    // Resolve every candidate first so a catalog miss fails before any compute.
    std::vector<StorageSpec> specs;
    for (const auto& c : space.candidates) specs.push_back(catalog.lookup(c.technology, c.rating_mw, c.duration_h));

    std::vector<StorageResult> results;
    for (const auto& spec : specs) {
        const auto trace = dispatch::simulate(dispatch::baseload_policy(frame, target, farm), frame, farm, spec);
        const auto years = econ::annual_report(trace, g, p, farm, spec);
        std::vector<double> full;
        for (const auto& y : years)
            if (!y.partial) full.push_back(y.cove);
        StorageResult r;
        r.storage = spec;
        r.average_cove = econ::average_annual_cove(years);
        r.cove_std = full.empty() ? 0.0 : econ::mean_std(full).std;
        r.lcoe = econ::lcoe(trace.delivered, farm, spec, annualization);
        r.value_factor = econ::value_factor(trace.delivered, p);
        results.push_back(r);
    }
    std::stable_sort(results.begin(), results.end(),
                     [](const StorageResult& a, const StorageResult& b) { return a.average_cove < b.average_cove; });
    for (std::size_t i = 0; i < results.size(); ++i) results[i].rank = i + 1;
    return results;
}

void write_storage_ranking(const std::vector<StorageResult>& results, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << "rank,technology,rating_MW,duration_h,avg_cove,cove_std,lcoe,value_factor\n";
    for (const auto& r : results)
        out << r.rank << ',' << r.storage.technology << ',' << num(r.storage.rating_mw) << ','
            << num(r.storage.duration_h) << ',' << num(r.average_cove * econ::kCoveDisplayScale) << ','
            << num(r.cove_std * econ::kCoveDisplayScale) << ',' << num(r.lcoe * econ::kCoveDisplayScale) << ','
            << num(r.value_factor) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

void HyperRanges::validate() const {
    for (const auto& [lo, hi] : {gamma, Gamma, omega, Omega, Lambda})
        if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) throw ConfigError("search range must satisfy lo < hi");
    if (!(Gamma.first >= 0.0 && Omega.first >= 0.0 && Lambda.first >= 0.0 && gamma.first >= 0.0 && omega.first >= 0.0))
        throw ConfigError("search ranges must be non-negative");
    if (lambda < 0.0 || t_a < 0) throw ConfigError("fixed lambda and t_a must be >= 0");
}

bool HyperRanges::contains(const cove::LossHyperparams& hp) const {
    auto inside = [](double x, const std::pair<double, double>& r) { return x > r.first && x < r.second; };
    return inside(hp.gamma, gamma) && inside(hp.Gamma, Gamma) && inside(hp.omega, omega) &&
           inside(hp.Omega, Omega) && inside(hp.Lambda, Lambda) && hp.lambda == lambda && hp.t_a == t_a;
}

cove::LossHyperparams sample_hyperparams(const HyperRanges& ranges, std::uint64_t seed) {
    ranges.validate();
    std::mt19937_64 rng(seed);
    auto draw = [&rng](const std::pair<double, double>& r) {
        std::uniform_real_distribution<double> u(r.first, r.second);
        for (;;) {
            const double x = u(rng);
            if (x > r.first && x < r.second) return x;
        }
    };
    cove::LossHyperparams hp;
    hp.gamma = draw(ranges.gamma);
    hp.Gamma = draw(ranges.Gamma);
    hp.omega = draw(ranges.omega);
    hp.Omega = draw(ranges.Omega);
    hp.Lambda = draw(ranges.Lambda);
    hp.lambda = ranges.lambda;
    hp.t_a = ranges.t_a;
    return hp;
}

std::string trial_log_header() {
    return "trial,seed,gamma,Gamma,omega,Omega,lambda,Lambda,t_a,incumbent_at_probe,incumbent_after,"
           "terminated_early,failed,epochs_run,best_epoch,best_cove,cove_by_epoch,error";
}

std::string format_trial(const TrialRecord& r) {
    std::string coves;
    for (std::size_t i = 0; i < r.cove_by_epoch.size(); ++i) coves += (i ? ";" : "") + num(r.cove_by_epoch[i]);
    std::ostringstream s;
    s << r.trial << ',' << r.seed << ',' << num(r.hp.gamma) << ',' << num(r.hp.Gamma) << ',' << num(r.hp.omega)
      << ',' << num(r.hp.Omega) << ',' << num(r.hp.lambda) << ',' << num(r.hp.Lambda) << ',' << r.hp.t_a << ','
      << num(r.incumbent_at_probe) << ',' << num(r.incumbent_after) << ',' << (r.terminated_early ? 1 : 0) << ','
      << (r.failed ? 1 : 0) << ',' << r.epochs_run() << ',' << r.best_epoch << ',' << num(r.best_cove) << ','
      << coves << ',' << sanitize(r.error);
    return s.str();
}

TrialRecord parse_trial(const std::string& line) {
    const auto f = split(line, ',');
    if (f.size() != 18) throw SchemaError("trial log: expected 18 fields, got " + std::to_string(f.size()));
    TrialRecord r;
    try {
        r.trial = std::stoull(f[0]);
        r.seed = std::stoull(f[1]);
        r.hp.gamma = to_double(f[2]);
        r.hp.Gamma = to_double(f[3]);
        r.hp.omega = to_double(f[4]);
        r.hp.Omega = to_double(f[5]);
        r.hp.lambda = to_double(f[6]);
        r.hp.Lambda = to_double(f[7]);
        r.hp.t_a = std::stoi(f[8]);
        r.incumbent_at_probe = to_double(f[9]);
        r.incumbent_after = to_double(f[10]);
        r.terminated_early = f[11] == "1";
        r.failed = f[12] == "1";
        r.best_epoch = std::stoi(f[14]);
        r.best_cove = to_double(f[15]);
        if (!f[16].empty())
            for (const auto& c : split(f[16], ';')) r.cove_by_epoch.push_back(to_double(c));
        r.error = f[17];
        if (r.epochs_run() != std::stoi(f[13])) throw SchemaError("trial log: epochs_run disagrees with history");
    } catch (const std::logic_error&) {
        throw SchemaError("trial log: malformed row '" + line + "'");
    }
    return r;
}

std::vector<TrialRecord> read_trial_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != trial_log_header()) throw SchemaError(path.string() + ": not a trial log");
    std::vector<TrialRecord> out;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(parse_trial(line));
    return out;
}

void write_trial_summary(const HyperSearchResult& result, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << trial_log_header() << ",best\n";
    for (const auto& r : result.records) out << format_trial(r) << ',' << (r.best ? 1 : 0) << '\n';
    if (!out) throw IoError("failed writing " + path.string());
}

namespace {

struct SharedSearch {
    std::mutex mu;
    double incumbent = kInf;
    double best_written = kInf;
    std::ofstream log;
};

// A trial's best COVE can win the search unless it stopped at the probe.
bool eligible(const TrialRecord& r) { return !r.terminated_early && std::isfinite(r.best_cove); }

TrialRecord run_trial(std::size_t index, const series::SeriesFrame& train, const series::SeriesFrame& valid,
                      const cove::CoveConfig& base, const HyperRanges& ranges, const HyperSearchOptions& opts,
                      SharedSearch& shared) {
    TrialRecord rec;
    rec.trial = index;
    rec.seed = opts.seed + index;
    rec.hp = sample_hyperparams(ranges, rec.seed);
    rec.best_cove = kInf;
    rec.incumbent_at_probe = kInf;
    cove::CoveConfig cfg = base;
    cfg.hp = rec.hp;
    cfg.seed = rec.seed;
    const int probe = std::clamp(opts.probe_epochs, 0, cfg.epochs);

    std::optional<cove::TrainState> best_state;
    auto on_epoch = [&](const cove::EpochMetrics& m, const cove::TrainState& st) {
        rec.cove_by_epoch.push_back(m.valid_cove);
        if (m.epoch < probe) return true;
        std::lock_guard lock(shared.mu);
        if (m.epoch == probe) {
            rec.incumbent_at_probe = shared.incumbent;
            if (!(m.valid_cove < shared.incumbent)) {
                rec.terminated_early = true;
                rec.best_cove = m.valid_cove;
                rec.best_epoch = m.epoch;
                return false;
            }
        }
        if (m.valid_cove < rec.best_cove) {
            rec.best_cove = m.valid_cove;
            rec.best_epoch = m.epoch;
            best_state = st;
        }
        shared.incumbent = std::min(shared.incumbent, m.valid_cove);
        return true;
    };

    cove::TrainState state;
    try {
        cove::train_cove(train, valid, cfg, state, false, on_epoch);
    } catch (const Error& e) {
        rec.failed = true;
        rec.error = e.what();
    }
    if (!std::isfinite(rec.best_cove)) rec.best_cove = std::nan("");

    std::lock_guard lock(shared.mu);
    rec.incumbent_after = shared.incumbent;
    if (eligible(rec) && best_state && rec.best_cove < shared.best_written) {
        shared.best_written = rec.best_cove;
        if (opts.best_checkpoint) {
            auto ckpt = cove::to_checkpoint(*best_state, cfg);
            ckpt.metadata["trial"] = std::to_string(index);
            nn::save_checkpoint(ckpt, *opts.best_checkpoint);
        }
    }
    if (shared.log.is_open()) {
        shared.log << format_trial(rec) << '\n';
        shared.log.flush();
    }
    return rec;
}

}  // namespace

HyperSearchResult cove_hyper_search(const series::SeriesFrame& train, const series::SeriesFrame& valid,
                                    const cove::CoveConfig& cfg, const HyperRanges& ranges,
                                    const HyperSearchOptions& opts) {
    if (opts.trials == 0) throw ConfigError("search.trials must be >= 1");
    if (opts.probe_epochs < 1) throw ConfigError("search.probe_epochs must be >= 1");
    ranges.validate();
    cfg.validate();

    SharedSearch shared;
    std::vector<TrialRecord> records;
    if (opts.log_path) {
        const bool exists = std::filesystem::exists(*opts.log_path) && std::filesystem::file_size(*opts.log_path) > 0;
        if (exists) {
            for (auto& r : read_trial_log(*opts.log_path))
                if (r.trial < opts.trials) records.push_back(std::move(r));
        }
        shared.log.open(*opts.log_path, std::ios::app);
        if (!shared.log) throw IoError("cannot append to " + opts.log_path->string());
        if (!exists) shared.log << trial_log_header() << '\n';
    }
    std::vector<bool> done(opts.trials, false);
    for (const auto& r : records) {
        done[r.trial] = true;
        if (!std::isnan(r.incumbent_after)) shared.incumbent = std::min(shared.incumbent, r.incumbent_after);
        if (eligible(r)) shared.best_written = std::min(shared.best_written, r.best_cove);
    }
    std::vector<std::size_t> pending;
    for (std::size_t i = 0; i < opts.trials; ++i)
        if (!done[i]) pending.push_back(i);

    std::mutex records_mu;
    auto collect = [&](TrialRecord r) {
        std::lock_guard lock(records_mu);
        records.push_back(std::move(r));
    };
    if (opts.serial) {
        for (std::size_t i : pending) collect(run_trial(i, train, valid, cfg, ranges, opts, shared));
    } else {
        std::size_t workers = opts.threads ? opts.threads : std::max(1u, std::thread::hardware_concurrency());
        workers = std::min(workers, pending.size());
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < pending.size(); k = next++)
                    collect(run_trial(pending[k], train, valid, cfg, ranges, opts, shared));
            });
        for (auto& t : pool) t.join();
    }

    HyperSearchResult result;
    std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) { return a.trial < b.trial; });
    result.records = std::move(records);
    for (std::size_t i = 0; i < result.records.size(); ++i) {
        const auto& r = result.records[i];
        if (eligible(r) && (!result.best || r.best_cove < result.records[*result.best].best_cove)) result.best = i;
    }
    if (result.best) result.records[*result.best].best = true;
    return result;
}

}  // namespace hybridwind::tuner
