#include "hybridwind/config.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "hybridwind/errors.hpp"

namespace hybridwind::config {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

double parse_double(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || *end != '\0') throw ConfigError(key + ": expected a number, got '" + v + "'");
    return x;
}

long long parse_int(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const long long x = std::strtoll(v.c_str(), &end, 10);
    if (v.empty() || *end != '\0') throw ConfigError(key + ": expected an integer, got '" + v + "'");
    return x;
}

std::size_t parse_size(const std::string& key, const std::string& v) {
    const long long x = parse_int(key, v);
    if (x < 0) throw ConfigError(key + ": must be >= 0");
    return static_cast<std::size_t>(x);
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    char* end = nullptr;
    const unsigned long long x = std::strtoull(v.c_str(), &end, 10);
    if (v.empty() || v[0] == '-' || *end != '\0') throw ConfigError(key + ": expected a seed, got '" + v + "'");
    return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::vector<std::string> parse_list(const std::string& v) {
    std::vector<std::string> out;
    std::istringstream in(v);
    std::string item;
    while (std::getline(in, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<std::size_t> parse_sizes(const std::string& key, const std::string& v) {
    std::vector<std::size_t> out;
    for (const auto& s : parse_list(v)) out.push_back(parse_size(key, s));
    return out;
}

std::vector<double> parse_doubles(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& s : parse_list(v)) out.push_back(parse_double(key, s));
    return out;
}

std::pair<double, double> parse_range(const std::string& key, const std::string& v) {
    const auto xs = parse_doubles(key, v);
    if (xs.size() != 2) throw ConfigError(key + ": expected 'lo,hi'");
    return {xs[0], xs[1]};
}

template <class T>
std::string join(const std::vector<T>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += ",";
        if constexpr (std::is_same_v<T, double>)
            out += num(xs[i]);
        else if constexpr (std::is_same_v<T, std::string>)
            out += xs[i];
        else
            out += std::to_string(xs[i]);
    }
    return out;
}

struct Key {
    std::function<void(RunConfig&, const std::string&, const std::string&)> set;
    std::function<std::string(const RunConfig&)> get;
};

const std::map<std::string, Key>& registry() {
    using R = RunConfig;
    using S = const std::string&;
    static const std::map<std::string, Key> keys = [] {
        std::map<std::string, Key> k;
        auto column = [](series::Channel c) {
            return Key{[c](R& r, S, S v) { r.data.columns.columns[c] = v; },
                       [c](const R& r) {
                           const auto it = r.data.columns.columns.find(c);
                           return it == r.data.columns.columns.end() ? std::string{} : it->second;
                       }};
        };
        k["data.path"] = {[](R& r, S, S v) { r.data.path = v; },
                          [](const R& r) { return r.data.path ? r.data.path->string() : std::string{}; }};
        k["data.columns.v"] = column(series::Channel::WindSpeed);
        k["data.columns.g"] = column(series::Channel::Generation);
        k["data.columns.p"] = column(series::Channel::Price);
        k["data.columns.u"] = column(series::Channel::Load);
        k["data.train_fraction"] = {[](R& r, S key, S v) { r.data.train_fraction = parse_double(key, v); },
                                    [](const R& r) { return num(r.data.train_fraction); }};
        k["data.seq_len"] = {[](R& r, S key, S v) { r.data.seq_len = parse_size(key, v); },
                             [](const R& r) { return r.data.seq_len ? std::to_string(*r.data.seq_len) : ""; }};
        k["data.batch_size"] = {
            [](R& r, S key, S v) { r.data.batch_size = parse_size(key, v); },
            [](const R& r) { return r.data.batch_size ? std::to_string(*r.data.batch_size) : ""; }};
        k["data.seed"] = {[](R& r, S key, S v) { r.data.seed = parse_u64(key, v); },
                          [](const R& r) { return std::to_string(r.data.seed); }};
        k["data.years"] = {[](R& r, S key, S v) { r.data.synth_years = static_cast<int>(parse_int(key, v)); },
                           [](const R& r) { return std::to_string(r.data.synth_years); }};
        k["data.gap.max_run"] = {[](R& r, S key, S v) { r.data.gaps.max_interpolated_run = parse_size(key, v); },
                                 [](const R& r) { return std::to_string(r.data.gaps.max_interpolated_run); }};
        k["data.gap.max_missing"] = {
            [](R& r, S key, S v) { r.data.gaps.max_missing_fraction = parse_double(key, v); },
            [](const R& r) { return num(r.data.gaps.max_missing_fraction); }};

        k["farm.capacity_mw"] = {[](R& r, S key, S v) { r.farm.capacity_mw = parse_double(key, v); },
                                 [](const R& r) { return num(r.farm.capacity_mw); }};
        k["farm.capex_usd"] = {[](R& r, S key, S v) { r.farm.capex_usd = parse_double(key, v); },
                               [](const R& r) { return num(r.farm.capex_usd); }};
        k["farm.opex_usd_per_yr"] = {[](R& r, S key, S v) { r.farm.opex_usd_per_yr = parse_double(key, v); },
                                     [](const R& r) { return num(r.farm.opex_usd_per_yr); }};
        k["farm.fcr"] = {[](R& r, S key, S v) { r.farm.fixed_charge_rate = parse_double(key, v); },
                         [](const R& r) { return num(r.farm.fixed_charge_rate); }};
        k["catalog.path"] = {[](R& r, S, S v) { r.catalog_path = v; },
                             [](const R& r) { return r.catalog_path ? r.catalog_path->string() : std::string{}; }};

        k["nqf.hidden"] = {[](R& r, S key, S v) { r.nqf.hidden = parse_size(key, v); },
                           [](const R& r) { return std::to_string(r.nqf.hidden); }};
        k["nqf.ff"] = {[](R& r, S key, S v) { r.nqf.ff = parse_sizes(key, v); },
                       [](const R& r) { return join(r.nqf.ff); }};
        k["nqf.lr"] = {[](R& r, S key, S v) { r.nqf.learning_rate = parse_double(key, v); },
                       [](const R& r) { return num(r.nqf.learning_rate); }};
        k["nqf.epochs"] = {[](R& r, S key, S v) { r.nqf.epochs = static_cast<int>(parse_int(key, v)); },
                           [](const R& r) { return std::to_string(r.nqf.epochs); }};
        k["nqf.batch"] = {[](R& r, S key, S v) { r.nqf.batch_size = parse_size(key, v); },
                          [](const R& r) { return std::to_string(r.nqf.batch_size); }};
        k["nqf.seq_len"] = {[](R& r, S key, S v) { r.nqf.seq_len = parse_size(key, v); },
                            [](const R& r) { return std::to_string(r.nqf.seq_len); }};
        k["nqf.levels"] = {[](R& r, S key, S v) { r.nqf.levels = parse_doubles(key, v); },
                           [](const R& r) { return join(r.nqf.levels); }};
        k["nqf.smooth_lambda"] = {[](R& r, S key, S v) { r.nqf.smooth_lambda = parse_double(key, v); },
                                  [](const R& r) { return num(r.nqf.smooth_lambda); }};
        k["nqf.drift_gamma"] = {[](R& r, S key, S v) { r.nqf.drift_gamma = parse_double(key, v); },
                                [](const R& r) { return num(r.nqf.drift_gamma); }};
        k["nqf.bias_weight"] = {[](R& r, S key, S v) { r.nqf.bias_weight = parse_double(key, v); },
                                [](const R& r) { return num(r.nqf.bias_weight); }};
        k["nqf.monotone_mode"] = {[](R& r, S key, S v) {
                                      if (v == "penalty")
                                          r.nqf.monotone = nqf::MonotoneMode::Penalty;
                                      else if (v == "hard")
                                          r.nqf.monotone = nqf::MonotoneMode::Hard;
                                      else
                                          throw ConfigError(key + ": expected penalty or hard");
                                  },
                                  [](const R& r) {
                                      return std::string(r.nqf.monotone == nqf::MonotoneMode::Hard ? "hard"
                                                                                                    : "penalty");
                                  }};
        k["nqf.monotone_weight"] = {[](R& r, S key, S v) { r.nqf.monotone_weight = parse_double(key, v); },
                                    [](const R& r) { return num(r.nqf.monotone_weight); }};
        k["nqf.seed"] = {[](R& r, S key, S v) { r.nqf.seed = parse_u64(key, v); },
                         [](const R& r) { return std::to_string(r.nqf.seed); }};

        k["cove.hidden"] = {[](R& r, S key, S v) { r.cove.hidden = parse_size(key, v); },
                            [](const R& r) { return std::to_string(r.cove.hidden); }};
        k["cove.ff"] = {[](R& r, S key, S v) { r.cove.ff = parse_sizes(key, v); },
                        [](const R& r) { return join(r.cove.ff); }};
        k["cove.lr"] = {[](R& r, S key, S v) { r.cove.learning_rate = parse_double(key, v); },
                        [](const R& r) { return num(r.cove.learning_rate); }};
        k["cove.epochs"] = {[](R& r, S key, S v) { r.cove.epochs = static_cast<int>(parse_int(key, v)); },
                            [](const R& r) { return std::to_string(r.cove.epochs); }};
        k["cove.batch"] = {[](R& r, S key, S v) { r.cove.batch_size = parse_size(key, v); },
                           [](const R& r) { return std::to_string(r.cove.batch_size); }};
        k["cove.seq_len"] = {[](R& r, S key, S v) { r.cove.seq_len = parse_size(key, v); },
                             [](const R& r) { return std::to_string(r.cove.seq_len); }};
        k["cove.initial_stored"] = {[](R& r, S key, S v) { r.cove.initial_stored = parse_double(key, v); },
                                    [](const R& r) { return num(r.cove.initial_stored); }};
        k["cove.hp.gamma"] = {[](R& r, S key, S v) { r.cove.hp.gamma = parse_double(key, v); },
                              [](const R& r) { return num(r.cove.hp.gamma); }};
        k["cove.hp.Gamma"] = {[](R& r, S key, S v) { r.cove.hp.Gamma = parse_double(key, v); },
                              [](const R& r) { return num(r.cove.hp.Gamma); }};
        k["cove.hp.omega"] = {[](R& r, S key, S v) { r.cove.hp.omega = parse_double(key, v); },
                              [](const R& r) { return num(r.cove.hp.omega); }};
        k["cove.hp.Omega"] = {[](R& r, S key, S v) { r.cove.hp.Omega = parse_double(key, v); },
                              [](const R& r) { return num(r.cove.hp.Omega); }};
        k["cove.hp.lambda"] = {[](R& r, S key, S v) { r.cove.hp.lambda = parse_double(key, v); },
                               [](const R& r) { return num(r.cove.hp.lambda); }};
        k["cove.hp.Lambda"] = {[](R& r, S key, S v) { r.cove.hp.Lambda = parse_double(key, v); },
                               [](const R& r) { return num(r.cove.hp.Lambda); }};
        k["cove.hp.t_a"] = {[](R& r, S key, S v) { r.cove.hp.t_a = static_cast<int>(parse_int(key, v)); },
                            [](const R& r) { return std::to_string(r.cove.hp.t_a); }};
        k["cove.storage.tech"] = {[](R& r, S, S v) { r.storage_tech = v; },
                                  [](const R& r) { return r.storage_tech; }};
        k["cove.storage.rating"] = {[](R& r, S key, S v) { r.storage_rating = parse_double(key, v); },
                                    [](const R& r) { return num(r.storage_rating); }};
        k["cove.storage.duration"] = {[](R& r, S key, S v) { r.storage_duration = parse_double(key, v); },
                                      [](const R& r) { return num(r.storage_duration); }};
        k["cove.seed"] = {[](R& r, S key, S v) { r.cove.seed = parse_u64(key, v); },
                          [](const R& r) { return std::to_string(r.cove.seed); }};

        k["search.trials"] = {[](R& r, S key, S v) { r.search.trials = parse_size(key, v); },
                              [](const R& r) { return std::to_string(r.search.trials); }};
        k["search.probe_epochs"] = {
            [](R& r, S key, S v) { r.search.probe_epochs = static_cast<int>(parse_int(key, v)); },
            [](const R& r) { return std::to_string(r.search.probe_epochs); }};
        k["search.seed"] = {[](R& r, S key, S v) { r.search.seed = parse_u64(key, v); },
                            [](const R& r) { return std::to_string(r.search.seed); }};
        k["search.threads"] = {[](R& r, S key, S v) { r.search.threads = parse_size(key, v); },
                               [](const R& r) { return std::to_string(r.search.threads); }};
        k["search.technologies"] = {[](R& r, S, S v) { r.search.technologies = parse_list(v); },
                                    [](const R& r) { return join(r.search.technologies); }};
        auto range = [](std::pair<double, double> tuner::HyperRanges::*field) {
            return Key{[field](R& r, S key, S v) { r.search.ranges.*field = parse_range(key, v); },
                       [field](const R& r) {
                           return num((r.search.ranges.*field).first) + "," + num((r.search.ranges.*field).second);
                       }};
        };
        k["search.range.gamma"] = range(&tuner::HyperRanges::gamma);
        k["search.range.Gamma"] = range(&tuner::HyperRanges::Gamma);
        k["search.range.omega"] = range(&tuner::HyperRanges::omega);
        k["search.range.Omega"] = range(&tuner::HyperRanges::Omega);
        k["search.range.Lambda"] = range(&tuner::HyperRanges::Lambda);

        k["baseload.target"] = {[](R& r, S key, S v) { r.baseload_target = parse_double(key, v); },
                                [](const R& r) { return r.baseload_target ? num(*r.baseload_target) : ""; }};
        k["eval.bins"] = {[](R& r, S key, S v) { r.eval_bins = parse_size(key, v); },
                          [](const R& r) { return std::to_string(r.eval_bins); }};
        k["eval.seed"] = {[](R& r, S key, S v) { r.eval_seed = parse_u64(key, v); },
                          [](const R& r) { return std::to_string(r.eval_seed); }};
        k["serial"] = {[](R& r, S key, S v) { r.serial = parse_bool(key, v); },
                       [](const R& r) { return std::string(r.serial ? "true" : "false"); }};
        k["out_dir"] = {[](R& r, S, S v) { r.out_dir = v; }, [](const R& r) { return r.out_dir.string(); }};
        return k;
    }();
    return keys;
}

}  // namespace

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    RunConfig cfg;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(lineno) + ": expected 'key = value'");
        cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

void RunConfig::set(const std::string& key, const std::string& value) {
    const auto& keys = registry();
    const auto it = keys.find(key);
    if (it == keys.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second.set(*this, key, value);
    assigned.insert(key);
}

void RunConfig::apply_seed(std::uint64_t seed) {
    data.seed = seed;
    nqf.seed = seed;
    cove.seed = seed;
    search.seed = seed;
    eval_seed = seed;
}

void RunConfig::finalize() {
    if (!(data.train_fraction > 0.0 && data.train_fraction < 1.0))
        throw ConfigError("data.train_fraction must lie in (0, 1)");
    if (data.synth_years < 1) throw ConfigError("data.years must be >= 1");
    if (data.seq_len) {
        if (!assigned.count("nqf.seq_len")) nqf.seq_len = *data.seq_len;
        if (!assigned.count("cove.seq_len")) cove.seq_len = *data.seq_len;
    }
    if (data.batch_size) {
        if (!assigned.count("nqf.batch")) nqf.batch_size = *data.batch_size;
        if (!assigned.count("cove.batch")) cove.batch_size = *data.batch_size;
    }
    for (const auto& [channel, name] : data.columns.columns)
        if (name.empty()) throw ConfigError("column name for '" + std::string(series::channel_name(channel)) + "' is empty");
    if (eval_bins <= 1) throw ConfigError("eval.bins must be > 1");
    if (search.trials == 0) throw ConfigError("search.trials must be >= 1");
    if (search.probe_epochs < 1) throw ConfigError("search.probe_epochs must be >= 1");
    search.ranges.validate();
    const auto grid = tuner::StorageSearchSpace::defaults();
    for (const auto& t : search.technologies)
        if (std::none_of(grid.candidates.begin(), grid.candidates.end(),
                         [&](const auto& c) { return c.technology == t; }))
            throw ConfigError("search.technologies: unknown technology '" + t + "'");
    farm.validate();
    cove.farm = farm;
    cove.storage = storage();
    nqf.validate();
    cove.validate();
}

econ::StorageCatalog RunConfig::catalog() const {
    return catalog_path ? econ::StorageCatalog::load(*catalog_path) : econ::placeholder_catalog();
}

StorageSpec RunConfig::storage() const { return catalog().lookup(storage_tech, storage_rating, storage_duration); }

std::vector<std::string> RunConfig::known_keys() {
    std::vector<std::string> out;
    for (const auto& [k, _] : registry()) out.push_back(k);
    return out;
}

std::string RunConfig::dump() const {
    std::string out;
    for (const auto& [k, key] : registry()) {
        const auto v = key.get(*this);
        if (!v.empty()) out += k + " = " + v + "\n";
    }
    return out;
}

}  // namespace hybridwind::config
