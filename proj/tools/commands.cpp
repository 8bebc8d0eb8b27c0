#include "commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "hybridwind/config.hpp"
#include "hybridwind/cove.hpp"
#include "hybridwind/dispatch.hpp"
#include "hybridwind/econ.hpp"
#include "hybridwind/errors.hpp"
#include "hybridwind/metrics.hpp"
#include "hybridwind/nn.hpp"
#include "hybridwind/nqf.hpp"
#include "hybridwind/series.hpp"
#include "hybridwind/tuner.hpp"

namespace hybridwind::cli {

namespace fs = std::filesystem;
using config::RunConfig;
using series::Channel;
using series::SeriesFrame;

namespace {

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

fs::path ensure_dir(const fs::path& p) {
    std::error_code ec;
    fs::create_directories(p, ec);
    if (ec) throw IoError("cannot create directory '" + p.string() + "': " + ec.message());
    return p;
}

std::ofstream open_out(const fs::path& p, bool append = false) {
    std::ofstream out(p, append ? std::ios::app : std::ios::trunc);
    if (!out) throw IoError("cannot write '" + p.string() + "'");
    return out;
}

// Write-then-rename so an interrupted run never leaves a torn checkpoint.
void save_checkpoint_atomic(const nn::Checkpoint& c, const fs::path& p) {
    auto tmp = p;
    tmp += ".tmp";
    nn::save_checkpoint(c, tmp);
    fs::rename(tmp, p);
}

void require_file(const fs::path& p, const std::string& what) {
    if (!fs::exists(p)) throw DependencyError("missing " + what + " '" + p.string() + "'");
}

struct Data {
    SeriesFrame all, train, valid;
};

Data load_data(const RunConfig& cfg) {
    Data d;
    if (cfg.data.path) {
        if (!fs::exists(*cfg.data.path)) throw ConfigError("data.path '" + cfg.data.path->string() + "' does not exist");
        d.all = series::ingest_csv(*cfg.data.path, cfg.data.columns, cfg.data.gaps);
    } else {
        d.all = series::synth_dataset(cfg.data.synth_years, cfg.data.seed, cfg.farm);
    }
    std::tie(d.train, d.valid) = series::split_train_test(d.all, cfg.data.train_fraction);
    return d;
}

std::vector<double> capacity_factor(std::vector<double> mw, double capacity) {
    for (double& x : mw) x /= capacity;
    return mw;
}

void check_architecture(const nn::Checkpoint& c, const nn::Architecture& expected, const fs::path& path) {
    if (!(c.params.arch == expected))
        throw ConfigError("checkpoint '" + path.string() + "' does not match the configured " + c.model +
                          " architecture");
}

// Minimal reader for the CSVs this tool writes (no quoting).
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t col(const std::string& name, const fs::path& path) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw SchemaError("'" + path.string() + "' has no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

Table read_table(const fs::path& path, const std::string& what) {
    require_file(path, what);
    std::ifstream in(path);
    Table t;
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("'" + path.string() + "' is empty");
    t.header = split_csv(line);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto row = split_csv(line);
        if (row.size() != t.header.size()) throw SchemaError("'" + path.string() + "': ragged row");
        t.rows.push_back(std::move(row));
    }
    return t;
}

double to_double(const std::string& s) {
    if (s.empty()) return std::nan("");
    return std::stod(s);
}

// ---------------------------------------------------------------- synth

int cmd_synth(const RunConfig& cfg, const std::optional<std::string>& output) {
    const auto frame = series::synth_dataset(cfg.data.synth_years, cfg.data.seed, cfg.farm);
    const fs::path path = output ? fs::path(*output) : ensure_dir(cfg.out_dir) / "synth.csv";
    if (path.has_parent_path()) ensure_dir(path.parent_path());
    series::write_csv(frame, path);
    std::cerr << "wrote " << frame.size() << " rows to " << path.string() << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- training

int cmd_train_gen(const RunConfig& cfg, bool resume) {
    const auto data = load_data(cfg);
    const auto dir = ensure_dir(cfg.out_dir / "nqf");
    const auto ckpt_path = dir / "nqf.ckpt";
    const auto log_path = dir / "epochs.csv";
    open_out(dir / "config.txt") << cfg.dump();

    nqf::TrainState state;
    if (resume) {
        require_file(ckpt_path, "checkpoint to resume from");
        const auto c = nn::load_checkpoint(ckpt_path);
        check_architecture(c, nqf::architecture(cfg.nqf), ckpt_path);
        state = nqf::from_checkpoint(c);
        std::cerr << "resuming after epoch " << state.epochs_done << '\n';
    }
    auto log = open_out(log_path, resume);
    if (!resume) log << "epoch,train_loss,valid_loss\n";
    nqf::train_nqf(data.train, data.valid, cfg.nqf, cfg.farm, state, resume,
                   [&](const nqf::EpochMetrics& m, const nqf::TrainState& s) {
                       log << m.epoch << ',' << num(m.train_loss) << ',' << num(m.valid_loss) << '\n';
                       log.flush();
                       save_checkpoint_atomic(nqf::to_checkpoint(s, cfg.nqf), ckpt_path);
                       std::cerr << "epoch " << m.epoch << " valid loss " << m.valid_loss << '\n';
                   });
    return kExitOk;
}

int cmd_train_dispatch(const RunConfig& cfg, bool resume) {
    const auto data = load_data(cfg);
    const auto dir = ensure_dir(cfg.out_dir / "cove");
    const auto ckpt_path = dir / "cove.ckpt";
    const auto log_path = dir / "epochs.csv";
    open_out(dir / "config.txt") << cfg.dump();

    cove::TrainState state;
    if (resume) {
        require_file(ckpt_path, "checkpoint to resume from");
        const auto c = nn::load_checkpoint(ckpt_path);
        check_architecture(c, cove::architecture(cfg.cove), ckpt_path);
        state = cove::from_checkpoint(c);
        std::cerr << "resuming after epoch " << state.epochs_done << '\n';
    }
    auto log = open_out(log_path, resume);
    if (!resume) log << "epoch,train_loss,valid_cove\n";
    cove::train_cove(data.train, data.valid, cfg.cove, state, resume,
                     [&](const cove::EpochMetrics& m, const cove::TrainState& s) {
                         log << m.epoch << ',' << num(m.train_loss) << ','
                             << num(m.valid_cove * econ::kCoveDisplayScale) << '\n';
                         log.flush();
                         save_checkpoint_atomic(cove::to_checkpoint(s, cfg.cove), ckpt_path);
                         std::cerr << "epoch " << m.epoch << " valid COVE "
                                   << m.valid_cove * econ::kCoveDisplayScale << '\n';
                         return true;
                     });
    return kExitOk;
}

// ---------------------------------------------------------------- eval

int eval_generation(const RunConfig& cfg, const fs::path& ckpt_path) {
    require_file(ckpt_path, "NQF checkpoint");
    const auto c = nn::load_checkpoint(ckpt_path);
    check_architecture(c, nqf::architecture(cfg.nqf), ckpt_path);
    const auto state = nqf::from_checkpoint(c);
    const auto data = load_data(cfg);
    const auto dir = ensure_dir(cfg.out_dir / "eval");

    auto metrics_out = open_out(dir / "metrics.csv");
    metrics_out << "model,window,rmse,xcorr,similarity\n";
    for (const auto& [window, frame] : {std::pair<std::string, const SeriesFrame*>{"train", &data.train},
                                        std::pair<std::string, const SeriesFrame*>{"validation", &data.valid}}) {
        const auto& v = frame->channel(Channel::WindSpeed);
        const auto obs = capacity_factor(frame->channel(Channel::Generation), cfg.farm.capacity_mw);
        const auto gen_mw = nqf::generate(state.model, v, cfg.nqf, cfg.eval_seed);
        const auto gen = capacity_factor(gen_mw, cfg.farm.capacity_mw);
        const auto edges = metrics::union_edges(v, obs, v, gen, cfg.eval_bins, cfg.eval_bins);
        metrics_out << "nqf," << window << ',' << num(metrics::rmse(gen, obs)) << ','
                    << num(metrics::cross_correlation(gen, obs)) << ','
                    << num(metrics::power_curve_similarity(v, obs, v, gen, edges)) << '\n';
        if (window == "validation") {
            auto out = open_out(dir / "generated.csv");
            out << "time,v,p_pred\n";
            for (std::size_t t = 0; t < frame->size(); ++t)
                out << series::format_time(frame->time[t]) << ',' << num(v[t]) << ',' << num(gen_mw[t]) << '\n';
        }
    }
    std::cerr << "wrote " << (dir / "metrics.csv").string() << '\n';
    return kExitOk;
}

void write_annual(std::ofstream& out, const std::string& strategy, const std::vector<econ::AnnualMetrics>& years) {
    for (const auto& y : years)
        out << strategy << ',' << y.year << ',' << y.steps << ',' << (y.partial ? 1 : 0) << ','
            << num(y.cove * econ::kCoveDisplayScale) << ',' << num(y.value_factor) << ',' << num(y.aep_mwh) << ','
            << num(y.curtailment_mwh) << ',' << num(y.storage_utilization) << '\n';
}

// Statistics over complete years; a lone partial block stands in when no
// full year exists.
std::vector<const econ::AnnualMetrics*> summary_years(const std::vector<econ::AnnualMetrics>& years) {
    std::vector<const econ::AnnualMetrics*> out;
    for (const auto& y : years)
        if (!y.partial) out.push_back(&y);
    if (out.empty() && !years.empty()) out.push_back(&years.front());
    return out;
}

void write_summary(std::ofstream& out, const std::string& strategy, const std::vector<econ::AnnualMetrics>& years) {
    const auto used = summary_years(years);
    auto stat = [&](auto field) {
        std::vector<double> xs;
        for (const auto* y : used) xs.push_back(field(*y));
        return econ::mean_std(xs);
    };
    const auto c = stat([](const econ::AnnualMetrics& y) { return y.cove * econ::kCoveDisplayScale; });
    const auto vf = stat([](const econ::AnnualMetrics& y) { return y.value_factor; });
    const auto aep = stat([](const econ::AnnualMetrics& y) { return y.aep_mwh; });
    const auto cur = stat([](const econ::AnnualMetrics& y) { return y.curtailment_mwh; });
    const auto ut = stat([](const econ::AnnualMetrics& y) { return y.storage_utilization; });
    out << strategy << ',' << used.size() << ',' << num(c.mean) << ',' << num(c.std) << ',' << num(vf.mean) << ','
        << num(vf.std) << ',' << num(aep.mean) << ',' << num(aep.std) << ',' << num(cur.mean) << ',' << num(cur.std)
        << ',' << num(ut.mean) << ',' << num(ut.std) << '\n';
}

int eval_dispatch(const RunConfig& cfg, const fs::path& ckpt_path, bool baseload_only) {
    std::optional<cove::TrainState> state;
    if (!baseload_only) {
        require_file(ckpt_path, "COVE-NN checkpoint");
        const auto c = nn::load_checkpoint(ckpt_path);
        check_architecture(c, cove::architecture(cfg.cove), ckpt_path);
        state = cove::from_checkpoint(c);
    }
    const auto data = load_data(cfg);
    const auto dir = ensure_dir(cfg.out_dir / "eval");
    const auto& storage = cfg.cove.storage;
    const auto& g = data.valid.channel(Channel::Generation);
    const auto& p = data.valid.channel(Channel::Price);

    std::vector<std::pair<std::string, DispatchTrace>> runs;
    const double target = cfg.baseload_target ? *cfg.baseload_target : dispatch::default_baseload_target(data.train);
    runs.emplace_back("baseload", dispatch::simulate(dispatch::baseload_policy(data.valid, target, cfg.farm),
                                                     data.valid, cfg.farm, storage));
    if (state)
        runs.emplace_back("cove_nn", dispatch::simulate(cove::cove_policy(state->model, data.valid, cfg.farm, storage),
                                                        data.valid, cfg.farm, storage, cfg.cove.initial_stored));

    auto annual = open_out(dir / "annual.csv");
    annual << "strategy,year,steps,partial,cove,value_factor,aep_mwh,curtailment_mwh,storage_utilization\n";
    auto summary = open_out(dir / "summary.csv");
    summary << "strategy,years,cove_mean,cove_std,value_factor_mean,value_factor_std,aep_mean_mwh,aep_std_mwh,"
               "curtailment_mean_mwh,curtailment_std_mwh,utilization_mean,utilization_std\n";
    for (const auto& [name, trace] : runs) {
        const auto years = econ::annual_report(trace, g, p, cfg.farm, storage);
        write_annual(annual, name, years);
        write_summary(summary, name, years);
        dispatch::write_trace_csv(trace, data.valid, dir / ("trace_" + name + ".csv"));
        std::cerr << name << ": average annual COVE "
                  << econ::average_annual_cove(years) * econ::kCoveDisplayScale << '\n';
    }
    return kExitOk;
}

// ---------------------------------------------------------------- search

int cmd_search_storage(const RunConfig& cfg) {
    auto space = tuner::StorageSearchSpace::defaults();
    if (!cfg.search.technologies.empty()) space = space.restricted_to(cfg.search.technologies);
    if (space.size() == 0) throw ConfigError("storage search space is empty");
    const auto data = load_data(cfg);
    const auto dir = ensure_dir(cfg.out_dir / "search");
    const double target = cfg.baseload_target ? *cfg.baseload_target : std::nan("");
    const auto results = tuner::storage_grid_search(data.all, cfg.farm, cfg.catalog(), space, target);
    tuner::write_storage_ranking(results, dir / "storage_ranking.csv");
    std::cerr << "ranked " << results.size() << " storage candidates; best "
              << results.front().storage.technology << ' ' << results.front().storage.rating_mw << " MW / "
              << results.front().storage.duration_h << " h\n";
    return kExitOk;
}

int cmd_search_hp(const RunConfig& cfg) {
    const auto data = load_data(cfg);
    const auto dir = ensure_dir(cfg.out_dir / "search");
    tuner::HyperSearchOptions opts;
    opts.trials = cfg.search.trials;
    opts.probe_epochs = cfg.search.probe_epochs;
    opts.seed = cfg.search.seed;
    opts.serial = cfg.serial;
    opts.threads = cfg.search.threads;
    opts.log_path = dir / "trials.csv";
    opts.best_checkpoint = dir / "best.ckpt";
    const auto result = tuner::cove_hyper_search(data.train, data.valid, cfg.cove, cfg.search.ranges, opts);
    tuner::write_trial_summary(result, dir / "trials_summary.csv");
    if (!result.best) {
        std::cerr << "every trial failed\n";
        return kExitCompute;
    }
    const auto& b = result.records[*result.best];
    std::cerr << "best trial " << b.trial << " COVE " << b.best_cove * econ::kCoveDisplayScale << " at epoch "
              << b.best_epoch << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- plotdata

void plot_generation(const RunConfig& cfg, const fs::path& eval_dir, const fs::path& out_dir) {
    const auto gen_path = eval_dir / "generated.csv";
    const auto t = read_table(gen_path, "generated series (run eval --kind generation)");
    const auto data = load_data(cfg);
    const auto& frame = data.valid;
    if (t.rows.size() != frame.size())
        throw DependencyError("'" + gen_path.string() + "' does not cover the configured validation window");
    const auto tc = t.col("time", gen_path), pc = t.col("p_pred", gen_path);
    const auto& v = frame.channel(Channel::WindSpeed);
    const auto& g = frame.channel(Channel::Generation);
    std::vector<double> pred(frame.size());
    auto overlay = open_out(out_dir / "overlay.csv");
    overlay << "time,wind,observed_mw,predicted_mw\n";
    for (std::size_t i = 0; i < frame.size(); ++i) {
        if (t.rows[i][tc] != series::format_time(frame.time[i]))
            throw DependencyError("'" + gen_path.string() + "' timestamps do not match the configured data");
        pred[i] = to_double(t.rows[i][pc]);
        overlay << t.rows[i][tc] << ',' << num(v[i]) << ',' << num(g[i]) << ',' << num(pred[i]) << '\n';
    }

    const auto obs_cf = capacity_factor(g, cfg.farm.capacity_mw);
    const auto pred_cf = capacity_factor(pred, cfg.farm.capacity_mw);
    const auto edges = metrics::union_edges(v, obs_cf, v, pred_cf, cfg.eval_bins, cfg.eval_bins);
    const auto hist = metrics::joint_density(v, obs_cf, edges);
    const auto model = metrics::joint_density(v, pred_cf, edges);
    auto log10_or_blank = [](double m) { return m > 0.0 ? num(std::log10(m)) : std::string{}; };
    auto dens = open_out(out_dir / "densities.csv");
    dens << "wind_lo,wind_hi,power_lo,power_hi,hist_mass,pred_mass,mass_diff,hist_log10,pred_log10,log10_diff\n";
    for (std::size_t i = 0; i < edges.wind_bins(); ++i)
        for (std::size_t j = 0; j < edges.power_bins(); ++j) {
            const double a = hist.at(i, j), b = model.at(i, j);
            dens << num(edges.wind[i]) << ',' << num(edges.wind[i + 1]) << ',' << num(edges.power[j]) << ','
                 << num(edges.power[j + 1]) << ',' << num(a) << ',' << num(b) << ',' << num(a - b) << ','
                 << log10_or_blank(a) << ',' << log10_or_blank(b) << ','
                 << (a > 0.0 && b > 0.0 ? num(std::log10(a) - std::log10(b)) : std::string{}) << '\n';
        }
}

void plot_dispatch(const RunConfig& cfg, const fs::path& eval_dir, const fs::path& out_dir) {
    const auto annual_path = eval_dir / "annual.csv";
    const auto annual = read_table(annual_path, "annual report (run eval --kind dispatch)");
    const auto sc = annual.col("strategy", annual_path), cc = annual.col("cove", annual_path),
               pc = annual.col("partial", annual_path);
    std::vector<std::string> strategies;
    for (const auto& r : annual.rows)
        if (std::find(strategies.begin(), strategies.end(), r[sc]) == strategies.end()) strategies.push_back(r[sc]);

    auto bars = open_out(out_dir / "cove_bars.csv");
    bars << "strategy,years,mean_cove,std_cove\n";
    for (const auto& s : strategies) {
        std::vector<double> full, partial;
        for (const auto& r : annual.rows)
            if (r[sc] == s) (r[pc] == "1" ? partial : full).push_back(to_double(r[cc]));
        const auto& used = full.empty() ? partial : full;
        const auto ms = econ::mean_std(used);
        bars << s << ',' << used.size() << ',' << num(ms.mean) << ',' << num(ms.std) << '\n';
    }

    const auto data = load_data(cfg);
    const auto& price = data.valid.channel(Channel::Price);
    const double capacity = cfg.cove.storage.capacity_mwh();
    auto overlay = open_out(out_dir / "dispatch_overlay.csv");
    overlay << "time,strategy,generation_mw,delivered_mw,price\n";
    auto util = open_out(out_dir / "utilization.csv");
    util << "time,strategy,stored_mwh,utilization\n";
    for (const auto& s : strategies) {
        const auto path = eval_dir / ("trace_" + s + ".csv");
        const auto t = read_table(path, "dispatch trace for " + s);
        if (t.rows.size() != data.valid.size())
            throw DependencyError("'" + path.string() + "' does not cover the configured validation window");
        const auto tc = t.col("time", path), gc = t.col("g", path), rc = t.col("r_prime", path),
                   stc = t.col("s", path);
        for (std::size_t i = 0; i < t.rows.size(); ++i) {
            const auto& r = t.rows[i];
            overlay << r[tc] << ',' << s << ',' << r[gc] << ',' << r[rc] << ',' << num(price[i]) << '\n';
            util << r[tc] << ',' << s << ',' << r[stc] << ',' << num(to_double(r[stc]) / capacity) << '\n';
        }
    }
}

int cmd_plotdata(const RunConfig& cfg, const std::string& kind) {
    const auto eval_dir = cfg.out_dir / "eval";
    const auto out_dir = ensure_dir(cfg.out_dir / "plots");
    if (kind == "generation" || kind == "all") plot_generation(cfg, eval_dir, out_dir);
    if (kind == "dispatch" || kind == "all") plot_dispatch(cfg, eval_dir, out_dir);
    std::cerr << "wrote plot data to " << out_dir.string() << '\n';
    return kExitOk;
}

bool is_input_error(const Error& e) {
    return dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const DependencyError*>(&e) ||
           dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const AlignmentError*>(&e) ||
           dynamic_cast<const DataQualityError*>(&e) || dynamic_cast<const IoError*>(&e);
}

}  // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"Hybrid wind farm generation and dispatch models", "hybridwind"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    bool serial = false;
    std::optional<std::string> out_dir;
    std::vector<std::string> overrides;
    app.add_option("--config", config_path, "key = value configuration file");
    app.add_option("--seed", seed, "override every seed");
    app.add_flag("--serial", serial, "run searches serially (reproducible logs)");
    app.add_option("--out-dir", out_dir, "directory for all artifacts");
    app.add_option("--set", overrides, "extra key=value overrides")->take_all();

    auto* synth = app.add_subcommand("synth", "write a synthetic dataset CSV");
    std::optional<int> years;
    std::optional<std::string> output;
    synth->add_option("--years", years, "number of years (8760 h each)");
    synth->add_option("-o,--output", output, "output CSV (default <out-dir>/synth.csv)");

    bool resume = false;
    auto* train_gen = app.add_subcommand("train-gen", "train the NQF-RNN generation model");
    train_gen->add_flag("--resume", resume, "continue from <out-dir>/nqf/nqf.ckpt");
    auto* train_dispatch = app.add_subcommand("train-dispatch", "train the COVE-NN dispatch model");
    train_dispatch->add_flag("--resume", resume, "continue from <out-dir>/cove/cove.ckpt");

    auto* eval = app.add_subcommand("eval", "evaluate a trained model on the validation split");
    std::string eval_kind = "dispatch";
    std::optional<std::string> checkpoint;
    bool baseload_only = false;
    eval->add_option("--kind", eval_kind, "generation or dispatch")
        ->check(CLI::IsMember({"generation", "dispatch"}));
    eval->add_option("--checkpoint", checkpoint, "model checkpoint (default from <out-dir>)");
    eval->add_flag("--baseload-only", baseload_only, "evaluate the baseload strategy alone");

    auto* search_storage = app.add_subcommand("search-storage", "rank storage options by baseload COVE");
    auto* search_hp = app.add_subcommand("search-hp", "random search over COVE-NN loss hyperparameters");

    auto* plotdata = app.add_subcommand("plotdata", "export plot-ready CSVs from eval artifacts");
    std::string plot_kind = "all";
    plotdata->add_option("--kind", plot_kind, "generation, dispatch or all")
        ->check(CLI::IsMember({"generation", "dispatch", "all"}));

    try {
        std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        std::ostringstream out, err;
        const int code = app.exit(e, out, err);
        std::cout << out.str();
        std::cerr << err.str();
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig cfg = config_path ? RunConfig::load(*config_path) : RunConfig{};
        for (const auto& kv : overrides) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
            cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
        }
        if (seed) cfg.apply_seed(*seed);
        if (serial) cfg.serial = true;
        if (out_dir) cfg.out_dir = *out_dir;
        if (years) {
            if (*years < 1) throw ConfigError("--years must be >= 1");
            cfg.data.synth_years = *years;
        }
        cfg.finalize();

        if (synth->parsed()) return cmd_synth(cfg, output);
        if (train_gen->parsed()) return cmd_train_gen(cfg, resume);
        if (train_dispatch->parsed()) return cmd_train_dispatch(cfg, resume);
        if (eval->parsed()) {
            if (eval_kind == "generation")
                return eval_generation(cfg, checkpoint ? fs::path(*checkpoint) : cfg.out_dir / "nqf" / "nqf.ckpt");
            return eval_dispatch(cfg, checkpoint ? fs::path(*checkpoint) : cfg.out_dir / "cove" / "cove.ckpt",
                                 baseload_only);
        }
        if (search_storage->parsed()) return cmd_search_storage(cfg);
        if (search_hp->parsed()) return cmd_search_hp(cfg);
        if (plotdata->parsed()) return cmd_plotdata(cfg, plot_kind);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_input_error(e) ? kExitUsage : kExitCompute;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitCompute;
    }
    return kExitUsage;
}

}  // namespace hybridwind::cli
