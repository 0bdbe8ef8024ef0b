#include "mmdval/commands.hpp"

#include "mmdval/corrupt.hpp"
#include "mmdval/dataset.hpp"
#include "mmdval/error.hpp"
#include "mmdval/harness.hpp"
#include "mmdval/influence.hpp"
#include "mmdval/oracle.hpp"
#include "mmdval/parallel.hpp"
#include "mmdval/plot.hpp"
#include "mmdval/streaming.hpp"
#include "mmdval/synthetic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>

namespace mmdval {

namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string full(double v) { return fmt("%.17g", v); }

void check_common(const RunConfig& config) {
    if (!(config.lambda >= 0.0 && config.lambda <= 1.0)) throw InputError("lambda must lie in [0, 1]");
    if (config.smoothing < 0.0) throw InputError("smoothing must be non-negative");
    if (config.block_size == 0) throw InputError("block_size must be positive");
    if (config.sample_pairs == 0) throw InputError("sample_pairs must be positive");
    set_num_threads(config.threads);
}

std::pair<Dataset, Dataset> load_train_val(const RunConfig& config) {
    if (config.train.empty()) throw InputError("--train is required");
    if (config.val.empty()) throw InputError("--val is required");
    Dataset train = load_dataset(config.train, config.classes);
    Dataset val = load_dataset(config.val, config.classes);
    if (train.dim() != val.dim()) {
        throw InputError("train has " + std::to_string(train.dim()) + " features but validation has " +
                         std::to_string(val.dim()));
    }
    const int classes = std::max(train.num_classes, val.num_classes);
    train.num_classes = classes;
    val.num_classes = classes;
    return {std::move(train), std::move(val)};
}

ScoringOptions scoring_options(const RunConfig& config) {
    ScoringOptions options;
    options.sigma = config.sigma;
    options.sample_pairs = config.sample_pairs;
    options.lambda = config.lambda;
    options.smoothing = config.smoothing;
    options.block_size = config.block_size;
    options.seed = config.seed;
    return options;
}

double resolve_sigma(const RunConfig& config, const Dataset& train, const Dataset& val) {
    return config.sigma ? *config.sigma : bandwidth_for(train, val, config.sample_pairs, config.seed);
}

fs::path output_dir(const RunConfig& config) {
    fs::path dir = config.out.empty() ? fs::path(".") : fs::path(config.out);
    fs::create_directories(dir);
    return dir;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
}

template <typename Writer>
void write_with(const fs::path& path, Writer&& writer) {
    std::ostringstream buffer;
    writer(buffer);
    write_text(path, buffer.str());
}

Dataset synthetic_split(const RunConfig& config, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InputError("synthetic split size must be positive");
    const auto classes = static_cast<std::size_t>(config.n_classes);
    const std::size_t per_class = (n + classes - 1) / classes;
    const Matrix centers = ring_centers(config.n_classes, config.dim, config.blob_spread);
    return make_blobs(per_class, config.n_classes, config.dim, centers, config.blob_scale, seed).slice(0, n);
}

struct ExperimentData {
    Dataset train;  // clean
    Dataset val;
    Dataset test;
    Dataset pool;
};

ExperimentData experiment_data(const RunConfig& config, std::size_t repetition, bool need_test, bool need_pool) {
    ExperimentData data;
    const std::uint64_t seed = config.seed + repetition;
    if (!config.train.empty()) {
        auto [train, val] = load_train_val(config);
        data.train = std::move(train);
        data.val = std::move(val);
        if (need_test) {
            if (config.test.empty()) throw InputError("--test is required for removal experiments");
            data.test = load_dataset(config.test, data.train.num_classes);
        }
        data.pool = data.val;
        return data;
    }
    if (config.n_classes < 2) throw InputError("n_classes must be at least 2");
    data.train = synthetic_split(config, config.n_train, seed * 4 + 1);
    data.val = synthetic_split(config, config.n_val, seed * 4 + 2);
    if (need_test) data.test = synthetic_split(config, config.n_test, seed * 4 + 3);
    if (need_pool) data.pool = synthetic_split(config, config.val_pool, seed * 4 + 4);
    return data;
}

CorruptionRequest corruption_request(const RunConfig& config, std::size_t repetition) {
    CorruptionRequest request;
    const auto mechanism = parse_mechanism(config.mechanism);
    if (!mechanism) throw InputError("unknown mechanism '" + config.mechanism + "'");
    request.mechanism = *mechanism;
    request.fraction = config.fraction;
    request.seed = config.seed + repetition;
    request.noise_scale = config.noise_scale;
    request.trigger_magnitude = config.trigger_magnitude;
    request.target_class = config.target_class;
    return request;
}

void experiment_detect(const RunConfig& config, const fs::path& dir, std::ostream& log) {
    const auto grid = config.detect_grid.empty() ? default_detection_grid() : config.detect_grid;
    std::vector<std::vector<double>> curves;
    std::vector<double> accuracies;
    for (std::size_t r = 0; r < config.repeats; ++r) {
        const auto data = experiment_data(config, r, false, false);
        const auto [train, plan] = corrupt(data.train, corruption_request(config, r));
        const auto scored = score_datasets(train, data.val, scoring_options(config));
        curves.push_back(detection_curve(scored.report, plan, grid).recovered_fraction);
        accuracies.push_back(detection_accuracy(scored.report, plan, config.fraction));
    }
    std::vector<double> mean_curve(grid.size()), std_curve(grid.size());
    bool dominates = true;
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::vector<double> column;
        for (const auto& c : curves) column.push_back(c[g]);
        mean_curve[g] = mean(column);
        std_curve[g] = sample_std(column);
        dominates = dominates && mean_curve[g] > grid[g];
    }
    write_with(dir / "detect.csv", [&](std::ostream& out) {
        out << "inspected_fraction,mean_recovered,std_recovered,random_baseline\n";
        char buf[128];
        for (std::size_t g = 0; g < grid.size(); ++g) {
            std::snprintf(buf, sizeof buf, "%.4f,%.17g,%.17g,%.4f\n", grid[g], mean_curve[g], std_curve[g], grid[g]);
            out << buf;
        }
    });
    LineChart chart{"Corrupted data recovered (" + config.mechanism + ")", "fraction of data inspected",
                    "fraction of corrupted data recovered", {}};
    chart.series.push_back({"net influence", grid, mean_curve, false});
    chart.series.push_back({"random", grid, grid, true});
    write_text(dir / "detect.svg", render_svg(chart));

    log << "detect: repeats=" << config.repeats << " mechanism=" << config.mechanism
        << " fraction=" << fmt("%g", config.fraction) << '\n';
    log << "detection_accuracy mean=" << fmt("%.4f", mean(accuracies)) << " std=" << fmt("%.4f", sample_std(accuracies))
        << '\n';
    log << "curve above diagonal at every grid point: " << (dominates ? "yes" : "no") << '\n';
}

void experiment_removal(const RunConfig& config, const fs::path& dir, std::ostream& log) {
    const auto grid = config.removal_grid.empty() ? default_removal_grid() : config.removal_grid;
    std::vector<std::vector<double>> lowest, highest;
    for (std::size_t r = 0; r < config.repeats; ++r) {
        const auto data = experiment_data(config, r, true, false);
        const auto [train, plan] = corrupt(data.train, corruption_request(config, r));
        const auto scored = score_datasets(train, data.val, scoring_options(config));
        lowest.push_back(point_removal_curve(train, scored.report, data.test, grid, RemovalDirection::remove_lowest,
                                             config.knn_k).test_accuracy);
        highest.push_back(point_removal_curve(train, scored.report, data.test, grid, RemovalDirection::remove_highest,
                                              config.knn_k).test_accuracy);
    }
    auto summarise = [&](const std::vector<std::vector<double>>& runs, std::vector<double>& means,
                         std::vector<double>& stds) {
        means.assign(grid.size(), 0.0);
        stds.assign(grid.size(), 0.0);
        for (std::size_t g = 0; g < grid.size(); ++g) {
            std::vector<double> column;
            for (const auto& run : runs) column.push_back(run[g]);
            means[g] = mean(column);
            stds[g] = sample_std(column);
        }
    };
    std::vector<double> low_mean, low_std, high_mean, high_std;
    summarise(lowest, low_mean, low_std);
    summarise(highest, high_mean, high_std);
    auto write_curve = [&](const fs::path& path, const std::vector<double>& m, const std::vector<double>& s,
                           RemovalDirection direction) {
        write_with(path, [&](std::ostream& out) {
            out << "removed_fraction,mean_accuracy,std_accuracy,direction\n";
            char buf[128];
            for (std::size_t g = 0; g < grid.size(); ++g) {
                std::snprintf(buf, sizeof buf, "%.4f,%.17g,%.17g,%s\n", grid[g], m[g], s[g],
                              std::string(to_string(direction)).c_str());
                out << buf;
            }
        });
    };
    write_curve(dir / "removal_lowest.csv", low_mean, low_std, RemovalDirection::remove_lowest);
    write_curve(dir / "removal_highest.csv", high_mean, high_std, RemovalDirection::remove_highest);
    LineChart chart{"Test accuracy after point removal (k-NN)", "fraction of data removed", "test accuracy", {}};
    chart.series.push_back({"remove least valuable", grid, low_mean, false});
    chart.series.push_back({"remove most valuable", grid, high_mean, false});
    write_text(dir / "removal.svg", render_svg(chart));

    log << "removal: repeats=" << config.repeats << " k=" << config.knn_k << '\n';
    for (std::size_t g = 0; g < grid.size(); ++g) {
        log << "  removed=" << fmt("%.2f", grid[g]) << " lowest=" << fmt("%.4f", low_mean[g])
            << " highest=" << fmt("%.4f", high_mean[g]) << '\n';
    }
}

void experiment_valsweep(const RunConfig& config, const fs::path& dir, std::ostream& log) {
    const auto data = experiment_data(config, 0, false, true);
    const auto [train, plan] = corrupt(data.train, corruption_request(config, 0));
    const auto rows = validation_size_sweep(train, plan, data.pool, config.val_sizes, config.repeats,
                                            scoring_options(config), config.fraction);
    write_with(dir / "valsweep.csv", [&](std::ostream& out) { write_sweep_csv(rows, out); });
    LineChart chart{"Detection accuracy vs validation size", "validation size", "detection accuracy", {}};
    Series mean_series{"mean", {}, {}, false};
    Series std_series{"std", {}, {}, true};
    for (const auto& row : rows) {
        mean_series.x.push_back(static_cast<double>(row.size));
        mean_series.y.push_back(row.mean);
        std_series.x.push_back(static_cast<double>(row.size));
        std_series.y.push_back(row.std);
    }
    chart.series = {mean_series, std_series};
    write_text(dir / "valsweep.svg", render_svg(chart));
    log << "valsweep: pool=" << data.pool.size() << " seeds=" << config.repeats << '\n';
    log << "size  mean    std\n";
    for (const auto& row : rows) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%-5zu %.4f  %.4f\n", row.size, row.mean, row.std);
        log << buf;
    }
}

} // namespace

void cmd_value(const RunConfig& config, std::ostream& log) {
    check_common(config);
    const auto start = Clock::now();
    const auto [train, val] = load_train_val(config);
    const double sigma = resolve_sigma(config, train, val);
    ScoringOptions options = scoring_options(config);
    options.sigma = sigma;
    const auto scored = score_datasets(train, val, options);
    const fs::path dir = output_dir(config);
    write_with(dir / "scores.csv", [&](std::ostream& out) { write_scores_csv(scored.report, out); });
    const double elapsed = std::chrono::duration<double>(Clock::now() - start).count();

    log << "n=" << train.size() << " n_val=" << val.size() << " d=" << train.dim() << " classes=" << train.num_classes
        << '\n';
    log << "sigma=" << full(sigma) << (config.sigma ? " (explicit)" : " (median heuristic)") << '\n';
    log << "lambda=" << fmt("%g", config.lambda) << '\n';
    log << "wall_clock_s=" << fmt("%.6f", elapsed) << '\n';
    log << "wrote " << (dir / "scores.csv").string() << '\n';
}

void cmd_stream(const RunConfig& config, std::ostream& log) {
    check_common(config);
    if (config.batch_size < 2) throw InputError("batch_size must be at least 2 (the first batch initialises)");
    const auto [train, val] = load_train_val(config);
    const std::size_t first = std::min(train.size(), config.batch_size);
    const double sigma = config.sigma ? *config.sigma
                                      : bandwidth_for(train.slice(0, first), val, config.sample_pairs, config.seed);
    const KernelSpec spec(sigma);

    StreamRunOptions options;
    options.batch_size = config.batch_size;
    options.lambda = config.lambda;
    options.smoothing = config.smoothing;
    options.block_size = config.block_size;
    options.time_recompute = config.time_recompute;
    const StreamRun run = simulate_stream(train, val, spec, options);

    double max_diff = -1.0;
    if (config.verify) {
        Dataset support = val;
        const CondProbModel model(support, spec, config.smoothing);
        const auto offline = score_offline(train, support, spec, config.lambda, model, config.block_size);
        max_diff = 0.0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            max_diff = std::max(max_diff, std::abs(offline.report.net[i] - run.final_state.report.net[i]));
        }
    }

    const fs::path dir = output_dir(config);
    write_with(dir / "stream_timing.csv", [&](std::ostream& out) { write_timing_csv(run.timings, out); });
    write_with(dir / "scores.csv", [&](std::ostream& out) { write_scores_csv(run.final_state.report, out); });

    double inc = 0.0, rec = 0.0;
    for (const auto& t : run.timings) {
        inc += t.t_incremental;
        rec += t.t_recompute;
    }
    log << "n=" << train.size() << " n_val=" << val.size() << " batches=" << run.timings.size()
        << " batch_size=" << config.batch_size << '\n';
    log << "sigma=" << full(sigma) << (config.sigma ? " (explicit)" : " (median heuristic, first batch + validation)")
        << '\n';
    log << "lambda=" << fmt("%g", config.lambda) << '\n';
    log << "cumulative_incremental_s=" << fmt("%.6f", inc) << '\n';
    if (config.time_recompute) {
        log << "cumulative_recompute_s=" << fmt("%.6f", rec) << " speedup=" << fmt("%.2f", inc > 0 ? rec / inc : 0.0)
            << '\n';
    }
    if (config.verify) {
        log << "verify max_abs_diff=" << fmt("%.3e", max_diff) << '\n';
        if (!(max_diff <= 1e-9)) {
            throw InvariantError("streamed scores differ from the offline recompute by " + fmt("%.3e", max_diff));
        }
    }
    log << "wrote " << (dir / "scores.csv").string() << " and " << (dir / "stream_timing.csv").string() << '\n';
}

void cmd_oracle(const RunConfig& config, std::ostream& log) {
    check_common(config);
    const auto [train, val] = load_train_val(config);
    if (train.size() > config.oracle_cap) {
        throw InputError("oracle refuses " + std::to_string(train.size()) + " training points (cap " +
                         std::to_string(config.oracle_cap) +
                         "); subsample the training set or raise --oracle-cap if the O(n^2) cost is acceptable");
    }
    const double sigma = resolve_sigma(config, train, val);
    const KernelSpec spec(sigma);
    ScoringOptions options = scoring_options(config);
    options.sigma = sigma;
    const auto scored = score_datasets(train, val, options);
    const auto& influence = scored.report.marginal;
    const auto loo = loo_mmd_values(train, val, spec);
    const auto derivative = numeric_directional_derivatives(train, val, spec, config.oracle_epsilon);

    const std::size_t n = train.size();
    const std::size_t k = config.oracle_k ? config.oracle_k : std::min<std::size_t>(100, std::max<std::size_t>(1, n / 10));
    const auto loo_agreement = rank_agreement(influence, loo, k);
    const auto derivative_agreement = rank_agreement(influence, derivative, k);

    const fs::path dir = output_dir(config);
    write_with(dir / "oracle.csv", [&](std::ostream& out) {
        out << "index,influence,loo_value,numeric_derivative\n";
        char buf[128];
        for (std::size_t i = 0; i < n; ++i) {
            std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", i, influence[i], loo[i], derivative[i]);
            out << buf;
        }
    });
    log << "n=" << n << " n_val=" << val.size() << " sigma=" << full(sigma) << " k=" << k << '\n';
    if (n <= 10) {
        for (std::size_t i = 0; i < n; ++i) {
            log << "  " << i << ": influence=" << full(influence[i]) << " loo=" << full(loo[i])
                << " derivative=" << full(derivative[i]) << '\n';
        }
    }
    log << "spearman(influence, loo)=" << fmt("%.6f", loo_agreement.spearman)
        << " bottom_k_overlap=" << fmt("%.4f", loo_agreement.top_k_overlap) << '\n';
    log << "spearman(influence, derivative)=" << fmt("%.6f", derivative_agreement.spearman)
        << " pearson=" << fmt("%.6f", pearson(influence, derivative)) << '\n';
    log << "wrote " << (dir / "oracle.csv").string() << '\n';
}

void cmd_experiment(const RunConfig& config, std::ostream& log) {
    check_common(config);
    if (config.repeats == 0) throw InputError("repeats must be at least 1");
    const fs::path dir = output_dir(config);
    if (config.which == "detect") experiment_detect(config, dir, log);
    else if (config.which == "removal") experiment_removal(config, dir, log);
    else if (config.which == "valsweep") experiment_valsweep(config, dir, log);
    else throw InputError("unknown experiment '" + config.which + "'");
}

namespace {

std::string flag_name(std::string_view key) {
    std::string name = "--" + std::string(key);
    std::replace(name.begin(), name.end(), '_', '-');
    return name;
}

bool applies_to(const ConfigKey& key, Command command) {
    return key.commands.empty() || std::find(key.commands.begin(), key.commands.end(), command) != key.commands.end();
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Distributional data valuation with kernel influence scores"};
    app.name("mmdval");
    app.require_subcommand(1);

    struct Sub {
        Command command;
        CLI::App* app;
        std::string config_path;
        std::vector<std::pair<std::string, std::string>> overrides;
    };
    std::vector<Sub> subs;
    subs.reserve(4);
    const std::pair<Command, const char*> commands[] = {
        {Command::value, "value"}, {Command::stream, "stream"}, {Command::oracle, "oracle"},
        {Command::experiment, "experiment"}};
    const char* descriptions[] = {"score every training point and write scores.csv",
                                  "stream the training set in batches with incremental updates",
                                  "compare influence scores against brute-force leave-one-out values",
                                  "run a detection, removal or validation-size experiment"};
    for (std::size_t c = 0; c < 4; ++c) {
        subs.push_back({commands[c].first, app.add_subcommand(commands[c].second, descriptions[c]), {}, {}});
    }
    for (auto& sub : subs) {
        sub.app->add_option("--config", sub.config_path, "key = value config file; flags override it");
        for (const auto& key : config_keys()) {
            if (!applies_to(key, sub.command)) continue;
            const std::string name(key.key);
            auto* overrides = &sub.overrides;
            if (name == "verify") {
                sub.app->add_flag_function(flag_name(name), [overrides, name](std::int64_t) {
                    overrides->emplace_back(name, "true");
                }, std::string(key.help) + " [default: false]");
                continue;
            }
            sub.app->add_option_function<std::string>(
                       flag_name(name), [overrides, name](const std::string& v) { overrides->emplace_back(name, v); },
                       std::string(key.help))
                ->default_str(default_value(name))
                ->type_name("TEXT");
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        for (const auto& sub : subs) {
            if (!sub.app->parsed()) continue;
            RunConfig config;
            if (!sub.config_path.empty()) apply_config_file(config, sub.config_path);
            for (const auto& [key, value] : sub.overrides) config.set(key, value);
            switch (sub.command) {
            case Command::value: cmd_value(config, out); break;
            case Command::stream: cmd_stream(config, out); break;
            case Command::oracle: cmd_oracle(config, out); break;
            case Command::experiment: cmd_experiment(config, out); break;
            }
        }
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}

} // namespace mmdval
