#include "mmdval/config.hpp"

#include "mmdval/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace mmdval {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, std::string_view expected) {
    throw InputError("invalid value '" + std::string(value) + "' for " + std::string(key) + ": expected " +
                     std::string(expected));
}

double parse_double(std::string_view key, std::string_view text) {
    text = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty() || !std::isfinite(v)) {
        bad_value(key, text, "a finite real number");
    }
    return v;
}

std::uint64_t parse_unsigned(std::string_view key, std::string_view text) {
    text = trim(text);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
        bad_value(key, text, "a non-negative integer");
    }
    return v;
}

bool parse_bool(std::string_view key, std::string_view text) {
    text = trim(text);
    if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
    if (text == "false" || text == "0" || text == "no" || text == "off") return false;
    bad_value(key, text, "true or false");
}

template <typename T, typename Parse>
std::vector<T> parse_list(std::string_view text, Parse parse) {
    std::vector<T> out;
    text = trim(text);
    if (text.empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = text.find(',', start);
        out.push_back(parse(text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

std::string join(const std::vector<double>& v) {
    std::string out;
    char buf[32];
    for (std::size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%g", v[i]);
        out += (i ? "," : "") + std::string(buf);
    }
    return out;
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

} // namespace

void RunConfig::set(std::string_view key, std::string_view raw) {
    const std::string_view value = trim(raw);
    auto as_size = [&] { return static_cast<std::size_t>(parse_unsigned(key, value)); };
    auto as_int = [&] { return static_cast<int>(parse_unsigned(key, value)); };
    auto as_double = [&] { return parse_double(key, value); };

    if (key == "train") train = value;
    else if (key == "val") val = value;
    else if (key == "test") test = value;
    else if (key == "out") out = value;
    else if (key == "classes") classes = as_int();
    else if (key == "sigma") {
        if (value == "median") sigma.reset();
        else {
            const double s = as_double();
            if (!(s > 0.0)) bad_value(key, value, "\"median\" or a positive real");
            sigma = s;
        }
    }
    else if (key == "sample_pairs") sample_pairs = as_size();
    else if (key == "lambda") lambda = as_double();
    else if (key == "smoothing") smoothing = as_double();
    else if (key == "block_size") block_size = as_size();
    else if (key == "seed") seed = parse_unsigned(key, value);
    else if (key == "threads") threads = static_cast<unsigned>(parse_unsigned(key, value));
    else if (key == "batch_size") batch_size = as_size();
    else if (key == "verify") verify = parse_bool(key, value);
    else if (key == "time_recompute") time_recompute = parse_bool(key, value);
    else if (key == "oracle_cap") oracle_cap = as_size();
    else if (key == "oracle_epsilon") oracle_epsilon = as_double();
    else if (key == "oracle_k") oracle_k = as_size();
    else if (key == "which") {
        if (value != "detect" && value != "removal" && value != "valsweep") {
            bad_value(key, value, "detect, removal or valsweep");
        }
        which = value;
    }
    else if (key == "mechanism") {
        if (value != "feature_noise" && value != "label_flip" && value != "backdoor_trigger" && value != "mixed") {
            bad_value(key, value, "feature_noise, label_flip, backdoor_trigger or mixed");
        }
        mechanism = value;
    }
    else if (key == "fraction") fraction = as_double();
    else if (key == "noise_scale") noise_scale = as_double();
    else if (key == "trigger_magnitude") trigger_magnitude = as_double();
    else if (key == "target_class") target_class = as_int();
    else if (key == "repeats") repeats = as_size();
    else if (key == "detect_grid") detect_grid = parse_list<double>(value, [&](std::string_view s) { return parse_double(key, s); });
    else if (key == "removal_grid") removal_grid = parse_list<double>(value, [&](std::string_view s) { return parse_double(key, s); });
    else if (key == "val_sizes") {
        val_sizes = parse_list<std::size_t>(value, [&](std::string_view s) {
            return static_cast<std::size_t>(parse_unsigned(key, s));
        });
    }
    else if (key == "knn_k") knn_k = as_size();
    else if (key == "n_train") n_train = as_size();
    else if (key == "n_val") n_val = as_size();
    else if (key == "n_test") n_test = as_size();
    else if (key == "val_pool") val_pool = as_size();
    else if (key == "n_classes") n_classes = as_int();
    else if (key == "dim") dim = as_size();
    else if (key == "blob_spread") blob_spread = as_double();
    else if (key == "blob_scale") blob_scale = as_double();
    else throw InputError("unknown config key '" + std::string(key) + "'");
}

const std::vector<ConfigKey>& config_keys() {
    using C = Command;
    static const std::vector<ConfigKey> keys{
        {"train", "training data (.csv or .bin)", {}},
        {"val", "validation data (.csv or .bin)", {}},
        {"test", "test data for removal experiments", {C::experiment}},
        {"out", "output directory", {}},
        {"classes", "class count, 0 infers max label + 1", {}},
        {"sigma", "kernel bandwidth: a positive real or \"median\"", {}},
        {"sample_pairs", "pairs sampled by the median heuristic", {}},
        {"lambda", "weight of the label term in the net score", {}},
        {"smoothing", "additive smoothing of the class-probability estimate", {}},
        {"block_size", "rows per kernel tile", {}},
        {"seed", "random seed", {}},
        {"threads", "worker threads, 0 = hardware concurrency", {}},
        {"batch_size", "points per streamed batch", {C::stream}},
        {"verify", "compare final stream scores with an offline recompute", {C::stream}},
        {"time_recompute", "time a full recompute after every batch", {C::stream}},
        {"oracle_cap", "largest training set the oracle accepts", {C::oracle}},
        {"oracle_epsilon", "mixing weight of the numeric directional derivative", {C::oracle}},
        {"oracle_k", "bottom-k size for overlap, 0 = min(100, n/10)", {C::oracle}},
        {"which", "experiment: detect, removal or valsweep", {C::experiment}},
        {"mechanism", "corruption: feature_noise, label_flip, backdoor_trigger, mixed", {C::experiment}},
        {"fraction", "fraction of training points corrupted", {C::experiment}},
        {"noise_scale", "std of injected feature noise", {C::experiment}},
        {"trigger_magnitude", "backdoor offset per triggered coordinate", {C::experiment}},
        {"target_class", "backdoor target label", {C::experiment}},
        {"repeats", "independent repetitions (seed, seed+1, ...)", {C::experiment}},
        {"detect_grid", "inspected fractions, comma separated (empty = 0.01..0.50)", {C::experiment}},
        {"removal_grid", "removed fractions, comma separated (empty = 0,0.05..0.30)", {C::experiment}},
        {"val_sizes", "validation sizes for valsweep, comma separated", {C::experiment}},
        {"knn_k", "neighbours of the k-NN proxy classifier", {C::experiment}},
        {"n_train", "synthetic training points", {C::experiment}},
        {"n_val", "synthetic validation points", {C::experiment}},
        {"n_test", "synthetic test points", {C::experiment}},
        {"val_pool", "synthetic validation pool for valsweep", {C::experiment}},
        {"n_classes", "synthetic class count", {C::experiment}},
        {"dim", "synthetic feature dimension", {C::experiment}},
        {"blob_spread", "distance of synthetic class centers from the origin", {C::experiment}},
        {"blob_scale", "std of synthetic blobs", {C::experiment}},
    };
    return keys;
}

std::string default_value(std::string_view key) {
    const RunConfig d;
    if (key == "train") return d.train;
    if (key == "val") return d.val;
    if (key == "test") return d.test;
    if (key == "out") return d.out;
    if (key == "classes") return std::to_string(d.classes);
    if (key == "sigma") return "median";
    if (key == "sample_pairs") return std::to_string(d.sample_pairs);
    if (key == "lambda") return fmt_double(d.lambda);
    if (key == "smoothing") return fmt_double(d.smoothing);
    if (key == "block_size") return std::to_string(d.block_size);
    if (key == "seed") return std::to_string(d.seed);
    if (key == "threads") return std::to_string(d.threads);
    if (key == "batch_size") return std::to_string(d.batch_size);
    if (key == "verify") return d.verify ? "true" : "false";
    if (key == "time_recompute") return d.time_recompute ? "true" : "false";
    if (key == "oracle_cap") return std::to_string(d.oracle_cap);
    if (key == "oracle_epsilon") return fmt_double(d.oracle_epsilon);
    if (key == "oracle_k") return std::to_string(d.oracle_k);
    if (key == "which") return d.which;
    if (key == "mechanism") return d.mechanism;
    if (key == "fraction") return fmt_double(d.fraction);
    if (key == "noise_scale") return fmt_double(d.noise_scale);
    if (key == "trigger_magnitude") return fmt_double(d.trigger_magnitude);
    if (key == "target_class") return std::to_string(d.target_class);
    if (key == "repeats") return std::to_string(d.repeats);
    if (key == "detect_grid") return join(d.detect_grid);
    if (key == "removal_grid") return join(d.removal_grid);
    if (key == "val_sizes") {
        std::string out;
        for (std::size_t i = 0; i < d.val_sizes.size(); ++i) out += (i ? "," : "") + std::to_string(d.val_sizes[i]);
        return out;
    }
    if (key == "knn_k") return std::to_string(d.knn_k);
    if (key == "n_train") return std::to_string(d.n_train);
    if (key == "n_val") return std::to_string(d.n_val);
    if (key == "n_test") return std::to_string(d.n_test);
    if (key == "val_pool") return std::to_string(d.val_pool);
    if (key == "n_classes") return std::to_string(d.n_classes);
    if (key == "dim") return std::to_string(d.dim);
    if (key == "blob_spread") return fmt_double(d.blob_spread);
    if (key == "blob_scale") return fmt_double(d.blob_scale);
    throw InputError("unknown config key '" + std::string(key) + "'");
}

void apply_config_text(RunConfig& config, std::string_view text, std::string_view origin) {
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        std::string_view line = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (!line.empty()) {
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) {
                throw InputError(std::string(origin) + ":" + std::to_string(line_no) + ": expected key = value");
            }
            const auto key = trim(line.substr(0, eq));
            try {
                config.set(key, line.substr(eq + 1));
            } catch (const InputError& e) {
                throw InputError(std::string(origin) + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        if (end == std::string_view::npos) break;
        start = end + 1;
    }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    apply_config_text(config, buffer.str(), path.string());
}

} // namespace mmdval
