#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mmdval {

enum class Command { value, stream, oracle, experiment };

/// Every tunable of the command-line tool. Defaults are the documented ones;
/// config files and flags override them key by key.
struct RunConfig {
    // inputs and outputs
    std::string train;
    std::string val;
    std::string test;
    std::string out = ".";
    int classes = 0;  // 0 = infer from labels

    // scoring
    std::optional<double> sigma;  // unset = median heuristic
    std::size_t sample_pairs = 10000;
    double lambda = 0.03;
    double smoothing = 1e-8;
    std::size_t block_size = 1024;
    std::uint64_t seed = 0;
    unsigned threads = 0;

    // stream
    std::size_t batch_size = 100;
    bool verify = false;
    bool time_recompute = true;

    // oracle
    std::size_t oracle_cap = 2000;
    double oracle_epsilon = 1e-4;
    std::size_t oracle_k = 0;  // 0 = min(100, max(1, n / 10))

    // experiment
    std::string which = "detect";
    std::string mechanism = "label_flip";
    double fraction = 0.2;
    double noise_scale = 1.0;
    double trigger_magnitude = 3.0;
    int target_class = 0;
    std::size_t repeats = 5;
    std::vector<double> detect_grid;   // empty = 0.01..0.50
    std::vector<double> removal_grid;  // empty = 0, 0.05 .. 0.30
    std::vector<std::size_t> val_sizes{10, 30, 100, 300};
    std::size_t knn_k = 5;

    // synthetic data for experiments run without --train
    std::size_t n_train = 2000;
    std::size_t n_val = 300;
    std::size_t n_test = 600;
    std::size_t val_pool = 1000;
    int n_classes = 3;
    std::size_t dim = 2;
    double blob_spread = 4.0;
    double blob_scale = 0.5;

    /// Sets one key from its textual value. Throws InputError on unknown keys
    /// or unparsable values.
    void set(std::string_view key, std::string_view value);
};

struct ConfigKey {
    std::string_view key;
    std::string_view help;
    std::vector<Command> commands;  // empty = shared by every command
};

/// Every settable key, in help order.
const std::vector<ConfigKey>& config_keys();

/// Textual default of a key, as shown by --help.
std::string default_value(std::string_view key);

/// `key = value` lines; `#` starts a comment; blank lines ignored.
void apply_config_text(RunConfig& config, std::string_view text, std::string_view origin = "config");
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

} // namespace mmdval
