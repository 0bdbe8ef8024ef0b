#pragma once

#include "mmdval/dataset.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mmdval {

enum class Mechanism { feature_noise, label_flip, backdoor_trigger, mixed };

std::string_view to_string(Mechanism m);
std::optional<Mechanism> parse_mechanism(std::string_view name);

struct CorruptionRequest {
    Mechanism mechanism = Mechanism::label_flip;
    double fraction = 0.2;
    std::uint64_t seed = 0;
    double noise_scale = 1.0;        // feature_noise std
    double trigger_magnitude = 3.0;  // backdoor offset per triggered coordinate
    int target_class = 0;            // backdoor label override
};

/// Ground truth for one corruption pass.
struct CorruptionPlan {
    Mechanism mechanism = Mechanism::label_flip;
    double fraction = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::size_t> corrupted_indices;  // ascending
    std::vector<std::size_t> feature_indices;    // rows whose features changed, ascending
    std::vector<std::size_t> label_indices;      // rows whose labels changed or were overridden, ascending
    double noise_scale = 0.0;
    std::vector<double> trigger_offset;  // length d, backdoor only
    int target_class = 0;

    bool contains(std::size_t index) const;
};

/// Returns a corrupted copy of `clean` plus the plan describing what changed.
/// Rows outside the plan are copied verbatim.
std::pair<Dataset, CorruptionPlan> corrupt(const Dataset& clean, const CorruptionRequest& request);

} // namespace mmdval
