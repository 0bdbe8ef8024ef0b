#include "mmdval/corrupt.hpp"

#include "mmdval/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace mmdval {

std::string_view to_string(Mechanism m) {
    switch (m) {
    case Mechanism::feature_noise: return "feature_noise";
    case Mechanism::label_flip: return "label_flip";
    case Mechanism::backdoor_trigger: return "backdoor_trigger";
    case Mechanism::mixed: return "mixed";
    }
    return "unknown";
}

std::optional<Mechanism> parse_mechanism(std::string_view name) {
    for (auto m : {Mechanism::feature_noise, Mechanism::label_flip, Mechanism::backdoor_trigger, Mechanism::mixed}) {
        if (name == to_string(m)) return m;
    }
    return std::nullopt;
}

bool CorruptionPlan::contains(std::size_t index) const {
    return std::binary_search(corrupted_indices.begin(), corrupted_indices.end(), index);
}

namespace {

void add_noise(Dataset& data, std::size_t row, double scale, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (auto& v : data.features.row(row)) {
        const double z = gauss(rng);
        v += scale * z;
    }
}

void flip_label(Dataset& data, std::size_t row, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> shift(1, data.num_classes - 1);
    data.labels[row] = (data.labels[row] + shift(rng)) % data.num_classes;
}

} // namespace

std::pair<Dataset, CorruptionPlan> corrupt(const Dataset& clean, const CorruptionRequest& request) {
    clean.validate();
    if (!(request.fraction > 0.0 && request.fraction < 1.0)) {
        throw InputError("corruption fraction must lie in (0, 1), got " + std::to_string(request.fraction));
    }
    const std::size_t n = clean.size();
    const auto count = static_cast<std::size_t>(std::llround(request.fraction * static_cast<double>(n)));
    if (count == 0) {
        throw InputError("corruption fraction " + std::to_string(request.fraction) + " selects no rows out of " +
                         std::to_string(n));
    }
    if (request.mechanism == Mechanism::backdoor_trigger &&
        (request.target_class < 0 || request.target_class >= clean.num_classes)) {
        throw InputError("backdoor target class " + std::to_string(request.target_class) + " not in [0, " +
                         std::to_string(clean.num_classes) + ")");
    }
    if (request.noise_scale < 0.0 || !std::isfinite(request.noise_scale)) {
        throw InputError("noise scale must be finite and non-negative");
    }

    std::mt19937_64 rng(request.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::shuffle(order.begin(), order.end(), rng);
    std::vector<std::size_t> selected(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(count));

    CorruptionPlan plan;
    plan.mechanism = request.mechanism;
    plan.fraction = request.fraction;
    plan.seed = request.seed;
    plan.target_class = request.target_class;

    switch (request.mechanism) {
    case Mechanism::feature_noise:
        plan.feature_indices = selected;
        plan.noise_scale = request.noise_scale;
        break;
    case Mechanism::label_flip:
        plan.label_indices = selected;
        break;
    case Mechanism::backdoor_trigger:
        plan.feature_indices = selected;
        plan.label_indices = selected;
        break;
    case Mechanism::mixed: {
        const std::size_t half = (count + 1) / 2;
        plan.feature_indices.assign(selected.begin(), selected.begin() + static_cast<std::ptrdiff_t>(half));
        plan.label_indices.assign(selected.begin() + static_cast<std::ptrdiff_t>(half), selected.end());
        plan.noise_scale = request.noise_scale;
        break;
    }
    }
    std::sort(plan.feature_indices.begin(), plan.feature_indices.end());
    std::sort(plan.label_indices.begin(), plan.label_indices.end());
    std::sort(selected.begin(), selected.end());
    plan.corrupted_indices = std::move(selected);

    Dataset out = clean;
    if (request.mechanism == Mechanism::backdoor_trigger) {
        const std::size_t triggered = (clean.dim() + 9) / 10;
        plan.trigger_offset.assign(clean.dim(), 0.0);
        std::fill_n(plan.trigger_offset.begin(), triggered, request.trigger_magnitude);
        for (const auto row : plan.corrupted_indices) {
            auto feats = out.features.row(row);
            for (std::size_t c = 0; c < feats.size(); ++c) feats[c] += plan.trigger_offset[c];
            out.labels[row] = request.target_class;
        }
    } else {
        for (const auto row : plan.feature_indices) add_noise(out, row, request.noise_scale, rng);
        for (const auto row : plan.label_indices) flip_label(out, row, rng);
    }
    return {std::move(out), std::move(plan)};
}

} // namespace mmdval
