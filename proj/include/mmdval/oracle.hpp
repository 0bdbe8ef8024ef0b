#pragma once

#include "mmdval/dataset.hpp"
#include "mmdval/kernel.hpp"

#include <span>
#include <vector>

namespace mmdval {

/// Brute-force reference valuations, meant for a few thousand points at most.
/// Everything here is computed from its own kernel loops, independently of
/// the influence scorer.

/// Exact leave-one-out change of the unbiased squared MMD, oriented so that
/// valuable points score high:
///   value_i = MMD2_u(val, train \ {i}) - MMD2_u(val, train).
/// Uses cached kernel sums; O(n^2 + n n_val) overall.
std::vector<double> loo_mmd_values(const Dataset& train, const Dataset& validation, const KernelSpec& spec);

/// Same quantity with one full mmd2 recomputation per removed point.
std::vector<double> loo_mmd_values_naive(const Dataset& train, const Dataset& validation, const KernelSpec& spec);

/// Finite-epsilon influence quotient
///   -(MMD(P, (1 - eps) Q + eps delta_{x_i}) - MMD(P, Q)) / eps,
/// P uniform on validation, Q uniform on train, MMD from weighted kernel sums.
class DirectionalDerivativeOracle {
public:
    DirectionalDerivativeOracle(const Dataset& train, const Dataset& validation, const KernelSpec& spec);

    double evaluate(std::size_t i, double epsilon) const;
    std::size_t size() const noexcept { return val_mean_.size(); }

private:
    std::vector<double> val_mean_;    // b_a = mean_v k(v, x_a)
    std::vector<double> train_mean_;  // (K u)_a = mean_b k(x_a, x_b), self term included
    double val_mean_bar_ = 0.0;       // mean_a b_a
    double quad_ = 0.0;               // u^T K u
    double base_mmd2_ = 0.0;          // MMD^2(P, Q), V-statistic
};

double numeric_directional_derivative(const Dataset& train, const Dataset& validation, const KernelSpec& spec,
                                      std::size_t i, double epsilon);

std::vector<double> numeric_directional_derivatives(const Dataset& train, const Dataset& validation,
                                                    const KernelSpec& spec, double epsilon);

struct RankAgreement {
    double spearman = 0.0;
    double top_k_overlap = 0.0;  // shared fraction of the two bottom-k sets
    std::size_t k = 0;
};

/// Average ranks (1-based) with ties sharing their mean rank.
std::vector<double> average_ranks(std::span<const double> values);
double pearson(std::span<const double> a, std::span<const double> b);
double spearman(std::span<const double> a, std::span<const double> b);

RankAgreement rank_agreement(std::span<const double> scores_a, std::span<const double> scores_b, std::size_t k);

} // namespace mmdval
