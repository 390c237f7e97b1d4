#pragma once

// SNR decomposition, correlation statistics with significance, the
// arcsine closed form linking SNR to Spearman under bivariate normality,
// and the sampling experiments built on them.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cesim/errors.hpp"
#include "cesim/rng.hpp"

namespace cesim {

struct PairedSample {
    std::string label;
    std::vector<double> full;  // q_i
    std::vector<double> proxy; // q_hat_i
    std::vector<std::string> datasets; // optional, empty or size n

    size_t size() const { return full.size(); }
};

struct SnrReport {
    double sigma2_arch = 0.0;
    double sigma2_noise = 0.0;
    double snr = 0.0;
    bool infinite = false; // zero residual variance
    uint64_t n = 0;
};

// Unbiased (n-1) variances of full accuracies and of full-proxy residuals.
SnrReport snr(const PairedSample& s);

double pearson(std::span<const double> x, std::span<const double> y);

// Average ranks (midranks for ties).
std::vector<double> average_ranks(std::span<const double> x);

struct SpearmanResult {
    double rho = 0.0;
    double p_two_tailed = 1.0; // t approximation, n-2 dof
};

SpearmanResult spearman(std::span<const double> x, std::span<const double> y);

// Two-tailed p of the t approximation, t = rho sqrt((n-2)/(1-rho^2)), n-2 dof.
double spearman_p_from_rho(double rho, uint64_t n);

// Monte-Carlo permutation p for verification of the t approximation.
double spearman_permutation_p(std::span<const double> x, std::span<const double> y,
                              uint64_t shuffles, rng::Stream rng);

double kendall_tau_b(std::span<const double> x, std::span<const double> y);

// Each p multiplied by `multiplier` (list size when 0), clamped at 1.
std::vector<double> bonferroni(std::span<const double> p_values, size_t multiplier = 0);

// Population Pearson correlation (1 + 1/snr)^(-1/2); snr must be > 0.
double rho_p_from_snr(double snr_value);

// (6/pi) asin(rho_p/2): population Spearman under bivariate normality.
double rho_s_closed_form(double snr_value);

// 1 - C/snr with C = sqrt(3)/pi, defined only for snr >= C.
std::optional<double> rho_s_lower_bound(double snr_value);
inline constexpr double kRhoBoundConstant = 0.55132889542179204; // sqrt(3)/pi

// q ~ N(0, 1), proxy = q + xi with Var(xi) = 1/snr; optional ceiling clips
// both coordinates from above at c (mass atom at c).
PairedSample sample_bivariate(double snr_value, size_t n, rng::Stream rng,
                              std::optional<double> ceiling = std::nullopt);

struct OrderingExperimentReport {
    uint64_t replicates = 0;
    double top_group_match_rate = 0.0;  // highest-SNR group has largest Spearman
    double full_order_match_rate = 0.0; // every strict SNR ordering preserved
    std::vector<double> ns_rate;        // per group, fraction of p > 0.05
    std::vector<double> mean_rho;       // per group
};

OrderingExperimentReport ordering_experiment(std::span<const double> snrs,
                                             std::span<const size_t> group_sizes,
                                             uint64_t replicates, rng::Stream rng);

struct CorrelationReport {
    double pearson_r = 0.0;
    double spearman_rho = 0.0;
    double spearman_p = 1.0;
    double kendall_tau = 0.0;
    double bonferroni_p = 1.0;
    uint64_t n = 0;
};

CorrelationReport correlation_report(const PairedSample& s, size_t bonferroni_multiplier);

} // namespace cesim
