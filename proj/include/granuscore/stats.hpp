#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace granuscore {

struct StatTestResult {
    std::string test;
    double statistic = 0.0;
    double p_value = 1.0;
    std::optional<double> effect_size; // Cohen's d_z where applicable
    size_t n = 0;
};

enum class Tail { two_sided, greater, less };

// Special functions used by the tests below.
double normal_cdf(double z);
double normal_sf(double z);
// Regularized incomplete beta I_x(a, b) via continued fraction.
double incomplete_beta(double a, double b, double x);
double student_t_sf(double t, double df); // P(T > t)

double cohens_dz(const std::vector<double>& diffs); // mean/std (ddof=1); zero variance -> error

StatTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b,
                             Tail tail = Tail::two_sided);

// Exact null distribution for n <= 25 without ties among |diffs|; normal
// approximation with tie correction otherwise. Zero diffs are dropped;
// all-zero input is a degenerate-test error.
StatTestResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b,
                                    Tail tail = Tail::two_sided);

// Normal approximation with tie correction and continuity correction.
StatTestResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                              Tail tail = Tail::two_sided);

// Paired bootstrap over per-item outcomes; p is the fraction of resamples
// where mean(a) <= mean(b), ties counting 1/2 (so identical inputs sit at
// 0.5). Deterministic under seed.
StatTestResult bootstrap_diff_test(const std::vector<double>& a, const std::vector<double>& b,
                                   size_t n_resamples = 20000, uint64_t seed = 0);

// Kendall tau-b via the Knight O(n log n) route (tie-corrected).
double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y);

double pearson_r(const std::vector<double>& x, const std::vector<double>& y);

// Rank-based (Mann-Whitney) AUC of scores against binary labels, ties at 1/2.
double auc_from_scores(const std::vector<double>& scores, const std::vector<int>& labels);

// Maximum-likelihood logistic fit (intercept + one feature) by Newton steps
// to gradient tolerance 1e-8.
struct LogisticFit {
    double intercept = 0.0;
    double slope = 0.0;
    size_t iterations = 0;
    double predict(double x) const;
};
LogisticFit fit_logistic(const std::vector<double>& x, const std::vector<int>& y);

// Stratified fold ids (0..k-1), deterministic under seed.
std::vector<size_t> stratified_folds(const std::vector<int>& labels, size_t k, uint64_t seed);

} // namespace granuscore
