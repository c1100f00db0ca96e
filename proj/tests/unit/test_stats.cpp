#include "granuscore/errors.hpp"
#include "granuscore/rng.hpp"
#include "granuscore/stats.hpp"

#include "../support/oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace granuscore;

TEST_CASE("student t survival function against table values") {
    CHECK(student_t_sf(2.0, 9) == doctest::Approx(0.03827641188535047).epsilon(1e-10));
    CHECK(student_t_sf(1.5, 4) == doctest::Approx(0.104).epsilon(1e-10));
    CHECK(student_t_sf(3.2, 29) == doctest::Approx(0.0016592212317408739).epsilon(1e-9));
    CHECK(student_t_sf(0.0, 7) == doctest::Approx(0.5));
    CHECK(student_t_sf(-2.0, 9) == doctest::Approx(1.0 - 0.03827641188535047).epsilon(1e-10));
}

TEST_CASE("paired tests match the frozen worked example") {
    // frozen 10-pair before/after sample; expected values computed with an
    // independent statistics package
    std::vector<double> before{125, 132, 138, 120, 126, 127, 136, 139, 131, 132};
    std::vector<double> after{118, 134, 130, 124, 105, 130, 131, 133, 122, 121};

    StatTestResult t = paired_t_test(before, after);
    CHECK(t.statistic == doctest::Approx(2.437443393860287).epsilon(1e-12));
    CHECK(t.p_value == doctest::Approx(0.03752165616454831).epsilon(1e-9));

    StatTestResult w = wilcoxon_signed_rank(before, after);
    CHECK(w.statistic == doctest::Approx(6.0));
    CHECK(w.p_value == doctest::Approx(0.02734375).epsilon(1e-12)); // exact

    StatTestResult wg = wilcoxon_signed_rank(before, after, Tail::greater);
    CHECK(wg.p_value == doctest::Approx(0.013671875).epsilon(1e-12));

    std::vector<double> diffs(before.size());
    for (size_t i = 0; i < before.size(); ++i) diffs[i] = before[i] - after[i];
    CHECK(cohens_dz(diffs) == doctest::Approx(0.7707872792329382).epsilon(1e-12));
}

TEST_CASE("degenerate paired inputs raise") {
    std::vector<double> a{2, 3, 4};
    std::vector<double> b{1, 2, 3}; // diffs all +1, zero variance
    std::vector<double> d{1, 1, 1};
    CHECK_THROWS_AS(cohens_dz(d), UndefinedMetricError);
    CHECK_THROWS_AS(paired_t_test(a, b), UndefinedMetricError);
    CHECK_THROWS_AS(wilcoxon_signed_rank(a, a), UndefinedMetricError); // all-zero diffs
    CHECK_THROWS_AS(paired_t_test(a, std::vector<double>{1.0}), DataError);
}

TEST_CASE("mann-whitney u against the frozen example") {
    std::vector<double> a{3.1, 4.5, 2.8, 5.0, 3.9, 4.1, 2.5};
    std::vector<double> b{5.5, 6.1, 4.9, 6.3, 5.8, 4.7, 6.0, 5.2};
    StatTestResult r = mann_whitney_u(a, b);
    CHECK(r.statistic == doctest::Approx(2.0));
    CHECK(r.p_value == doctest::Approx(0.0031669403816566894).epsilon(1e-9));
    // identical samples: U near the midpoint, p near 1
    StatTestResult same = mann_whitney_u(a, a);
    CHECK(same.p_value > 0.9);
}

TEST_CASE("wilcoxon normal approximation with ties") {
    // 30 pairs with many tied |differences| force the approximation branch
    StreamRng rng(3);
    std::vector<double> a(30), b(30);
    for (size_t i = 0; i < a.size(); ++i) {
        a[i] = std::floor(rng.next_double() * 4.0) + 1.0;
        b[i] = a[i] - (i % 3 == 0 ? 1.0 : -1.0);
    }
    StatTestResult r = wilcoxon_signed_rank(a, b);
    CHECK(r.p_value > 0.0);
    CHECK(r.p_value <= 1.0);
    CHECK(r.n == 30);
}

TEST_CASE("bootstrap null and dominance cases") {
    StreamRng rng(5);
    std::vector<double> base(400);
    for (auto& x : base) x = rng.next_double() < 0.7 ? 1.0 : 0.0;

    // identical inputs sit exactly at 0.5 (ties count half)
    StatTestResult same = bootstrap_diff_test(base, base, 2000, 1);
    CHECK(same.p_value == doctest::Approx(0.5));

    // a dominates -> p -> 0 (p is P[mean(a) <= mean(b)])
    std::vector<double> better(base.size());
    for (size_t i = 0; i < base.size(); ++i) better[i] = base[i] + 1.0;
    StatTestResult dom = bootstrap_diff_test(better, base, 2000, 1);
    CHECK(dom.p_value == doctest::Approx(0.0));

    // reproducible bitwise under a fixed seed
    StatTestResult r1 = bootstrap_diff_test(base, better, 5000, 42);
    StatTestResult r2 = bootstrap_diff_test(base, better, 5000, 42);
    CHECK(r1.p_value == r2.p_value);
}

TEST_CASE("bootstrap agrees with a high-resample oracle run") {
    // synthetic 1000-item paired outcomes with a known small effect
    StreamRng rng(8);
    std::vector<double> a(1000), b(1000);
    for (size_t i = 0; i < a.size(); ++i) {
        double u = rng.next_double();
        a[i] = u < 0.62 ? 1.0 : 0.0;
        b[i] = rng.next_double() < 0.58 ? 1.0 : 0.0;
    }
    double p_small = bootstrap_diff_test(a, b, 20000, 3).p_value;
    double p_oracle = bootstrap_diff_test(a, b, 200000, 1234).p_value; // independent run
    CHECK(std::fabs(p_small - p_oracle) <= 0.01);
}

TEST_CASE("kendall tau-b against brute force and frozen value") {
    std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y{0.1, 0.3, 0.2, 0.9, 0.9};
    CHECK(kendall_tau_b(x, y) == doctest::Approx(0.7378647873726218).epsilon(1e-12));
    CHECK(kendall_tau_b(x, x) == doctest::Approx(1.0));
    std::vector<double> rev{5, 4, 3, 2, 1};
    CHECK(kendall_tau_b(x, rev) == doctest::Approx(-1.0));

    StreamRng rng(13);
    for (int trial = 0; trial < 200; ++trial) {
        size_t n = 2 + rng.next_below(30);
        std::vector<double> a(n), b(n);
        for (auto& v : a) v = std::floor(rng.next_double() * 6.0);
        for (auto& v : b) v = std::floor(rng.next_double() * 6.0);
        double impl, oracle;
        bool impl_threw = false, oracle_threw = false;
        try {
            impl = kendall_tau_b(a, b);
        } catch (const UndefinedMetricError&) {
            impl_threw = true;
        }
        try {
            oracle = granuscore::testsupport::oracle_kendall_tau(a, b);
        } catch (const UndefinedMetricError&) {
            oracle_threw = true;
        }
        REQUIRE(impl_threw == oracle_threw);
        if (!impl_threw) CHECK(impl == doctest::Approx(oracle).epsilon(1e-12));
    }
    CHECK_THROWS_AS(kendall_tau_b({1, 1, 1}, {1, 2, 3}), UndefinedMetricError);
}

TEST_CASE("pearson r") {
    CHECK(pearson_r({1, 2, 3, 4, 5}, {2, 1, 4, 3, 5}) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(pearson_r({1, 2, 3}, {4, 5, 6}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(pearson_r({1, 1, 1}, {1, 2, 3}), UndefinedMetricError);
}

TEST_CASE("auc from scores") {
    // perfect separation
    CHECK(auc_from_scores({0.1, 0.2, 0.8, 0.9}, {0, 0, 1, 1}) == doctest::Approx(1.0));
    // random-like: label-independent constant scores give 0.5 via midranks
    CHECK(auc_from_scores({0.5, 0.5, 0.5, 0.5}, {0, 1, 0, 1}) == doctest::Approx(0.5));
    CHECK_THROWS_AS(auc_from_scores({0.1, 0.2}, {1, 1}), UndefinedMetricError);
}

TEST_CASE("logistic fit recovers a known separator") {
    StreamRng rng(21);
    std::vector<double> x;
    std::vector<int> y;
    // P(y=1|x) = sigmoid(-1 + 2x)
    for (int i = 0; i < 4000; ++i) {
        double v = -3.0 + 6.0 * rng.next_double();
        double p = 1.0 / (1.0 + std::exp(-(-1.0 + 2.0 * v)));
        x.push_back(v);
        y.push_back(rng.next_double() < p ? 1 : 0);
    }
    LogisticFit fit = fit_logistic(x, y);
    CHECK(fit.intercept == doctest::Approx(-1.0).epsilon(0.25));
    CHECK(fit.slope == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("stratified folds balance both classes") {
    std::vector<int> labels(100, 0);
    for (size_t i = 0; i < 20; ++i) labels[i] = 1;
    auto folds = stratified_folds(labels, 5, 7);
    std::vector<int> pos_per_fold(5, 0), total_per_fold(5, 0);
    for (size_t i = 0; i < labels.size(); ++i) {
        total_per_fold[folds[i]] += 1;
        if (labels[i]) pos_per_fold[folds[i]] += 1;
    }
    for (int k = 0; k < 5; ++k) {
        CHECK(total_per_fold[k] == 20);
        CHECK(pos_per_fold[k] == 4);
    }
}
