#include "granuscore/stats.hpp"

#include "granuscore/errors.hpp"
#include "granuscore/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace granuscore {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }
double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

namespace {

// Continued fraction for the incomplete beta (Numerical Recipes style Lentz).
double betacf(double a, double b, double x) {
    constexpr int kMaxIter = 300;
    constexpr double kEps = 3e-16;
    constexpr double kFpMin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kFpMin) d = kFpMin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kFpMin) d = kFpMin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kFpMin) c = kFpMin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) break;
    }
    return h;
}

} // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                      b * std::log(1.0 - x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_sf(double t, double df) {
    double x = df / (df + t * t);
    double p = 0.5 * incomplete_beta(df / 2.0, 0.5, x);
    return t >= 0.0 ? p : 1.0 - p;
}

namespace {

double tail_p(double p_greater, Tail tail) {
    switch (tail) {
        case Tail::greater: return p_greater;
        case Tail::less: return 1.0 - p_greater;
        case Tail::two_sided: return std::min(1.0, 2.0 * std::min(p_greater, 1.0 - p_greater));
    }
    return 1.0;
}

std::vector<double> paired_diffs(const std::vector<double>& a, const std::vector<double>& b,
                                 const char* who) {
    if (a.size() != b.size()) {
        throw DataError(std::string(who) + ": paired samples of different length (" +
                        std::to_string(a.size()) + " vs " + std::to_string(b.size()) + ")");
    }
    if (a.empty()) throw DataError(std::string(who) + ": empty samples");
    std::vector<double> d(a.size());
    for (size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

// Midranks of v (average rank for ties), 1-based.
std::vector<double> midranks(const std::vector<double>& v) {
    size_t n = v.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) { return v[i] < v[j]; });
    std::vector<double> rank(n);
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && v[order[j + 1]] == v[order[i]]) ++j;
        double r = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (size_t k = i; k <= j; ++k) rank[order[k]] = r;
        i = j + 1;
    }
    return rank;
}

} // namespace

double cohens_dz(const std::vector<double>& diffs) {
    if (diffs.size() < 2) throw DataError("cohens_dz needs at least 2 pairs");
    double mean = std::accumulate(diffs.begin(), diffs.end(), 0.0) /
                  static_cast<double>(diffs.size());
    double ss = 0.0;
    for (double d : diffs) ss += (d - mean) * (d - mean);
    double sd = std::sqrt(ss / static_cast<double>(diffs.size() - 1));
    if (sd == 0.0) {
        throw UndefinedMetricError("cohens_dz undefined: paired differences have zero variance");
    }
    return mean / sd;
}

StatTestResult paired_t_test(const std::vector<double>& a, const std::vector<double>& b,
                             Tail tail) {
    std::vector<double> d = paired_diffs(a, b, "paired_t_test");
    if (d.size() < 2) throw DataError("paired_t_test needs at least 2 pairs");
    double n = static_cast<double>(d.size());
    double mean = std::accumulate(d.begin(), d.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : d) ss += (x - mean) * (x - mean);
    double sd = std::sqrt(ss / (n - 1.0));
    if (sd == 0.0) {
        throw UndefinedMetricError("paired_t_test degenerate: zero-variance differences");
    }
    double t = mean / (sd / std::sqrt(n));
    StatTestResult r;
    r.test = "paired_t";
    r.statistic = t;
    r.p_value = tail_p(student_t_sf(t, n - 1.0), tail);
    r.effect_size = mean / sd;
    r.n = d.size();
    return r;
}

StatTestResult wilcoxon_signed_rank(const std::vector<double>& a, const std::vector<double>& b,
                                    Tail tail) {
    std::vector<double> d = paired_diffs(a, b, "wilcoxon_signed_rank");
    std::vector<double> nz;
    for (double x : d) {
        if (x != 0.0) nz.push_back(x);
    }
    if (nz.empty()) {
        throw UndefinedMetricError("wilcoxon_signed_rank degenerate: all differences are zero");
    }
    size_t m = nz.size();
    std::vector<double> abs_d(m);
    for (size_t i = 0; i < m; ++i) abs_d[i] = std::fabs(nz[i]);
    std::vector<double> rank = midranks(abs_d);
    double w_plus = 0.0;
    for (size_t i = 0; i < m; ++i) {
        if (nz[i] > 0.0) w_plus += rank[i];
    }

    bool has_ties = false;
    {
        std::vector<double> sorted = abs_d;
        std::sort(sorted.begin(), sorted.end());
        has_ties = std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
    }

    StatTestResult r;
    r.test = "wilcoxon_signed_rank";
    r.n = m;
    double total = static_cast<double>(m) * static_cast<double>(m + 1) / 2.0;
    r.statistic = std::min(w_plus, total - w_plus);

    if (!has_ties && m <= 25) {
        // exact: subset-sum distribution of ranks 1..m
        size_t max_sum = m * (m + 1) / 2;
        std::vector<double> counts(max_sum + 1, 0.0);
        counts[0] = 1.0;
        for (size_t rk = 1; rk <= m; ++rk) {
            for (size_t s = max_sum; s >= rk; --s) counts[s] += counts[s - rk];
        }
        double denom = std::ldexp(1.0, static_cast<int>(m)); // 2^m
        auto cdf_le = [&](double w) {
            double acc = 0.0;
            for (size_t s = 0; s <= max_sum && static_cast<double>(s) <= w + 1e-9; ++s) {
                acc += counts[s];
            }
            return acc / denom;
        };
        double p_ge = 1.0 - cdf_le(w_plus - 1.0);
        double p_le = cdf_le(w_plus);
        switch (tail) {
            case Tail::greater: r.p_value = p_ge; break;
            case Tail::less: r.p_value = p_le; break;
            case Tail::two_sided: r.p_value = std::min(1.0, 2.0 * std::min(p_ge, p_le)); break;
        }
        return r;
    }

    // normal approximation with tie correction
    double mn = total / 2.0;
    double var = static_cast<double>(m) * (m + 1.0) * (2.0 * m + 1.0) / 24.0;
    {
        std::vector<double> sorted = abs_d;
        std::sort(sorted.begin(), sorted.end());
        size_t i = 0;
        while (i < sorted.size()) {
            size_t j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
            double t = static_cast<double>(j - i + 1);
            var -= (t * t * t - t) / 48.0;
            i = j + 1;
        }
    }
    if (var <= 0.0) {
        throw UndefinedMetricError("wilcoxon_signed_rank degenerate: zero variance after ties");
    }
    double z = (w_plus - mn) / std::sqrt(var);
    r.p_value = tail_p(normal_sf(z), tail);
    return r;
}

StatTestResult mann_whitney_u(const std::vector<double>& a, const std::vector<double>& b,
                              Tail tail) {
    if (a.empty() || b.empty()) throw DataError("mann_whitney_u: empty sample");
    size_t n1 = a.size(), n2 = b.size();
    std::vector<double> pooled;
    pooled.reserve(n1 + n2);
    pooled.insert(pooled.end(), a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    std::vector<double> rank = midranks(pooled);
    double r1 = 0.0;
    for (size_t i = 0; i < n1; ++i) r1 += rank[i];
    double u1 = r1 - static_cast<double>(n1) * (n1 + 1.0) / 2.0;

    double n = static_cast<double>(n1 + n2);
    double tie_term = 0.0;
    {
        std::vector<double> sorted = pooled;
        std::sort(sorted.begin(), sorted.end());
        size_t i = 0;
        while (i < sorted.size()) {
            size_t j = i;
            while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
            double t = static_cast<double>(j - i + 1);
            tie_term += t * t * t - t;
            i = j + 1;
        }
    }
    double mean_u = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
    double var_u = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                   ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (var_u <= 0.0) {
        throw UndefinedMetricError("mann_whitney_u degenerate: zero rank variance");
    }
    // continuity correction toward the mean
    double num = u1 - mean_u;
    double cc = 0.5;
    double z;
    switch (tail) {
        case Tail::greater: z = (num - cc) / std::sqrt(var_u); break;
        case Tail::less: z = (num + cc) / std::sqrt(var_u); break;
        case Tail::two_sided:
        default:
            z = (num - (num > 0 ? cc : num < 0 ? -cc : 0.0)) / std::sqrt(var_u);
            break;
    }
    StatTestResult r;
    r.test = "mann_whitney_u";
    r.statistic = u1;
    r.n = n1 + n2;
    if (tail == Tail::two_sided) {
        r.p_value = std::min(1.0, 2.0 * normal_sf(std::fabs(z)));
    } else {
        r.p_value = tail_p(normal_sf(z), tail);
    }
    return r;
}

StatTestResult bootstrap_diff_test(const std::vector<double>& a, const std::vector<double>& b,
                                   size_t n_resamples, uint64_t seed) {
    if (a.size() != b.size()) {
        throw DataError("bootstrap_diff_test: pairing error, samples of different length");
    }
    if (a.empty()) throw DataError("bootstrap_diff_test: empty samples");
    size_t n = a.size();
    double wins = 0.0; // resamples with mean(a) <= mean(b); exact ties count half
    for (size_t r = 0; r < n_resamples; ++r) {
        StreamRng rng(seed, 0xb007000000ULL + r);
        double sum_a = 0.0, sum_b = 0.0;
        for (size_t i = 0; i < n; ++i) {
            size_t idx = static_cast<size_t>(rng.next_below(n));
            sum_a += a[idx];
            sum_b += b[idx];
        }
        if (sum_a < sum_b) {
            wins += 1.0;
        } else if (sum_a == sum_b) {
            wins += 0.5;
        }
    }
    StatTestResult res;
    res.test = "bootstrap_diff";
    double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / static_cast<double>(n);
    double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / static_cast<double>(n);
    res.statistic = mean_a - mean_b;
    res.p_value = wins / static_cast<double>(n_resamples);
    res.n = n;
    return res;
}

namespace {

// Inversion count by mergesort; `v` ends up sorted.
uint64_t merge_count(std::vector<double>& v) {
    size_t n = v.size();
    if (n < 2) return 0;
    std::vector<double> tmp(n);
    uint64_t swaps = 0;
    for (size_t width = 1; width < n; width *= 2) {
        for (size_t lo = 0; lo < n; lo += 2 * width) {
            size_t mid = std::min(lo + width, n);
            size_t hi = std::min(lo + 2 * width, n);
            size_t i = lo, j = mid, k = lo;
            while (i < mid && j < hi) {
                if (v[j] < v[i]) {
                    swaps += mid - i;
                    tmp[k++] = v[j++];
                } else {
                    tmp[k++] = v[i++];
                }
            }
            while (i < mid) tmp[k++] = v[i++];
            while (j < hi) tmp[k++] = v[j++];
            std::copy(tmp.begin() + static_cast<long>(lo), tmp.begin() + static_cast<long>(hi),
                      v.begin() + static_cast<long>(lo));
        }
    }
    return swaps;
}

double tie_pairs(const std::vector<double>& sorted) {
    double total = 0.0;
    size_t i = 0;
    while (i < sorted.size()) {
        size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        double t = static_cast<double>(j - i + 1);
        total += t * (t - 1.0) / 2.0;
        i = j + 1;
    }
    return total;
}

} // namespace

double kendall_tau_b(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DataError("kendall_tau_b: length mismatch");
    size_t n = x.size();
    if (n < 2) throw UndefinedMetricError("kendall_tau_b needs at least 2 points");
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](size_t i, size_t j) {
        if (x[i] != x[j]) return x[i] < x[j];
        return y[i] < y[j];
    });

    double n0 = static_cast<double>(n) * (n - 1.0) / 2.0;
    // x ties and joint ties over the (x, y)-sorted sequence
    double n1 = 0.0, n3 = 0.0;
    {
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
            double t = static_cast<double>(j - i + 1);
            n1 += t * (t - 1.0) / 2.0;
            size_t a = i;
            while (a <= j) {
                size_t b = a;
                while (b + 1 <= j && y[order[b + 1]] == y[order[a]]) ++b;
                double u = static_cast<double>(b - a + 1);
                n3 += u * (u - 1.0) / 2.0;
                a = b + 1;
            }
            i = j + 1;
        }
    }
    std::vector<double> ys(n);
    for (size_t i = 0; i < n; ++i) ys[i] = y[order[i]];
    uint64_t swaps = merge_count(ys); // ys now sorted by y
    double n2 = tie_pairs(ys);

    double concordant_minus_discordant = n0 - n1 - n2 + n3 - 2.0 * static_cast<double>(swaps);
    double denom = std::sqrt((n0 - n1) * (n0 - n2));
    if (denom == 0.0) {
        throw UndefinedMetricError("kendall_tau_b undefined: one variable is constant");
    }
    return concordant_minus_discordant / denom;
}

double pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw DataError("pearson_r: length mismatch");
    size_t n = x.size();
    if (n < 2) throw UndefinedMetricError("pearson_r needs at least 2 points");
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t i = 0; i < n; ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw UndefinedMetricError("pearson_r undefined: zero variance input");
    }
    return sxy / std::sqrt(sxx * syy);
}

double auc_from_scores(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) throw DataError("auc: length mismatch");
    size_t n_pos = 0, n_neg = 0;
    for (int l : labels) (l ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0) {
        throw UndefinedMetricError("auc undefined: a class is empty");
    }
    std::vector<double> rank = midranks(scores);
    double r_pos = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        if (labels[i]) r_pos += rank[i];
    }
    double n_pos_d = static_cast<double>(n_pos);
    return (r_pos - n_pos_d * (n_pos_d + 1.0) / 2.0) /
           (n_pos_d * static_cast<double>(n_neg));
}

double LogisticFit::predict(double x) const {
    return 1.0 / (1.0 + std::exp(-(intercept + slope * x)));
}

LogisticFit fit_logistic(const std::vector<double>& x, const std::vector<int>& y) {
    if (x.size() != y.size() || x.empty()) throw DataError("fit_logistic: bad input shape");
    LogisticFit fit;
    constexpr double kTol = 1e-8;
    constexpr size_t kMaxIter = 500;
    for (size_t iter = 0; iter < kMaxIter; ++iter) {
        double g0 = 0.0, g1 = 0.0;
        double h00 = 0.0, h01 = 0.0, h11 = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            double p = fit.predict(x[i]);
            double e = p - static_cast<double>(y[i]);
            g0 += e;
            g1 += e * x[i];
            double w = p * (1.0 - p);
            h00 += w;
            h01 += w * x[i];
            h11 += w * x[i] * x[i];
        }
        fit.iterations = iter + 1;
        if (std::fabs(g0) < kTol && std::fabs(g1) < kTol) break;
        double det = h00 * h11 - h01 * h01;
        if (std::fabs(det) < 1e-12) {
            h00 += 1e-9;
            h11 += 1e-9;
            det = h00 * h11 - h01 * h01;
        }
        double d0 = (h11 * g0 - h01 * g1) / det;
        double d1 = (h00 * g1 - h01 * g0) / det;
        // damp huge Newton steps on separable data
        double step = std::max(std::fabs(d0), std::fabs(d1));
        if (step > 10.0) {
            d0 *= 10.0 / step;
            d1 *= 10.0 / step;
        }
        fit.intercept -= d0;
        fit.slope -= d1;
    }
    return fit;
}

std::vector<size_t> stratified_folds(const std::vector<int>& labels, size_t k, uint64_t seed) {
    if (k < 2) throw ConfigError("stratified_folds: k must be >= 2");
    std::vector<size_t> fold(labels.size(), 0);
    for (int cls : {0, 1}) {
        std::vector<size_t> members;
        for (size_t i = 0; i < labels.size(); ++i) {
            if ((labels[i] != 0) == (cls != 0)) members.push_back(i);
        }
        StreamRng rng(seed, 0xf01d000000ULL + static_cast<uint64_t>(cls));
        rng.shuffle(members);
        for (size_t i = 0; i < members.size(); ++i) fold[members[i]] = i % k;
    }
    return fold;
}

} // namespace granuscore
