#pragma once

#include <functional>
#include <string>
#include <vector>

namespace granuscore {

// Fixed reference distribution of raw scores; percentiles are read off it.
struct CalibrationTable {
    std::vector<double> raw_scores; // sorted ascending
    std::string corpus_id;

    void validate() const; // throws CalibrationError when unsorted or too short
};

enum class PercentileRank { mid, strictly_less, less_or_equal };

// Percentile of `raw` against the table. Default is the mid-rank:
// 100 * (count(< raw) + 0.5 * count(== raw)) / size. Monotone non-decreasing
// in raw; values off the table's ends map to 0 / 100.
double to_percentile(double raw, const CalibrationTable& table,
                     PercentileRank rank = PercentileRank::mid);

struct CalibrationBuildReport {
    size_t scored = 0;
    std::vector<std::string> skipped; // corpus items the scorer failed on
};

// Raw-scores every corpus item through `raw_scorer` and returns the sorted
// table. Scorer failures are skipped and reported; more than 1% skipped is a
// CalibrationError.
CalibrationTable build_calibration(const std::vector<std::string>& corpus,
                                   const std::function<double(const std::string&)>& raw_scorer,
                                   const std::string& corpus_id,
                                   CalibrationBuildReport* report = nullptr,
                                   size_t jobs = 1);

} // namespace granuscore
