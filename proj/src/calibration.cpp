#include "granuscore/calibration.hpp"

#include "granuscore/errors.hpp"
#include "granuscore/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace granuscore {

void CalibrationTable::validate() const {
    if (raw_scores.size() < 2) {
        throw CalibrationError("calibration table needs at least 2 entries, has " +
                               std::to_string(raw_scores.size()));
    }
    if (!std::is_sorted(raw_scores.begin(), raw_scores.end())) {
        throw CalibrationError("calibration table is not sorted");
    }
}

double to_percentile(double raw, const CalibrationTable& table, PercentileRank rank) {
    table.validate();
    const auto& t = table.raw_scores;
    auto lo = std::lower_bound(t.begin(), t.end(), raw);
    auto hi = std::upper_bound(t.begin(), t.end(), raw);
    double below = static_cast<double>(lo - t.begin());
    double equal = static_cast<double>(hi - lo);
    double n = static_cast<double>(t.size());
    switch (rank) {
        case PercentileRank::mid: return 100.0 * (below + 0.5 * equal) / n;
        case PercentileRank::strictly_less: return 100.0 * below / n;
        case PercentileRank::less_or_equal: return 100.0 * (below + equal) / n;
    }
    return 0.0;
}

CalibrationTable build_calibration(const std::vector<std::string>& corpus,
                                   const std::function<double(const std::string&)>& raw_scorer,
                                   const std::string& corpus_id, CalibrationBuildReport* report,
                                   size_t jobs) {
    if (corpus.empty()) throw DataError("build_calibration: empty corpus");
    std::vector<double> scores(corpus.size(), std::nan(""));
    std::vector<char> ok(corpus.size(), 0);
    parallel_for(corpus.size(), jobs, [&](size_t i) {
        try {
            scores[i] = raw_scorer(corpus[i]);
            ok[i] = 1;
        } catch (const Error&) {
            ok[i] = 0;
        }
    });
    CalibrationTable table;
    table.corpus_id = corpus_id;
    CalibrationBuildReport local;
    for (size_t i = 0; i < corpus.size(); ++i) {
        if (ok[i]) {
            table.raw_scores.push_back(scores[i]);
        } else {
            local.skipped.push_back(corpus[i]);
        }
    }
    local.scored = table.raw_scores.size();
    if (report) *report = local;
    double skipped_frac =
        static_cast<double>(local.skipped.size()) / static_cast<double>(corpus.size());
    if (skipped_frac > 0.01) {
        throw CalibrationError("calibration skipped " + std::to_string(local.skipped.size()) +
                               " of " + std::to_string(corpus.size()) +
                               " corpus items (>1%); first failure: " +
                               (local.skipped.empty() ? "" : local.skipped.front()));
    }
    std::sort(table.raw_scores.begin(), table.raw_scores.end());
    table.validate();
    return table;
}

} // namespace granuscore
