#pragma once

#include "granuscore/stats.hpp"
#include "granuscore/taxonomy.hpp"

#include <string>
#include <vector>

namespace granuscore {

// One realization under evaluation: gold granularity level and the method's
// predicted score, oriented so higher = coarser. Uncovered realizations
// (e.g. taxonomy misses) are excluded from pair and entry counts.
struct ScoredRealization {
    double gold = 0.0;
    double pred = 0.0;
    bool covered = true;
};

struct ScoredEntry {
    std::vector<ScoredRealization> realizations;
};

enum class PairScope { global, intra };

struct PairwiseResult {
    double percent = 0.0;
    size_t pairs = 0; // eligible pairs (distinct gold, both covered)
    size_t correct = 0;
};

// Fraction of correctly ordered pairs with distinct gold levels; prediction
// ties count as incorrect. Global pools realizations across entries; intra
// restricts pairs to within each entry. No eligible pairs is an
// UndefinedMetricError.
PairwiseResult pairwise_accuracy(const std::vector<ScoredEntry>& entries, PairScope scope);

struct ExactOrderingResult {
    double percent = 0.0;
    size_t entries = 0;
    size_t correct = 0;
};

// Fraction of entries whose realizations, sorted by prediction with strict
// inequalities, reproduce the gold order; any predicted tie fails the entry.
ExactOrderingResult exact_ordering_accuracy(const std::vector<ScoredEntry>& entries);

struct CorrelationResult {
    double kendall_tau = 0.0;       // x100, paper convention
    double pearson_r = 0.0;         // x100
    double intra_kendall_tau = 0.0; // x100, averaged over entries
    size_t points = 0;
    size_t intra_entries = 0;
};

// Global tau-b and Pearson over all covered realizations plus the per-entry
// tau average. Entries where tau is undefined (constant predictions)
// contribute zero correlation.
CorrelationResult rank_correlations(const std::vector<ScoredEntry>& entries);

struct RankingReport {
    double global_pw_acc = 0.0;
    double intra_pw_acc = 0.0;
    double exact_ordering_acc = 0.0;
    double kendall_tau = 0.0;
    double pearson_r = 0.0;
    double intra_kendall_tau = 0.0;
    size_t global_pairs = 0;
    size_t intra_pairs = 0;
    size_t entries = 0;
    size_t covered_realizations = 0;
    size_t total_realizations = 0;
};

RankingReport evaluate_ranking(const std::vector<ScoredEntry>& entries);

// Method x metric table mirroring the evaluation columns; one row per method.
void write_ranking_csv(const std::vector<std::pair<std::string, RankingReport>>& rows,
                       const std::string& path, uint64_t seed);

// Per-pair dump for debugging (global scope), behind the CLI verbosity flag.
void write_pair_dump(const std::vector<ScoredEntry>& entries, const std::string& path);

enum class BaselineMethod { word_count, taxonomy_depth };

struct BaselineScore {
    double score = 0.0;
    bool covered = true;
};

// word_count: negative token count (higher = coarser). taxonomy_depth: the
// average root-distance of matching synsets, covered=false on lookup miss;
// callers orient it (negate) before ranking.
BaselineScore baseline_score(const std::string& text, BaselineMethod method,
                             const NounTaxonomy* taxonomy = nullptr);

} // namespace granuscore
