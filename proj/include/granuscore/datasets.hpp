#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace granuscore {

// One question with its answer hierarchy, finest (level 1) to coarsest
// (level 4). Levels are strictly increasing within the entry.
struct GranolaEntry {
    std::string id;
    std::string question;
    std::string relation_id;
    std::vector<std::pair<std::string, double>> realizations; // (text, normalized level)
};

struct IngestReport {
    size_t lines = 0;
    size_t loaded = 0;
    size_t dropped_over_resolution = 0; // entries with more than four realizations
    size_t malformed = 0;
    std::vector<std::string> warnings;
};

// Reads line-delimited entries {"question", "answers": [finest..coarsest],
// optional "id"/"relation"}. Entries with more than four realizations are
// dropped; malformed lines are skipped and logged, more than 5% malformed is
// a DataError. Levels are assigned via normalize_levels.
std::vector<GranolaEntry> load_granola(const std::string& path, IngestReport* report = nullptr);

// Continuous level scale: n >= 2 maps i=1..n to 1 + 3*(i-1)/(n-1); a lone
// answer sits at level 1.
std::vector<double> normalize_levels(size_t n);

enum class Split { train, dev, test };
std::string split_name(Split s);

struct SplitAssignment {
    std::vector<Split> by_entry; // parallel to the entry list
    uint64_t seed = 0;
    std::unordered_map<std::string, Split> realization_owner; // normalized text -> split
    std::array<size_t, 3> counts() const;
};

// Entries sharing any realization text (trimmed, case-folded) always land in
// the same split: union-find over shared realizations, then components
// assigned largest-first to the split furthest below its target count.
// Deterministic under seed. A component larger than the biggest split target
// goes to train with a warning.
SplitAssignment split_by_realization(const std::vector<GranolaEntry>& entries,
                                     const std::array<double, 3>& ratios, uint64_t seed,
                                     std::vector<std::string>* warnings = nullptr);

void save_split_table(const std::vector<GranolaEntry>& entries, const SplitAssignment& assignment,
                      const std::string& path);
std::unordered_map<std::string, Split> load_split_table(const std::string& path);

// Deduplicated noun lemmas, one per line, underscores normalized to spaces;
// lines opening with whitespace or '#' are skipped (corpus headers).
std::vector<std::string> load_calibration_corpus(const std::string& path);

enum class QaOutcome { correct, wrong, not_attempted };
std::string qa_outcome_name(QaOutcome o);
QaOutcome qa_outcome_from_name(const std::string& name);

struct QARecord {
    std::string dataset_id;
    std::string question;
    std::string gold_answer;
    std::string model_id;
    std::string model_answer; // may be empty only for not_attempted
    QaOutcome outcome = QaOutcome::not_attempted;
};

// Strict line-delimited reader; any missing field or unknown outcome raises
// a DataError naming the line.
std::vector<QARecord> load_qa_records(const std::string& path);

} // namespace granuscore
