#pragma once

#include "granuscore/datasets.hpp"
#include "granuscore/stats.hpp"
#include "granuscore/textproc.hpp"

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace granuscore {

// ---- QA outcome stratification (response-outcome study) ----

enum class QaField { question, gold_answer, model_answer };
std::string qa_field_name(QaField f);

struct ScoredQaRecord {
    QARecord record;
    double question_score = 0.0;
    double gold_score = 0.0;
    double answer_score = 0.0;

    // model answer minus gold answer; positive when the answer is coarser
    double gap() const { return answer_score - gold_score; }
};

// Document-scores all three text fields of every record; identical texts are
// scored once. Empty answers fall back to 100 like any unit-free text.
std::vector<ScoredQaRecord> score_qa_records(const std::vector<QARecord>& records,
                                             UnitScorer& scorer,
                                             const AggregationSpec& spec = AggregationSpec::defaults(),
                                             size_t jobs = 1);

struct OutcomeCell {
    bool present = false;
    double mean = 0.0;              // mean of per-model means
    double std_across_models = 0.0; // sample std over per-model means (0 for one model)
    size_t n = 0;                   // records backing the cell
};

struct OutcomePairTest {
    QaField field;
    QaOutcome a;
    QaOutcome b;
    StatTestResult test; // Mann-Whitney U over pooled record scores
};

struct OutcomeReport {
    std::array<std::array<OutcomeCell, 3>, 3> cells; // [field][outcome]
    std::vector<OutcomePairTest> pairwise_tests;
    std::vector<std::string> warnings;
};

OutcomeReport qa_outcome_report(const std::vector<ScoredQaRecord>& scored);
void write_outcome_csv(const OutcomeReport& report, const std::string& path, uint64_t seed);

struct GapAucResult {
    double mean_auc = 0.0;
    double std_auc = 0.0;
    size_t folds = 0;
    size_t refold_attempts = 0;
    LogisticFit full_fit;
};

// Stratified k-fold logistic regression (intercept + gap) predicting failure
// (wrong or not_attempted) vs correct. Single-class folds trigger a refold
// with a new seed, at most 5 attempts.
GapAucResult gap_auc(const std::vector<ScoredQaRecord>& scored, size_t folds = 5,
                     uint64_t seed = 0);

// Dataset-level scatter data: per (dataset, model) mean question/gold score
// and correctness rate.
void write_qa_scatter_csv(const std::vector<ScoredQaRecord>& scored, const std::string& path,
                          uint64_t seed);
void write_qa_scatter_svg(const std::vector<ScoredQaRecord>& scored, const std::string& path);

// Confound columns (answer/question length always; dependency depth and word
// frequency only when hooks are configured, otherwise left empty).
struct ConfoundProviders {
    std::function<double(const std::string&)> tree_depth;     // optional
    std::function<double(const std::string&)> word_frequency; // optional
};
void write_qa_confounds_csv(const std::vector<ScoredQaRecord>& scored, const std::string& path,
                            uint64_t seed, const ConfoundProviders* providers = nullptr);

// ---- Discourse-section comparison ----

struct SectionRecord {
    std::string paper_id;
    std::string section; // "introduction" / "related work" (case-folded on load)
    std::vector<std::string> paragraphs;
};

// Line-delimited {"paper_id","section","paragraphs":[...]}.
std::vector<SectionRecord> load_paper_sections(const std::string& path);

// Removes bracketed text, URLs, caption lines, and markup artifacts before
// unit extraction; the exact rules are fixture-tested.
std::string clean_section_text(const std::string& text);

struct PaperPair {
    std::string paper_id;
    std::string intro_paragraph;
    std::string related_paragraph;
};

// Paragraph selection: intro = first paragraph with >= min_units referential
// units; related work = first post-opening paragraph with >= min_units,
// falling back to the opening paragraph; papers failing either side drop out.
std::vector<PaperPair> select_paper_pairs(const std::vector<SectionRecord>& records,
                                          size_t min_units = 10,
                                          const Annotator& annotator = RuleAnnotator::instance());

struct SectionCompareResult {
    double ordering_fraction = 0.0; // intro strictly above related work
    double tie_fraction = 0.0;
    double reverse_fraction = 0.0;
    double intro_mean = 0.0, intro_std = 0.0;
    double related_mean = 0.0, related_std = 0.0;
    StatTestResult t_test;
    StatTestResult wilcoxon;
    double cohens_dz = 0.0;
    size_t papers = 0;
    bool insufficient_data = false; // fewer than 30 usable papers
    bool tests_degenerate = false;  // all score differences were ties
    std::vector<double> intro_scores;
    std::vector<double> related_scores;
};

SectionCompareResult section_compare(const std::vector<PaperPair>& pairs, UnitScorer& scorer,
                                     const AggregationSpec& spec = AggregationSpec::defaults(),
                                     size_t jobs = 1);

// ---- Aggregation-strategy sweep over the same corpus ----

struct SweepRow {
    std::string strategy;
    double ordering_accuracy = 0.0; // percent of papers with intro > related
    size_t papers = 0;
};

// Unit scores are computed once per paragraph and reused across strategies.
std::vector<SweepRow> aggregation_sweep(const std::vector<PaperPair>& pairs, UnitScorer& scorer,
                                        const std::vector<AggregationSpec>& strategies,
                                        size_t jobs = 1);

// The full strategy grid from the aggregation study.
std::vector<std::string> sweep_strategy_names();

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path, uint64_t seed);

} // namespace granuscore
