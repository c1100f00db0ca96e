#pragma once

#include "granuscore/model.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace granuscore {

// Noun phrase or content token carrying granularity; spans index into the
// source text.
struct ReferentialUnit {
    std::string text;
    size_t start = 0;
    size_t end = 0;
    std::optional<double> score;
    size_t token_count = 1;
};

struct ExtractedUnit {
    size_t sentence = 0;
    ReferentialUnit unit;
};

// Linguistic annotation behind a pluggable interface; RuleAnnotator is the
// pinned default whose outputs are frozen as goldens in the test corpus.
class Annotator {
public:
    virtual ~Annotator() = default;
    virtual std::vector<ExtractedUnit> extract_units(const std::string& text) const = 0;
};

// Deterministic rule-based annotator: sentence segmentation, noun phrases
// kept intact (determiner/possessive + content run), verbs and bare content
// tokens emitted individually, stop words and symbol-only tokens dropped.
class RuleAnnotator : public Annotator {
public:
    std::vector<ExtractedUnit> extract_units(const std::string& text) const override;

    static const RuleAnnotator& instance();
};

// Convenience entry point used by the operations below.
std::vector<ExtractedUnit> extract_units(const std::string& text,
                                         const Annotator& annotator = RuleAnnotator::instance());

enum class AggOp { mean, weighted_mean, sum, min, max, lqm };

std::string agg_op_name(AggOp op);

struct AggregationSpec {
    enum class Scope { sentence, document };
    Scope scope = Scope::sentence;
    // For sentence scope: `pool` combines unit scores within a sentence and
    // `across` combines sentence scores. For document scope only `pool`
    // applies, over every unit in the document.
    AggOp pool = AggOp::mean;
    double pool_q = 0.8;
    AggOp across = AggOp::lqm;
    double across_q = 0.8;

    void validate() const;
    // Names follow scope-aggregation-pool: "sent-lqm-0.8-pool-mean",
    // "doc-pool-max", "sent-weighted-mean-pool-sum", ...
    std::string name() const;
    static AggregationSpec parse(const std::string& name);
    static AggregationSpec defaults() { return AggregationSpec{}; }
};

// Mean of the m = max(1, ceil(q*n)) smallest values.
double lqm(const std::vector<double>& values, double q);

// Applies `op` to scores; weighted_mean uses `weights` (token counts).
double aggregate(const std::vector<double>& scores, AggOp op, double q = 1.0,
                 const std::vector<double>* weights = nullptr);

struct ScoredSentence {
    size_t sentence = 0;
    std::vector<ReferentialUnit> units; // with scores filled in
    double score = 0.0;
    double weight = 0.0; // token count across units
};

struct ScoreReport {
    std::vector<ScoredSentence> sentences;
    std::vector<double> sentence_scores;
    double document_score = 100.0;
    AggregationSpec spec;
    bool fallback_used = false;

    std::string to_json() const;
};

// Percentile-scores every extracted unit, grouped by sentence. Sentence and
// document aggregates are not computed here; see assemble_report.
std::vector<ScoredSentence> score_units(const std::string& text, UnitScorer& scorer,
                                        const Annotator& annotator = RuleAnnotator::instance());

// Pure aggregation over previously scored units.
ScoreReport assemble_report(std::vector<ScoredSentence> scored, const AggregationSpec& spec);

// Full pipeline: extract, score, aggregate. Texts with no referential units
// score 100 (the coarsest percentile) with fallback_used set.
ScoreReport score_text(const std::string& text, UnitScorer& scorer,
                       const AggregationSpec& spec = AggregationSpec::defaults(),
                       const Annotator& annotator = RuleAnnotator::instance());

} // namespace granuscore
