#include "granuscore/textproc.hpp"

#include "granuscore/errors.hpp"
#include "granuscore/text_util.hpp"
#include "wordlists.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>

namespace granuscore {

using nlohmann::json;

namespace {

bool is_word_byte(unsigned char c) {
    return std::isalnum(c) != 0 || c == '\'' || c == '-' || c == '_' || c >= 0x80;
}

bool has_alnum(const std::string& s) {
    for (unsigned char c : s) {
        if (std::isalnum(c) != 0 || c >= 0x80) return true;
    }
    return false;
}

// ASCII lower + typographic apostrophe folded to ' for list lookups.
std::string lookup_form(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (size_t i = 0; i < s.size(); ++i) {
        unsigned char c = static_cast<unsigned char>(s[i]);
        if (c == 0xE2 && i + 2 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0x80 &&
            static_cast<unsigned char>(s[i + 2]) == 0x99) {
            out.push_back('\'');
            i += 2;
            continue;
        }
        out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : s[i]);
    }
    return out;
}

struct Token {
    size_t start = 0;
    size_t end = 0;
    size_t sentence = 0;
    std::string text;
    std::string lower;
    bool symbol_only = false;
};

bool char_is_upperish(unsigned char c) { return std::isupper(c) != 0 || std::isdigit(c) != 0 ||
                                                 c == '"' || c == '\'' || c == '(' || c >= 0x80; }

// Sentence-terminating '.' '!' '?' positions; '.' guarded against known
// abbreviations, initials, and decimals.
std::vector<size_t> sentence_breaks(const std::string& text, const std::vector<Token>& tokens) {
    std::vector<size_t> breaks;
    for (size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        bool hard_newline = c == '\n' && i + 1 < text.size() && text[i + 1] == '\n';
        if (hard_newline) {
            breaks.push_back(i);
            continue;
        }
        if (c != '.' && c != '!' && c != '?') continue;
        // scan past a run of terminators/closing quotes
        size_t j = i + 1;
        while (j < text.size() && (text[j] == '.' || text[j] == '!' || text[j] == '?' ||
                                   text[j] == '"' || text[j] == ')' || text[j] == '\'')) {
            ++j;
        }
        if (j < text.size() && std::isspace(static_cast<unsigned char>(text[j])) == 0) {
            continue; // mid-token (decimal, version string)
        }
        size_t k = j;
        while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k])) != 0) ++k;
        bool at_end = k >= text.size();
        if (!at_end && !char_is_upperish(static_cast<unsigned char>(text[k]))) continue;
        if (c == '.') {
            // the word right before the period
            const Token* prev = nullptr;
            for (const auto& t : tokens) {
                if (t.end <= i) prev = &t;
                if (t.start > i) break;
            }
            if (prev != nullptr && prev->end == i) {
                if (words::abbreviations().count(prev->lower) > 0) continue;
                if (prev->text.size() == 1 &&
                    std::isupper(static_cast<unsigned char>(prev->text[0])) != 0) {
                    continue; // initial like "J."
                }
            }
        }
        breaks.push_back(i);
        i = j - 1;
    }
    return breaks;
}

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> tokens;
    size_t i = 0;
    while (i < text.size()) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (std::isspace(c) != 0) {
            ++i;
            continue;
        }
        size_t start = i;
        if (is_word_byte(c)) {
            while (i < text.size() && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
        } else {
            while (i < text.size() &&
                   std::isspace(static_cast<unsigned char>(text[i])) == 0 &&
                   !is_word_byte(static_cast<unsigned char>(text[i]))) {
                ++i;
            }
        }
        Token t;
        t.start = start;
        t.end = i;
        t.text = text.substr(start, i - start);
        // strip leading/trailing apostrophes and hyphens picked up by the scan
        while (!t.text.empty() && (t.text.front() == '\'' || t.text.front() == '-')) {
            t.text.erase(t.text.begin());
            ++t.start;
        }
        while (!t.text.empty() && (t.text.back() == '\'' || t.text.back() == '-')) {
            t.text.pop_back();
            --t.end;
        }
        if (t.text.empty()) continue;
        t.lower = lookup_form(t.text);
        t.symbol_only = !has_alnum(t.text);
        tokens.push_back(std::move(t));
    }
    return tokens;
}

enum class TokenClass { symbol, opener, stopword, verb, content };

TokenClass classify(const Token& t) {
    if (t.symbol_only) return TokenClass::symbol;
    if (words::np_openers().count(t.lower) > 0) return TokenClass::opener;
    if (words::stopwords().count(t.lower) > 0) return TokenClass::stopword;
    if (words::verb_forms().count(t.lower) > 0) return TokenClass::verb;
    return TokenClass::content;
}

} // namespace

std::vector<ExtractedUnit> RuleAnnotator::extract_units(const std::string& text) const {
    std::vector<Token> tokens = tokenize(text);
    std::vector<size_t> breaks = sentence_breaks(text, tokens);

    // assign sentence indices
    size_t b = 0;
    size_t sent = 0;
    for (auto& t : tokens) {
        while (b < breaks.size() && breaks[b] < t.start) {
            ++b;
            ++sent;
        }
        t.sentence = sent;
    }

    std::vector<ExtractedUnit> out;
    size_t i = 0;
    const size_t n = tokens.size();
    auto emit = [&](size_t first, size_t last) {
        // unit = source span from tokens[first] to tokens[last]
        ReferentialUnit u;
        u.start = tokens[first].start;
        u.end = tokens[last].end;
        u.text = trim(text.substr(u.start, u.end - u.start));
        u.token_count = last - first + 1;
        if (u.text.empty()) return;
        out.push_back(ExtractedUnit{tokens[first].sentence, std::move(u)});
    };
    while (i < n) {
        TokenClass cls = classify(tokens[i]);
        if (cls == TokenClass::symbol || cls == TokenClass::stopword) {
            ++i;
            continue;
        }
        if (cls == TokenClass::verb) {
            emit(i, i);
            ++i;
            continue;
        }
        // noun phrase: optional opener run, then a content run; the chunk
        // never crosses a sentence boundary
        size_t first = i;
        size_t sentence = tokens[i].sentence;
        while (i < n && tokens[i].sentence == sentence && classify(tokens[i]) == TokenClass::opener) {
            ++i;
        }
        size_t content_begin = i;
        while (i < n && tokens[i].sentence == sentence &&
               classify(tokens[i]) == TokenClass::content) {
            ++i;
        }
        if (i == content_begin) {
            // openers with no content: drop them like stop words
            if (first == content_begin) ++i; // lone non-opener safeguard
            continue;
        }
        emit(first, i - 1);
    }
    return out;
}

const RuleAnnotator& RuleAnnotator::instance() {
    static const RuleAnnotator annotator;
    return annotator;
}

std::vector<ExtractedUnit> extract_units(const std::string& text, const Annotator& annotator) {
    return annotator.extract_units(text);
}

std::string agg_op_name(AggOp op) {
    switch (op) {
        case AggOp::mean: return "mean";
        case AggOp::weighted_mean: return "weighted-mean";
        case AggOp::sum: return "sum";
        case AggOp::min: return "min";
        case AggOp::max: return "max";
        case AggOp::lqm: return "lqm";
    }
    return "unknown";
}

namespace {

std::pair<AggOp, double> parse_op(const std::string& s) {
    if (s == "mean") return {AggOp::mean, 1.0};
    if (s == "weighted-mean") return {AggOp::weighted_mean, 1.0};
    if (s == "sum") return {AggOp::sum, 1.0};
    if (s == "min") return {AggOp::min, 1.0};
    if (s == "max") return {AggOp::max, 1.0};
    if (s.rfind("lqm-", 0) == 0) {
        try {
            double q = std::stod(s.substr(4));
            return {AggOp::lqm, q};
        } catch (const std::exception&) {
            throw ConfigError("bad lqm quantile in aggregation name: " + s);
        }
    }
    throw ConfigError("unknown aggregation operator: " + s);
}

std::string op_token(AggOp op, double q) {
    if (op != AggOp::lqm) return agg_op_name(op);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "lqm-%g", q);
    return buf;
}

} // namespace

void AggregationSpec::validate() const {
    auto check_q = [](AggOp op, double q, const char* where) {
        if (op == AggOp::lqm && !(q > 0.0 && q <= 1.0)) {
            throw ConfigError(std::string("lqm quantile out of (0,1] in ") + where);
        }
    };
    check_q(pool, pool_q, "pool operator");
    if (scope == Scope::sentence) check_q(across, across_q, "across-sentence operator");
}

std::string AggregationSpec::name() const {
    if (scope == Scope::document) return "doc-pool-" + op_token(pool, pool_q);
    return "sent-" + op_token(across, across_q) + "-pool-" + op_token(pool, pool_q);
}

AggregationSpec AggregationSpec::parse(const std::string& name) {
    AggregationSpec spec;
    if (name.rfind("doc-pool-", 0) == 0) {
        spec.scope = Scope::document;
        auto [op, q] = parse_op(name.substr(9));
        spec.pool = op;
        spec.pool_q = q;
        spec.validate();
        return spec;
    }
    if (name.rfind("sent-", 0) == 0) {
        size_t pool_pos = name.find("-pool-");
        if (pool_pos == std::string::npos) {
            throw ConfigError("aggregation name missing -pool- segment: " + name);
        }
        spec.scope = Scope::sentence;
        auto [across_op, across_q] = parse_op(name.substr(5, pool_pos - 5));
        auto [pool_op, pool_q] = parse_op(name.substr(pool_pos + 6));
        spec.across = across_op;
        spec.across_q = across_q;
        spec.pool = pool_op;
        spec.pool_q = pool_q;
        spec.validate();
        return spec;
    }
    throw ConfigError("aggregation name must start with sent- or doc-pool-: " + name);
}

double lqm(const std::vector<double>& values, double q) {
    if (values.empty()) throw DataError("lqm of an empty list");
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("lqm quantile must be in (0,1]");
    size_t n = values.size();
    size_t m = std::max<size_t>(
        1, static_cast<size_t>(std::ceil(q * static_cast<double>(n) - 1e-12)));
    if (m > n) m = n;
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    double s = 0.0;
    for (size_t i = 0; i < m; ++i) s += sorted[i];
    return s / static_cast<double>(m);
}

double aggregate(const std::vector<double>& scores, AggOp op, double q,
                 const std::vector<double>* weights) {
    if (scores.empty()) throw DataError("aggregate of an empty score list");
    switch (op) {
        case AggOp::mean: {
            double s = 0.0;
            for (double v : scores) s += v;
            return s / static_cast<double>(scores.size());
        }
        case AggOp::weighted_mean: {
            if (weights == nullptr || weights->size() != scores.size()) {
                throw ConfigError("weighted_mean requires one weight per score");
            }
            double s = 0.0, w = 0.0;
            for (size_t i = 0; i < scores.size(); ++i) {
                s += scores[i] * (*weights)[i];
                w += (*weights)[i];
            }
            if (w <= 0.0) throw DataError("weighted_mean with non-positive total weight");
            return s / w;
        }
        case AggOp::sum: {
            double s = 0.0;
            for (double v : scores) s += v;
            return s;
        }
        case AggOp::min: return *std::min_element(scores.begin(), scores.end());
        case AggOp::max: return *std::max_element(scores.begin(), scores.end());
        case AggOp::lqm: return lqm(scores, q);
    }
    throw ConfigError("unhandled aggregation operator");
}

std::vector<ScoredSentence> score_units(const std::string& text, UnitScorer& scorer,
                                        const Annotator& annotator) {
    std::vector<ExtractedUnit> extracted = annotator.extract_units(text);
    std::vector<ScoredSentence> grouped;
    for (auto& eu : extracted) {
        if (grouped.empty() || grouped.back().sentence != eu.sentence) {
            ScoredSentence s;
            s.sentence = eu.sentence;
            grouped.push_back(std::move(s));
        }
        try {
            eu.unit.score = scorer.score(eu.unit.text);
        } catch (const Error& err) {
            throw BackendError("scoring unit \"" + eu.unit.text + "\" (sentence " +
                               std::to_string(eu.sentence) + ", offset " +
                               std::to_string(eu.unit.start) + "): " + err.what());
        }
        grouped.back().weight += static_cast<double>(eu.unit.token_count);
        grouped.back().units.push_back(std::move(eu.unit));
    }
    return grouped;
}

ScoreReport assemble_report(std::vector<ScoredSentence> scored, const AggregationSpec& spec) {
    spec.validate();
    ScoreReport report;
    report.spec = spec;
    if (scored.empty()) {
        report.document_score = 100.0; // coarsest score when nothing referential was found
        report.fallback_used = true;
        return report;
    }
    for (auto& sent : scored) {
        std::vector<double> unit_scores;
        std::vector<double> unit_weights;
        unit_scores.reserve(sent.units.size());
        for (const auto& u : sent.units) {
            unit_scores.push_back(*u.score);
            unit_weights.push_back(static_cast<double>(u.token_count));
        }
        sent.score = aggregate(unit_scores, spec.pool, spec.pool_q, &unit_weights);
        report.sentence_scores.push_back(sent.score);
    }
    if (spec.scope == AggregationSpec::Scope::document) {
        std::vector<double> all_scores;
        std::vector<double> all_weights;
        for (const auto& sent : scored) {
            for (const auto& u : sent.units) {
                all_scores.push_back(*u.score);
                all_weights.push_back(static_cast<double>(u.token_count));
            }
        }
        report.document_score = aggregate(all_scores, spec.pool, spec.pool_q, &all_weights);
    } else {
        std::vector<double> sentence_weights;
        for (const auto& sent : scored) sentence_weights.push_back(sent.weight);
        report.document_score =
            aggregate(report.sentence_scores, spec.across, spec.across_q, &sentence_weights);
    }
    report.sentences = std::move(scored);
    return report;
}

ScoreReport score_text(const std::string& text, UnitScorer& scorer, const AggregationSpec& spec,
                       const Annotator& annotator) {
    return assemble_report(score_units(text, scorer, annotator), spec);
}

std::string ScoreReport::to_json() const {
    json doc;
    doc["document_score"] = document_score;
    doc["fallback_used"] = fallback_used;
    doc["aggregation"] = spec.name();
    doc["sentence_scores"] = sentence_scores;
    json sents = json::array();
    for (const auto& s : sentences) {
        json units = json::array();
        for (const auto& u : s.units) {
            units.push_back({{"text", u.text},
                             {"start", u.start},
                             {"end", u.end},
                             {"tokens", u.token_count},
                             {"score", u.score ? json(*u.score) : json(nullptr)}});
        }
        sents.push_back({{"sentence", s.sentence}, {"score", s.score}, {"units", std::move(units)}});
    }
    doc["sentences"] = std::move(sents);
    return doc.dump(2);
}

} // namespace granuscore
