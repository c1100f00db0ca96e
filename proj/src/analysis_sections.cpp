#include "granuscore/analysis.hpp"

#include "granuscore/errors.hpp"
#include "granuscore/parallel.hpp"
#include "granuscore/text_util.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

namespace granuscore {

using nlohmann::json;

std::vector<SectionRecord> load_paper_sections(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ResolutionError("cannot open paper sections: " + path);
    std::vector<SectionRecord> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        json row = json::parse(line, nullptr, false);
        if (row.is_discarded() || !row.contains("paper_id") || !row.contains("section") ||
            !row.contains("paragraphs") || !row["paragraphs"].is_array()) {
            throw DataError("paper sections line " + std::to_string(lineno) +
                            ": expected {paper_id, section, paragraphs}");
        }
        SectionRecord rec;
        rec.paper_id = row["paper_id"].get<std::string>();
        rec.section = normalize_key(row["section"].get<std::string>());
        std::replace(rec.section.begin(), rec.section.end(), '_', ' ');
        for (const auto& p : row["paragraphs"]) rec.paragraphs.push_back(p.get<std::string>());
        out.push_back(std::move(rec));
    }
    return out;
}

std::string clean_section_text(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    // 1) drop bracketed spans [..] {..} (citations, math placeholders)
    int depth_sq = 0, depth_cu = 0;
    for (char c : text) {
        if (c == '[') {
            ++depth_sq;
            continue;
        }
        if (c == ']') {
            if (depth_sq > 0) --depth_sq;
            continue;
        }
        if (c == '{') {
            ++depth_cu;
            continue;
        }
        if (c == '}') {
            if (depth_cu > 0) --depth_cu;
            continue;
        }
        if (depth_sq == 0 && depth_cu == 0) out.push_back(c);
    }
    // 2) line filters: captions and markup-heavy lines
    std::string filtered;
    for (const auto& line : split(out, '\n')) {
        std::string low = ascii_lower(trim(line));
        bool caption = low.rfind("figure ", 0) == 0 || low.rfind("fig.", 0) == 0 ||
                       low.rfind("fig ", 0) == 0 || low.rfind("table ", 0) == 0;
        if (caption) continue;
        filtered += line;
        filtered += '\n';
    }
    // 3) token filters: URLs, emails, TeX commands, leftover markup
    std::string result;
    size_t i = 0;
    while (i < filtered.size()) {
        if (std::isspace(static_cast<unsigned char>(filtered[i])) != 0) {
            result.push_back(filtered[i]);
            ++i;
            continue;
        }
        size_t j = i;
        while (j < filtered.size() && std::isspace(static_cast<unsigned char>(filtered[j])) == 0) {
            ++j;
        }
        std::string token = filtered.substr(i, j - i);
        std::string low = ascii_lower(token);
        bool drop = low.rfind("http://", 0) == 0 || low.rfind("https://", 0) == 0 ||
                    low.rfind("www.", 0) == 0 || token.find('\\') != std::string::npos ||
                    token.find('@') != std::string::npos;
        if (!drop) result += token;
        i = j;
    }
    return trim(result);
}

std::vector<PaperPair> select_paper_pairs(const std::vector<SectionRecord>& records,
                                          size_t min_units, const Annotator& annotator) {
    struct Sections {
        const SectionRecord* intro = nullptr;
        const SectionRecord* related = nullptr;
    };
    std::map<std::string, Sections> papers;
    for (const auto& rec : records) {
        Sections& s = papers[rec.paper_id];
        if (rec.section == "introduction" && s.intro == nullptr) s.intro = &rec;
        if ((rec.section == "related work" || rec.section == "related works") &&
            s.related == nullptr) {
            s.related = &rec;
        }
    }
    auto qualify = [&](const std::string& paragraph) -> std::string {
        std::string cleaned = clean_section_text(paragraph);
        if (!cleaned.empty() && annotator.extract_units(cleaned).size() >= min_units) {
            return cleaned;
        }
        return "";
    };
    std::vector<PaperPair> out;
    for (const auto& [paper_id, s] : papers) {
        if (s.intro == nullptr || s.related == nullptr) continue;
        // intro: first paragraph with enough referential units
        std::string intro;
        for (const auto& p : s.intro->paragraphs) {
            intro = qualify(p);
            if (!intro.empty()) break;
        }
        if (intro.empty()) continue;
        // related work: skip the opening transition paragraph, then fall back
        // to it when no later paragraph qualifies
        std::string related;
        for (size_t i = 1; i < s.related->paragraphs.size(); ++i) {
            related = qualify(s.related->paragraphs[i]);
            if (!related.empty()) break;
        }
        if (related.empty() && !s.related->paragraphs.empty()) {
            related = qualify(s.related->paragraphs.front());
        }
        if (related.empty()) continue;
        out.push_back(PaperPair{paper_id, std::move(intro), std::move(related)});
    }
    return out;
}

SectionCompareResult section_compare(const std::vector<PaperPair>& pairs, UnitScorer& scorer,
                                     const AggregationSpec& spec, size_t jobs) {
    if (pairs.empty()) throw DataError("section_compare: no paper pairs");
    SectionCompareResult res;
    res.papers = pairs.size();
    res.insufficient_data = pairs.size() < 30;
    res.intro_scores.resize(pairs.size());
    res.related_scores.resize(pairs.size());
    parallel_for(pairs.size(), jobs, [&](size_t i) {
        res.intro_scores[i] = score_text(pairs[i].intro_paragraph, scorer, spec).document_score;
        res.related_scores[i] = score_text(pairs[i].related_paragraph, scorer, spec).document_score;
    });

    size_t greater = 0, ties = 0, reverse = 0;
    for (size_t i = 0; i < pairs.size(); ++i) {
        if (res.intro_scores[i] > res.related_scores[i]) {
            ++greater;
        } else if (res.intro_scores[i] == res.related_scores[i]) {
            ++ties; // ties are not counted as greater
        } else {
            ++reverse;
        }
    }
    double n = static_cast<double>(pairs.size());
    res.ordering_fraction = static_cast<double>(greater) / n;
    res.tie_fraction = static_cast<double>(ties) / n;
    res.reverse_fraction = static_cast<double>(reverse) / n;

    auto mean_std = [](const std::vector<double>& v, double& mean, double& sd) {
        mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    };
    mean_std(res.intro_scores, res.intro_mean, res.intro_std);
    mean_std(res.related_scores, res.related_mean, res.related_std);

    // degenerate score differences (all ties) keep the ordering fractions
    // but mark the significance tests unusable
    try {
        res.t_test = paired_t_test(res.intro_scores, res.related_scores, Tail::greater);
        res.wilcoxon = wilcoxon_signed_rank(res.intro_scores, res.related_scores, Tail::greater);
        std::vector<double> diffs(pairs.size());
        for (size_t i = 0; i < pairs.size(); ++i) {
            diffs[i] = res.intro_scores[i] - res.related_scores[i];
        }
        res.cohens_dz = granuscore::cohens_dz(diffs);
    } catch (const UndefinedMetricError&) {
        res.tests_degenerate = true;
        res.t_test = StatTestResult{"paired_t", 0.0, 1.0, std::nullopt, pairs.size()};
        res.wilcoxon = StatTestResult{"wilcoxon_signed_rank", 0.0, 1.0, std::nullopt, pairs.size()};
        res.cohens_dz = 0.0;
    }
    return res;
}

std::vector<SweepRow> aggregation_sweep(const std::vector<PaperPair>& pairs, UnitScorer& scorer,
                                        const std::vector<AggregationSpec>& strategies,
                                        size_t jobs) {
    if (pairs.empty()) throw DataError("aggregation_sweep: no paper pairs");
    // unit scores computed once per paragraph, reused across every strategy
    std::vector<std::vector<ScoredSentence>> intro_units(pairs.size());
    std::vector<std::vector<ScoredSentence>> related_units(pairs.size());
    parallel_for(pairs.size(), jobs, [&](size_t i) {
        intro_units[i] = score_units(pairs[i].intro_paragraph, scorer);
        related_units[i] = score_units(pairs[i].related_paragraph, scorer);
    });
    std::vector<SweepRow> rows;
    rows.reserve(strategies.size());
    for (const auto& spec : strategies) {
        size_t greater = 0, usable = 0;
        for (size_t i = 0; i < pairs.size(); ++i) {
            double intro = assemble_report(intro_units[i], spec).document_score;
            double related = assemble_report(related_units[i], spec).document_score;
            ++usable;
            if (intro > related) ++greater;
        }
        SweepRow row;
        row.strategy = spec.name();
        row.papers = usable;
        row.ordering_accuracy = 100.0 * static_cast<double>(greater) / static_cast<double>(usable);
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<std::string> sweep_strategy_names() {
    const std::vector<std::string> across = {"weighted-mean", "sum",     "mean",   "lqm-0.9",
                                             "lqm-0.8",       "lqm-0.7", "min",    "max"};
    const std::vector<std::string> pool = {"sum",     "mean",    "lqm-0.1", "lqm-0.3",
                                           "lqm-0.5", "min",     "max"};
    std::vector<std::string> names;
    for (const auto& a : across) {
        for (const auto& p : pool) names.push_back("sent-" + a + "-pool-" + p);
    }
    for (const auto& p : pool) names.push_back("doc-pool-" + p);
    return names;
}

void write_sweep_csv(const std::vector<SweepRow>& rows, const std::string& path, uint64_t seed) {
    std::ofstream f(path);
    if (!f) throw ArchiveError("cannot open sweep report for writing: " + path);
    f << "# granuscore seed=" << seed << "\n";
    f << "strategy,ordering_accuracy,papers\n";
    f.precision(10);
    for (const auto& r : rows) {
        f << r.strategy << "," << r.ordering_accuracy << "," << r.papers << "\n";
    }
}

} // namespace granuscore
