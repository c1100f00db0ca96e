#include "granuscore/analysis.hpp"

#include "granuscore/errors.hpp"
#include "granuscore/parallel.hpp"
#include "granuscore/text_util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

namespace granuscore {

std::string qa_field_name(QaField f) {
    switch (f) {
        case QaField::question: return "question";
        case QaField::gold_answer: return "gold_answer";
        case QaField::model_answer: return "model_answer";
    }
    return "unknown";
}

std::vector<ScoredQaRecord> score_qa_records(const std::vector<QARecord>& records,
                                             UnitScorer& scorer, const AggregationSpec& spec,
                                             size_t jobs) {
    // score each distinct text once
    std::vector<std::string> texts;
    std::unordered_map<std::string, size_t> text_index;
    auto intern = [&](const std::string& t) {
        auto [it, inserted] = text_index.emplace(t, texts.size());
        if (inserted) texts.push_back(t);
        return it->second;
    };
    struct Slots {
        size_t q, g, a;
    };
    std::vector<Slots> slots;
    slots.reserve(records.size());
    for (const auto& r : records) {
        slots.push_back({intern(r.question), intern(r.gold_answer), intern(r.model_answer)});
    }
    std::vector<double> doc_scores(texts.size(), 0.0);
    parallel_for(texts.size(), jobs, [&](size_t i) {
        doc_scores[i] = score_text(texts[i], scorer, spec).document_score;
    });
    std::vector<ScoredQaRecord> out;
    out.reserve(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        ScoredQaRecord s;
        s.record = records[i];
        s.question_score = doc_scores[slots[i].q];
        s.gold_score = doc_scores[slots[i].g];
        s.answer_score = doc_scores[slots[i].a];
        out.push_back(std::move(s));
    }
    return out;
}

namespace {

double field_score(const ScoredQaRecord& r, QaField f) {
    switch (f) {
        case QaField::question: return r.question_score;
        case QaField::gold_answer: return r.gold_score;
        case QaField::model_answer: return r.answer_score;
    }
    return 0.0;
}

constexpr std::array<QaField, 3> kFields{QaField::question, QaField::gold_answer,
                                         QaField::model_answer};
constexpr std::array<QaOutcome, 3> kOutcomes{QaOutcome::correct, QaOutcome::wrong,
                                             QaOutcome::not_attempted};

} // namespace

OutcomeReport qa_outcome_report(const std::vector<ScoredQaRecord>& scored) {
    if (scored.empty()) throw DataError("qa_outcome_report: no records");
    OutcomeReport report;

    std::set<std::string> model_ids;
    for (const auto& r : scored) model_ids.insert(r.record.model_id);

    for (size_t fi = 0; fi < kFields.size(); ++fi) {
        for (size_t oi = 0; oi < kOutcomes.size(); ++oi) {
            // per-model means, then mean +- std across models
            std::vector<double> model_means;
            size_t n_records = 0;
            for (const auto& model : model_ids) {
                double sum = 0.0;
                size_t n = 0;
                for (const auto& r : scored) {
                    if (r.record.model_id != model || r.record.outcome != kOutcomes[oi]) continue;
                    sum += field_score(r, kFields[fi]);
                    n += 1;
                }
                if (n > 0) {
                    model_means.push_back(sum / static_cast<double>(n));
                    n_records += n;
                }
            }
            OutcomeCell& cell = report.cells[fi][oi];
            if (model_means.empty()) {
                if (fi == 0) {
                    report.warnings.push_back("no records with outcome " +
                                              qa_outcome_name(kOutcomes[oi]) + "; cell omitted");
                }
                continue;
            }
            cell.present = true;
            cell.n = n_records;
            cell.mean = std::accumulate(model_means.begin(), model_means.end(), 0.0) /
                        static_cast<double>(model_means.size());
            if (model_means.size() >= 2) {
                double ss = 0.0;
                for (double m : model_means) ss += (m - cell.mean) * (m - cell.mean);
                cell.std_across_models =
                    std::sqrt(ss / static_cast<double>(model_means.size() - 1));
            }
        }
    }

    // pairwise Mann-Whitney between outcome groups, pooled over models
    for (size_t fi = 0; fi < kFields.size(); ++fi) {
        for (size_t a = 0; a < kOutcomes.size(); ++a) {
            for (size_t b = a + 1; b < kOutcomes.size(); ++b) {
                std::vector<double> sa, sb;
                for (const auto& r : scored) {
                    if (r.record.outcome == kOutcomes[a]) {
                        sa.push_back(field_score(r, kFields[fi]));
                    } else if (r.record.outcome == kOutcomes[b]) {
                        sb.push_back(field_score(r, kFields[fi]));
                    }
                }
                if (sa.empty() || sb.empty()) continue;
                try {
                    report.pairwise_tests.push_back(OutcomePairTest{
                        kFields[fi], kOutcomes[a], kOutcomes[b], mann_whitney_u(sa, sb)});
                } catch (const UndefinedMetricError& e) {
                    report.warnings.push_back(std::string("mann-whitney skipped: ") + e.what());
                }
            }
        }
    }
    return report;
}

void write_outcome_csv(const OutcomeReport& report, const std::string& path, uint64_t seed) {
    std::ofstream f(path);
    if (!f) throw ArchiveError("cannot open outcome report for writing: " + path);
    f << "# granuscore seed=" << seed << "\n";
    f << "field,outcome,mean,std_across_models,n\n";
    f.precision(10);
    for (size_t fi = 0; fi < kFields.size(); ++fi) {
        for (size_t oi = 0; oi < kOutcomes.size(); ++oi) {
            const OutcomeCell& c = report.cells[fi][oi];
            if (!c.present) continue;
            f << qa_field_name(kFields[fi]) << "," << qa_outcome_name(kOutcomes[oi]) << ","
              << c.mean << "," << c.std_across_models << "," << c.n << "\n";
        }
    }
    f << "\nfield,outcome_a,outcome_b,u_statistic,p_value,n\n";
    for (const auto& t : report.pairwise_tests) {
        f << qa_field_name(t.field) << "," << qa_outcome_name(t.a) << "," << qa_outcome_name(t.b)
          << "," << t.test.statistic << "," << t.test.p_value << "," << t.test.n << "\n";
    }
}

GapAucResult gap_auc(const std::vector<ScoredQaRecord>& scored, size_t folds, uint64_t seed) {
    if (scored.size() < 2 * folds) {
        throw DataError("gap_auc: too few records for " + std::to_string(folds) + " folds");
    }
    std::vector<double> gaps(scored.size());
    std::vector<int> labels(scored.size());
    for (size_t i = 0; i < scored.size(); ++i) {
        gaps[i] = scored[i].gap();
        labels[i] = scored[i].record.outcome == QaOutcome::correct ? 0 : 1; // failure = positive
    }

    GapAucResult res;
    res.folds = folds;
    for (size_t attempt = 0; attempt < 5; ++attempt) {
        std::vector<size_t> fold = stratified_folds(labels, folds, seed + attempt);
        std::vector<double> fold_aucs;
        bool degenerate = false;
        for (size_t k = 0; k < folds; ++k) {
            std::vector<double> train_x, test_x;
            std::vector<int> train_y, test_y;
            for (size_t i = 0; i < gaps.size(); ++i) {
                if (fold[i] == k) {
                    test_x.push_back(gaps[i]);
                    test_y.push_back(labels[i]);
                } else {
                    train_x.push_back(gaps[i]);
                    train_y.push_back(labels[i]);
                }
            }
            size_t pos = static_cast<size_t>(std::count(test_y.begin(), test_y.end(), 1));
            if (test_y.empty() || pos == 0 || pos == test_y.size()) {
                degenerate = true;
                break;
            }
            LogisticFit fit = fit_logistic(train_x, train_y);
            std::vector<double> probs(test_x.size());
            for (size_t i = 0; i < test_x.size(); ++i) probs[i] = fit.predict(test_x[i]);
            fold_aucs.push_back(auc_from_scores(probs, test_y));
        }
        res.refold_attempts = attempt + 1;
        if (degenerate) continue;
        res.mean_auc = std::accumulate(fold_aucs.begin(), fold_aucs.end(), 0.0) /
                       static_cast<double>(fold_aucs.size());
        double ss = 0.0;
        for (double a : fold_aucs) ss += (a - res.mean_auc) * (a - res.mean_auc);
        res.std_auc = std::sqrt(ss / static_cast<double>(fold_aucs.size()));
        res.full_fit = fit_logistic(gaps, labels);
        return res;
    }
    throw DataError("gap_auc: could not build " + std::to_string(folds) +
                    " two-class folds in 5 attempts (outcome classes too small)");
}

namespace {

struct GroupStats {
    double q_sum = 0.0, g_sum = 0.0;
    size_t n = 0, correct = 0;
};

std::map<std::pair<std::string, std::string>, GroupStats> group_by_dataset_model(
    const std::vector<ScoredQaRecord>& scored) {
    std::map<std::pair<std::string, std::string>, GroupStats> groups;
    for (const auto& r : scored) {
        GroupStats& g = groups[{r.record.dataset_id, r.record.model_id}];
        g.q_sum += r.question_score;
        g.g_sum += r.gold_score;
        g.n += 1;
        if (r.record.outcome == QaOutcome::correct) g.correct += 1;
    }
    return groups;
}

} // namespace

void write_qa_scatter_csv(const std::vector<ScoredQaRecord>& scored, const std::string& path,
                          uint64_t seed) {
    std::ofstream f(path);
    if (!f) throw ArchiveError("cannot open scatter data for writing: " + path);
    f << "# granuscore seed=" << seed << "\n";
    f << "dataset,model,mean_question_score,mean_gold_score,correctness,n\n";
    f.precision(10);
    for (const auto& [key, g] : group_by_dataset_model(scored)) {
        double n = static_cast<double>(g.n);
        f << key.first << "," << key.second << "," << g.q_sum / n << "," << g.g_sum / n << ","
          << static_cast<double>(g.correct) / n << "," << g.n << "\n";
    }
}

void write_qa_scatter_svg(const std::vector<ScoredQaRecord>& scored, const std::string& path) {
    auto groups = group_by_dataset_model(scored);
    if (groups.empty()) throw DataError("scatter chart: no data");
    double min_x = 1e300, max_x = -1e300;
    for (const auto& [key, g] : groups) {
        double x = g.g_sum / static_cast<double>(g.n);
        min_x = std::min(min_x, x);
        max_x = std::max(max_x, x);
    }
    if (max_x <= min_x) max_x = min_x + 1.0;
    const double w = 640, h = 480, pad = 50;
    std::ofstream f(path);
    if (!f) throw ArchiveError("cannot open scatter chart for writing: " + path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\">\n";
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<line x1=\"" << pad << "\" y1=\"" << h - pad << "\" x2=\"" << w - pad << "\" y2=\""
      << h - pad << "\" stroke=\"black\"/>\n";
    f << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << h - pad
      << "\" stroke=\"black\"/>\n";
    f << "<text x=\"" << w / 2 << "\" y=\"" << h - 10
      << "\" text-anchor=\"middle\" font-size=\"12\">mean gold-answer score</text>\n";
    f << "<text x=\"15\" y=\"" << h / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 15 " << h / 2
      << ")\">correctness</text>\n";
    size_t color_i = 0;
    const char* colors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
    std::map<std::string, const char*> model_color;
    for (const auto& [key, g] : groups) {
        if (model_color.find(key.second) == model_color.end()) {
            model_color[key.second] = colors[color_i++ % 6];
        }
        double x = g.g_sum / static_cast<double>(g.n);
        double y = static_cast<double>(g.correct) / static_cast<double>(g.n);
        double px = pad + (x - min_x) / (max_x - min_x) * (w - 2 * pad);
        double py = h - pad - y * (h - 2 * pad);
        f << "<circle cx=\"" << px << "\" cy=\"" << py << "\" r=\"5\" fill=\""
          << model_color[key.second] << "\"><title>" << key.first << " / " << key.second
          << "</title></circle>\n";
    }
    f << "</svg>\n";
}

void write_qa_confounds_csv(const std::vector<ScoredQaRecord>& scored, const std::string& path,
                            uint64_t seed, const ConfoundProviders* providers) {
    struct Confounds {
        double ans_len = 0, q_len = 0, ans_depth = 0, q_depth = 0, ans_freq = 0, q_freq = 0;
        size_t n = 0, correct = 0;
    };
    bool have_depth = providers != nullptr && providers->tree_depth != nullptr;
    bool have_freq = providers != nullptr && providers->word_frequency != nullptr;
    std::map<std::string, Confounds> by_dataset;
    for (const auto& r : scored) {
        Confounds& c = by_dataset[r.record.dataset_id];
        c.ans_len += static_cast<double>(whitespace_token_count(r.record.gold_answer));
        c.q_len += static_cast<double>(whitespace_token_count(r.record.question));
        if (have_depth) {
            c.ans_depth += providers->tree_depth(r.record.gold_answer);
            c.q_depth += providers->tree_depth(r.record.question);
        }
        if (have_freq) {
            c.ans_freq += providers->word_frequency(r.record.gold_answer);
            c.q_freq += providers->word_frequency(r.record.question);
        }
        c.n += 1;
        if (r.record.outcome == QaOutcome::correct) c.correct += 1;
    }
    std::ofstream f(path);
    if (!f) throw ArchiveError("cannot open confound report for writing: " + path);
    f << "# granuscore seed=" << seed << "\n";
    f << "dataset,accuracy,answer_len,question_len,answer_tree_depth,question_tree_depth,"
         "answer_word_freq,question_word_freq,n\n";
    f.precision(10);
    for (const auto& [dataset, c] : by_dataset) {
        double n = static_cast<double>(c.n);
        f << dataset << "," << static_cast<double>(c.correct) / n << "," << c.ans_len / n << ","
          << c.q_len / n << ",";
        if (have_depth) {
            f << c.ans_depth / n << "," << c.q_depth / n << ",";
        } else {
            f << ",,";
        }
        if (have_freq) {
            f << c.ans_freq / n << "," << c.q_freq / n;
        } else {
            f << ",";
        }
        f << "," << c.n << "\n";
    }
}

} // namespace granuscore
