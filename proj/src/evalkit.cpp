#include "granuscore/evalkit.hpp"

#include "granuscore/errors.hpp"
#include "granuscore/text_util.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>

namespace granuscore {

PairwiseResult pairwise_accuracy(const std::vector<ScoredEntry>& entries, PairScope scope) {
    PairwiseResult res;
    auto count_pairs = [&res](const std::vector<const ScoredRealization*>& pool) {
        for (size_t i = 0; i < pool.size(); ++i) {
            for (size_t j = i + 1; j < pool.size(); ++j) {
                const auto& a = *pool[i];
                const auto& b = *pool[j];
                if (a.gold == b.gold) continue; // no unique ordering at equal gold
                res.pairs += 1;
                // strict order required; predicted ties are incorrect
                if ((a.gold < b.gold && a.pred < b.pred) ||
                    (b.gold < a.gold && b.pred < a.pred)) {
                    res.correct += 1;
                }
            }
        }
    };
    if (scope == PairScope::global) {
        std::vector<const ScoredRealization*> pool;
        for (const auto& e : entries) {
            for (const auto& r : e.realizations) {
                if (r.covered) pool.push_back(&r);
            }
        }
        count_pairs(pool);
    } else {
        for (const auto& e : entries) {
            std::vector<const ScoredRealization*> pool;
            for (const auto& r : e.realizations) {
                if (r.covered) pool.push_back(&r);
            }
            count_pairs(pool);
        }
    }
    if (res.pairs == 0) {
        throw UndefinedMetricError("pairwise accuracy undefined: no pairs with distinct gold levels");
    }
    res.percent = 100.0 * static_cast<double>(res.correct) / static_cast<double>(res.pairs);
    return res;
}

ExactOrderingResult exact_ordering_accuracy(const std::vector<ScoredEntry>& entries) {
    ExactOrderingResult res;
    for (const auto& e : entries) {
        std::vector<const ScoredRealization*> pool;
        for (const auto& r : e.realizations) {
            if (r.covered) pool.push_back(&r);
        }
        if (pool.empty()) continue;
        res.entries += 1;
        std::vector<size_t> order(pool.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](size_t a, size_t b) { return pool[a]->pred < pool[b]->pred; });
        bool ok = true;
        for (size_t i = 0; i + 1 < order.size(); ++i) {
            if (!(pool[order[i]]->pred < pool[order[i + 1]]->pred) ||
                !(pool[order[i]]->gold < pool[order[i + 1]]->gold)) {
                ok = false;
                break;
            }
        }
        if (ok) res.correct += 1;
    }
    if (res.entries == 0) {
        throw UndefinedMetricError("exact ordering accuracy undefined: no scored entries");
    }
    res.percent = 100.0 * static_cast<double>(res.correct) / static_cast<double>(res.entries);
    return res;
}

CorrelationResult rank_correlations(const std::vector<ScoredEntry>& entries) {
    CorrelationResult res;
    std::vector<double> gold, pred;
    for (const auto& e : entries) {
        for (const auto& r : e.realizations) {
            if (!r.covered) continue;
            gold.push_back(r.gold);
            pred.push_back(r.pred);
        }
    }
    if (gold.size() < 2) {
        throw UndefinedMetricError("rank correlations undefined: fewer than 2 covered points");
    }
    res.points = gold.size();
    res.kendall_tau = 100.0 * kendall_tau_b(gold, pred);
    res.pearson_r = 100.0 * pearson_r(gold, pred);

    double tau_sum = 0.0;
    for (const auto& e : entries) {
        std::vector<double> g, p;
        for (const auto& r : e.realizations) {
            if (!r.covered) continue;
            g.push_back(r.gold);
            p.push_back(r.pred);
        }
        // needs at least two distinct gold levels
        if (g.size() < 2) continue;
        bool distinct = false;
        for (size_t i = 1; i < g.size(); ++i) {
            if (g[i] != g[0]) distinct = true;
        }
        if (!distinct) continue;
        res.intra_entries += 1;
        try {
            tau_sum += kendall_tau_b(g, p);
        } catch (const UndefinedMetricError&) {
            // constant predictions carry no ordering evidence
        }
    }
    if (res.intra_entries > 0) {
        res.intra_kendall_tau = 100.0 * tau_sum / static_cast<double>(res.intra_entries);
    }
    return res;
}

RankingReport evaluate_ranking(const std::vector<ScoredEntry>& entries) {
    RankingReport report;
    PairwiseResult global = pairwise_accuracy(entries, PairScope::global);
    PairwiseResult intra = pairwise_accuracy(entries, PairScope::intra);
    ExactOrderingResult exact = exact_ordering_accuracy(entries);
    CorrelationResult corr = rank_correlations(entries);
    report.global_pw_acc = global.percent;
    report.intra_pw_acc = intra.percent;
    report.exact_ordering_acc = exact.percent;
    report.kendall_tau = corr.kendall_tau;
    report.pearson_r = corr.pearson_r;
    report.intra_kendall_tau = corr.intra_kendall_tau;
    report.global_pairs = global.pairs;
    report.intra_pairs = intra.pairs;
    report.entries = exact.entries;
    for (const auto& e : entries) {
        for (const auto& r : e.realizations) {
            report.total_realizations += 1;
            if (r.covered) report.covered_realizations += 1;
        }
    }
    return report;
}

void write_ranking_csv(const std::vector<std::pair<std::string, RankingReport>>& rows,
                       const std::string& path, uint64_t seed) {
    std::ofstream f(path);
    if (!f) throw ArchiveError("cannot open ranking report for writing: " + path);
    f << "# granuscore seed=" << seed << "\n";
    f << "method,global_pw_acc,intra_pw_acc,exact_ordering_acc,kendall_tau,pearson_r,"
         "intra_kendall_tau,global_pairs,intra_pairs,entries,coverage\n";
    f.precision(10);
    for (const auto& [method, r] : rows) {
        double coverage = r.total_realizations == 0
                              ? 0.0
                              : 100.0 * static_cast<double>(r.covered_realizations) /
                                    static_cast<double>(r.total_realizations);
        f << method << "," << r.global_pw_acc << "," << r.intra_pw_acc << ","
          << r.exact_ordering_acc << "," << r.kendall_tau << "," << r.pearson_r << ","
          << r.intra_kendall_tau << "," << r.global_pairs << "," << r.intra_pairs << ","
          << r.entries << "," << coverage << "\n";
    }
}

void write_pair_dump(const std::vector<ScoredEntry>& entries, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw ArchiveError("cannot open pair dump for writing: " + path);
    f << "entry_i,real_i,entry_j,real_j,gold_i,gold_j,pred_i,pred_j,correct\n";
    f.precision(10);
    struct Item {
        size_t entry, pos;
        const ScoredRealization* r;
    };
    std::vector<Item> pool;
    for (size_t e = 0; e < entries.size(); ++e) {
        for (size_t p = 0; p < entries[e].realizations.size(); ++p) {
            if (entries[e].realizations[p].covered) pool.push_back({e, p, &entries[e].realizations[p]});
        }
    }
    for (size_t i = 0; i < pool.size(); ++i) {
        for (size_t j = i + 1; j < pool.size(); ++j) {
            const auto& a = *pool[i].r;
            const auto& b = *pool[j].r;
            if (a.gold == b.gold) continue;
            bool correct = (a.gold < b.gold && a.pred < b.pred) ||
                           (b.gold < a.gold && b.pred < a.pred);
            f << pool[i].entry << "," << pool[i].pos << "," << pool[j].entry << "," << pool[j].pos
              << "," << a.gold << "," << b.gold << "," << a.pred << "," << b.pred << ","
              << (correct ? 1 : 0) << "\n";
        }
    }
}

BaselineScore baseline_score(const std::string& text, BaselineMethod method,
                             const NounTaxonomy* taxonomy) {
    BaselineScore out;
    switch (method) {
        case BaselineMethod::word_count: {
            out.score = -static_cast<double>(whitespace_token_count(text));
            out.covered = true;
            return out;
        }
        case BaselineMethod::taxonomy_depth: {
            if (taxonomy == nullptr) {
                throw ResolutionError("taxonomy_depth baseline requires a loaded noun taxonomy");
            }
            std::vector<size_t> depths = taxonomy->depths_for(text);
            if (depths.empty()) {
                out.covered = false;
                out.score = 0.0;
                return out;
            }
            double sum = 0.0;
            for (size_t d : depths) sum += static_cast<double>(d);
            out.score = sum / static_cast<double>(depths.size());
            out.covered = true;
            return out;
        }
    }
    throw ConfigError("unhandled baseline method");
}

} // namespace granuscore
