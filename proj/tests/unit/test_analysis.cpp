#include "granuscore/analysis.hpp"
#include "granuscore/errors.hpp"
#include "granuscore/rng.hpp"

#include "../support/synthetic.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace granuscore;
using granuscore::testsupport::trained_fixture;

namespace {

QARecord rec(const std::string& dataset, const std::string& model, const std::string& q,
             const std::string& gold, const std::string& ans, QaOutcome outcome) {
    return QARecord{dataset, q, gold, model, ans, outcome};
}

} // namespace

TEST_CASE("qa outcome report means match hand arithmetic on a fixture") {
    // two models, three records each; scores are known percentiles from the
    // trained fixture, so check the cell algebra with synthetic scores instead
    std::vector<ScoredQaRecord> scored;
    auto add = [&](const std::string& model, QaOutcome o, double q, double g, double a) {
        ScoredQaRecord s;
        s.record = rec("d1", model, "q", "g", "a", o);
        s.question_score = q;
        s.gold_score = g;
        s.answer_score = a;
        scored.push_back(s);
    };
    add("m1", QaOutcome::correct, 70, 60, 68);
    add("m1", QaOutcome::correct, 72, 62, 70);
    add("m1", QaOutcome::wrong, 64, 45, 66);
    add("m2", QaOutcome::correct, 68, 58, 71);
    add("m2", QaOutcome::wrong, 66, 47, 65);
    add("m2", QaOutcome::wrong, 62, 43, 67);

    OutcomeReport report = qa_outcome_report(scored);
    // question x correct: m1 mean = 71, m2 mean = 68 -> mean 69.5
    const OutcomeCell& qc = report.cells[0][0];
    CHECK(qc.present);
    CHECK(qc.mean == doctest::Approx(69.5));
    CHECK(qc.n == 3);
    CHECK(qc.std_across_models == doctest::Approx(std::sqrt(((71.0 - 69.5) * (71.0 - 69.5) +
                                                             (68.0 - 69.5) * (68.0 - 69.5)))));
    // model_answer x wrong: m1 mean = 66, m2 mean = 66 -> 66
    const OutcomeCell& aw = report.cells[2][1];
    CHECK(aw.mean == doctest::Approx(66.0));
    // not_attempted column is absent and warned about
    CHECK_FALSE(report.cells[0][2].present);
    CHECK_FALSE(report.warnings.empty());
    // order invariance
    auto shuffled = scored;
    std::reverse(shuffled.begin(), shuffled.end());
    OutcomeReport report2 = qa_outcome_report(shuffled);
    CHECK(report2.cells[0][0].mean == doctest::Approx(qc.mean));
}

TEST_CASE("score_qa_records scores fields through the document pipeline") {
    const auto& fx = trained_fixture();
    const auto& names = fx.world.concept_names;
    std::vector<QARecord> records;
    records.push_back(rec("d", "m", names[0], names[1], names[2], QaOutcome::correct));
    records.push_back(rec("d", "m", names[0], names[1], "", QaOutcome::not_attempted));
    auto scored = score_qa_records(records, *fx.scorer);
    REQUIRE(scored.size() == 2);
    CHECK(scored[0].question_score == doctest::Approx(fx.scorer->score(names[0])));
    CHECK(scored[0].gold_score == doctest::Approx(fx.scorer->score(names[1])));
    CHECK(scored[1].answer_score == doctest::Approx(100.0)); // empty answer falls back
    CHECK(scored[0].gap() ==
          doctest::Approx(scored[0].answer_score - scored[0].gold_score));
}

TEST_CASE("gap auc on an uninformative feature is near 0.5") {
    StreamRng rng(3);
    std::vector<ScoredQaRecord> scored;
    for (int i = 0; i < 1200; ++i) {
        ScoredQaRecord s;
        s.record = rec("d", "m", "q", "g", "a",
                       rng.next_double() < 0.5 ? QaOutcome::correct : QaOutcome::wrong);
        s.gold_score = 50.0;
        s.answer_score = 50.0 + 10.0 * rng.next_gaussian(); // label-independent
        scored.push_back(s);
    }
    GapAucResult r = gap_auc(scored, 5, 7);
    CHECK(r.mean_auc > 0.45);
    CHECK(r.mean_auc < 0.55);
}

TEST_CASE("gap auc matches the closed-form two-gaussian value") {
    // failures shifted by +2 sigma: AUC = Phi(2/sqrt(2)) = Phi(sqrt(2))
    StreamRng rng(5);
    std::vector<ScoredQaRecord> scored;
    for (int i = 0; i < 6000; ++i) {
        bool fail = rng.next_double() < 0.5;
        ScoredQaRecord s;
        s.record = rec("d", "m", "q", "g", "a", fail ? QaOutcome::wrong : QaOutcome::correct);
        s.gold_score = 50.0;
        double sigma = 8.0;
        s.answer_score = 50.0 + (fail ? 2.0 * sigma : 0.0) + sigma * rng.next_gaussian();
        scored.push_back(s);
    }
    GapAucResult r = gap_auc(scored, 5, 11);
    CHECK(r.mean_auc == doctest::Approx(0.9213503964748574).epsilon(0.022));
    CHECK(r.full_fit.slope > 0.0); // failure is the positive class
}

TEST_CASE("gap auc label permutation sanity") {
    StreamRng rng(7);
    std::vector<ScoredQaRecord> scored;
    for (int i = 0; i < 1500; ++i) {
        ScoredQaRecord s;
        // informative gaps, then permuted labels kill the signal
        bool fail = rng.next_double() < 0.4;
        s.record = rec("d", "m", "q", "g", "a", fail ? QaOutcome::wrong : QaOutcome::correct);
        s.gold_score = 50.0;
        s.answer_score = 50.0 + 10.0 * rng.next_gaussian();
        scored.push_back(s);
    }
    std::vector<QaOutcome> outcomes;
    for (const auto& s : scored) outcomes.push_back(s.record.outcome);
    StreamRng perm(1234);
    perm.shuffle(outcomes);
    for (size_t i = 0; i < scored.size(); ++i) scored[i].record.outcome = outcomes[i];
    GapAucResult r = gap_auc(scored, 5, 3);
    CHECK(r.mean_auc >= 0.45);
    CHECK(r.mean_auc <= 0.55);
}

TEST_CASE("scatter and confound reports") {
    std::vector<ScoredQaRecord> scored;
    auto add = [&](const std::string& ds, const std::string& model, QaOutcome o, double g) {
        ScoredQaRecord s;
        s.record = rec(ds, model, "what is this thing", "short answer", "a", o);
        s.question_score = 60.0;
        s.gold_score = g;
        s.answer_score = 65.0;
        scored.push_back(s);
    };
    add("ds1", "m1", QaOutcome::correct, 55);
    add("ds1", "m1", QaOutcome::wrong, 45);
    add("ds2", "m1", QaOutcome::correct, 70);
    auto dir = std::filesystem::temp_directory_path();
    std::string scatter = (dir / "granuscore_scatter.csv").string();
    write_qa_scatter_csv(scored, scatter, 5);
    {
        std::ifstream f(scatter);
        std::string all((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        CHECK(all.find("seed=5") != std::string::npos);
        CHECK(all.find("ds1,m1,60") != std::string::npos);
        CHECK(all.find("ds2,m1") != std::string::npos);
    }
    std::remove(scatter.c_str());

    std::string svg = (dir / "granuscore_scatter.svg").string();
    write_qa_scatter_svg(scored, svg);
    {
        std::ifstream f(svg);
        std::string all((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        CHECK(all.find("<svg") != std::string::npos);
        CHECK(all.find("circle") != std::string::npos);
    }
    std::remove(svg.c_str());

    // confound columns stay empty without hooks, fill with hooks
    std::string conf = (dir / "granuscore_conf.csv").string();
    write_qa_confounds_csv(scored, conf, 5);
    {
        std::ifstream f(conf);
        std::string header, row;
        std::getline(f, header); // seed comment
        std::getline(f, header);
        std::getline(f, row);
        CHECK(row.find(",,,") != std::string::npos); // empty depth/freq cells
    }
    ConfoundProviders providers;
    providers.tree_depth = [](const std::string&) { return 3.0; };
    providers.word_frequency = [](const std::string&) { return 0.5; };
    write_qa_confounds_csv(scored, conf, 5, &providers);
    {
        std::ifstream f(conf);
        std::string all((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
        CHECK(all.find(",3,") != std::string::npos);
    }
    std::remove(conf.c_str());
}

TEST_CASE("section text cleaning") {
    std::string dirty = "We follow [12, 13] and prior work (see also {math}).\n"
                        "Figure 3: a caption line that should vanish.\n"
                        "Details at https://example.org/x and \\cite{foo} remain filtered.";
    std::string cleaned = clean_section_text(dirty);
    CHECK(cleaned.find("[12") == std::string::npos);
    CHECK(cleaned.find("{math}") == std::string::npos);
    CHECK(cleaned.find("Figure 3") == std::string::npos);
    CHECK(cleaned.find("https://") == std::string::npos);
    CHECK(cleaned.find("\\cite") == std::string::npos);
    CHECK(cleaned.find("We follow") != std::string::npos);
    CHECK(cleaned.find("prior work") != std::string::npos);
}

TEST_CASE("paragraph selection follows the ten-unit rule") {
    const auto& fx = trained_fixture();
    const auto& fine = fx.world.fine_names;
    const auto& coarse = fx.world.coarse_names;
    auto paragraph = [&](const std::vector<std::string>& pool, size_t start, size_t n) {
        std::string p;
        for (size_t i = 0; i < n; ++i) {
            p += pool[(start + i) % pool.size()] + (i + 1 < n ? " of " : ".");
        }
        return p;
    };
    std::vector<SectionRecord> records;
    // intro: first paragraph too short, second qualifies
    records.push_back(SectionRecord{
        "p1", "introduction", {paragraph(coarse, 0, 3), paragraph(coarse, 0, 12)}});
    // related work: opening transition qualifies but is skipped; the second
    // paragraph qualifies and wins
    records.push_back(SectionRecord{
        "p1", "related work", {paragraph(fine, 0, 12), paragraph(fine, 12, 12)}});
    // p2: related work has only the opening paragraph -> fallback to it
    records.push_back(SectionRecord{"p2", "introduction", {paragraph(coarse, 3, 11)}});
    records.push_back(SectionRecord{"p2", "related work", {paragraph(fine, 5, 11)}});
    // p3: nothing qualifies -> dropped
    records.push_back(SectionRecord{"p3", "introduction", {paragraph(coarse, 0, 2)}});
    records.push_back(SectionRecord{"p3", "related work", {paragraph(fine, 0, 2)}});

    auto pairs = select_paper_pairs(records, 10);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].paper_id == "p1");
    CHECK(pairs[0].intro_paragraph.find(coarse[0]) != std::string::npos);
    // second related-work paragraph selected, not the opening one
    CHECK(pairs[0].related_paragraph.find(fine[12 % fine.size()]) != std::string::npos);
    CHECK(pairs[1].paper_id == "p2");
}

TEST_CASE("injected-vocabulary corpus orders intro above related work") {
    const auto& fx = trained_fixture();
    const auto& fine = fx.world.fine_names;
    const auto& coarse = fx.world.coarse_names;
    auto paragraph = [&](const std::vector<std::string>& pool, size_t start) {
        std::string p;
        for (size_t i = 0; i < 12; ++i) {
            p += pool[(start + 3 * i) % pool.size()] + (i < 11 ? " of " : ".");
        }
        return p;
    };
    std::vector<SectionRecord> records;
    for (size_t paper = 0; paper < 12; ++paper) {
        std::string id = "paper-" + std::to_string(paper);
        records.push_back(SectionRecord{id, "introduction", {paragraph(coarse, paper)}});
        records.push_back(
            SectionRecord{id, "related work", {paragraph(fine, paper), paragraph(fine, paper + 7)}});
    }
    auto pairs = select_paper_pairs(records, 10);
    REQUIRE(pairs.size() == 12);
    SectionCompareResult res = section_compare(pairs, *fx.scorer);
    CHECK(res.ordering_fraction == doctest::Approx(1.0)); // coarse intro wins everywhere
    CHECK(res.ordering_fraction + res.tie_fraction + res.reverse_fraction ==
          doctest::Approx(1.0));
    CHECK(res.insufficient_data); // fewer than 30 papers
    CHECK(res.intro_mean > res.related_mean);
    CHECK(res.cohens_dz > 0.0);
}

TEST_CASE("identical sections give a zero ordering fraction (strict greater)") {
    const auto& fx = trained_fixture();
    const auto& coarse = fx.world.coarse_names;
    std::string para;
    for (size_t i = 0; i < 12; ++i) para += coarse[i % coarse.size()] + (i < 11 ? " of " : ".");
    std::vector<PaperPair> pairs;
    for (int i = 0; i < 5; ++i) {
        pairs.push_back(PaperPair{"p" + std::to_string(i), para, para});
    }
    SectionCompareResult res = section_compare(pairs, *fx.scorer);
    CHECK(res.ordering_fraction == doctest::Approx(0.0)); // strict greater only
    CHECK(res.tie_fraction == doctest::Approx(1.0));
    CHECK(res.tests_degenerate);
    auto rows = aggregation_sweep(pairs, *fx.scorer,
                                  {AggregationSpec::parse("sent-lqm-0.8-pool-mean")});
    CHECK(rows[0].ordering_accuracy == doctest::Approx(0.0));
}

TEST_CASE("aggregation sweep reuses unit scores and matches score_text") {
    const auto& fx = trained_fixture();
    const auto& fine = fx.world.fine_names;
    const auto& coarse = fx.world.coarse_names;
    std::vector<PaperPair> pairs;
    for (size_t paper = 0; paper < 6; ++paper) {
        std::string intro, related;
        for (size_t i = 0; i < 12; ++i) {
            intro += coarse[(paper + 2 * i) % coarse.size()] + (i < 11 ? " of " : ". ");
            related += fine[(paper + 2 * i) % fine.size()] + (i < 11 ? " of " : ". ");
        }
        pairs.push_back(PaperPair{"p" + std::to_string(paper), intro, related});
    }
    std::vector<AggregationSpec> specs = {AggregationSpec::parse("sent-lqm-0.8-pool-mean"),
                                          AggregationSpec::parse("sent-lqm-1-pool-mean"),
                                          AggregationSpec::parse("sent-mean-pool-mean"),
                                          AggregationSpec::parse("doc-pool-max")};
    auto rows = aggregation_sweep(pairs, *fx.scorer, specs);
    REQUIRE(rows.size() == 4);
    // lqm(1.0) and mean are mathematically identical
    CHECK(rows[1].ordering_accuracy == rows[2].ordering_accuracy);
    // sweep output equals a from-scratch score_text run, bitwise
    AggregationSpec def = AggregationSpec::parse("sent-lqm-0.8-pool-mean");
    size_t greater = 0;
    for (const auto& p : pairs) {
        double intro = score_text(p.intro_paragraph, *fx.scorer, def).document_score;
        double related = score_text(p.related_paragraph, *fx.scorer, def).document_score;
        if (intro > related) ++greater;
    }
    CHECK(rows[0].ordering_accuracy ==
          doctest::Approx(100.0 * static_cast<double>(greater) / 6.0));
    // full strategy grid parses
    for (const auto& name : sweep_strategy_names()) {
        CHECK_NOTHROW(AggregationSpec::parse(name));
    }
    CHECK(sweep_strategy_names().size() == 63);
}
